//! In-vacuo modes and the modally reduced flutter pencil.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{FlutterError, Result};
use crate::fem::{GlobalSystem, ScaleMetadata};
use crate::linalg::dense::generalized_symmetric_eigen;
use crate::linalg::unsymmetric::{eigenpairs, EigenPair};
use crate::linalg::{pattern_adjacency, reverse_cuthill_mckee, CsrMatrix, Mat, SkylineLdl};
use crate::scalar::Real;

/// Seed of the deterministic starting subspace.
pub const START_SEED: u64 = 0x5eed_f1a7;
/// Systems up to this size are solved densely.
pub const DENSE_LIMIT: usize = 240;

/// Options of the shift-invert subspace iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceOptions {
    pub max_iterations: usize,
    /// Residual `||K x - w2 M x|| / ((|w2| + w2_max) ||M x||)` required of every mode.
    pub tolerance: f64,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            tolerance: 1e-9,
        }
    }
}

/// Lowest modes of `K phi = omega^2 M phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalBasis<T> {
    /// Ascending eigenvalues (rad^2/s^2).
    pub omega2: Vec<T>,
    /// Mass-orthonormal mode shapes over the free DOFs.
    pub phi: Vec<Vec<T>>,
    pub iterations: usize,
    pub max_residual: T,
}

impl<T: Real> ModalBasis<T> {
    pub fn len(&self) -> usize {
        self.omega2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega2.is_empty()
    }

    /// Keeps the lowest `m` modes.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.len());
        Self {
            omega2: self.omega2[..m].to_vec(),
            phi: self.phi[..m].to_vec(),
            iterations: self.iterations,
            max_residual: self.max_residual,
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn residuals<T: Real>(k: &CsrMatrix<T>, m: &CsrMatrix<T>, omega2: &[T], phi: &[Vec<T>]) -> Vec<T> {
    let top = omega2.iter().fold(T::zero(), |a, w| a.max(w.abs()));
    phi.par_iter()
        .zip(omega2.par_iter())
        .map(|(x, w)| {
            let kx = k.mul_vec(x);
            let mx = m.mul_vec(x);
            let r: Vec<T> = kx.iter().zip(&mx).map(|(a, b)| *a - *w * *b).collect();
            norm(&r) / ((w.abs() + top) * norm(&mx)).max(T::min_positive_value())
        })
        .collect()
}

/// Lowest `count` eigenpairs of the pencil `(K, M)` of `system`.
pub fn free_vibration<T: Real>(system: &GlobalSystem<T>, count: usize) -> Result<ModalBasis<T>> {
    free_vibration_with(&system.k, &system.m, count, SubspaceOptions::default())
}

/// Lowest `count` eigenpairs of `K x = w2 M x` for sparse symmetric `K`, `M`.
pub fn free_vibration_with<T: Real>(k: &CsrMatrix<T>, m: &CsrMatrix<T>, count: usize, opts: SubspaceOptions) -> Result<ModalBasis<T>> {
    let n = k.rows;
    if count == 0 || count > n {
        return Err(FlutterError::Argument(format!("cannot extract {count} modes from {n} free DOFs")));
    }
    if n <= DENSE_LIMIT {
        return dense_free_vibration(k, m, count);
    }
    let p = (2 * count).max(count + 8).min(n);
    // A small negative shift keeps the factorization regular when rigid
    // modes are present; it is proportional to the spectrum, so it does not
    // depend on the units of K and M.
    let trk: T = k.diagonal().iter().copied().sum();
    let trm: T = m.diagonal().iter().copied().sum();
    let sigma = -T::lit(1e-10) * (trk / trm).abs();
    let perm = reverse_cuthill_mckee(n, &pattern_adjacency(&[k, m]));
    let factor = SkylineLdl::factor_combination(&[(k, T::one()), (m, -sigma)], &perm)?;

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x: Vec<Vec<T>> = (0..p)
        .map(|_| (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let tol = T::lit(opts.tolerance);
    let mut worst = T::infinity();
    for iter in 1..=opts.max_iterations {
        let y: Vec<Vec<T>> = x.par_iter().map(|v| m.mul_vec(v)).collect();
        let xb: Vec<Vec<T>> = y
            .par_iter()
            .map_init(Vec::new, |work, v| {
                let mut s = v.clone();
                factor.solve_in_place(&mut s, work);
                s
            })
            .collect();
        let mxb: Vec<Vec<T>> = xb.par_iter().map(|v| m.mul_vec(v)).collect();
        // Projected pencil: xb^T (K - sigma M) xb = xb^T y.
        let mut kp = Mat::zeros(p, p);
        let mut mp = Mat::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let kij = (dot(&xb[i], &y[j]) + dot(&xb[j], &y[i])) * T::half();
                let mij = (dot(&xb[i], &mxb[j]) + dot(&xb[j], &mxb[i])) * T::half();
                kp[(i, j)] = kij;
                kp[(j, i)] = kij;
                mp[(i, j)] = mij;
                mp[(j, i)] = mij;
            }
        }
        let (mu, q) = generalized_symmetric_eigen(&kp, &mp)?;
        x = (0..p)
            .into_par_iter()
            .map(|c| {
                let mut v = vec![T::zero(); n];
                for (r, xr) in xb.iter().enumerate() {
                    let coef = q[(r, c)];
                    for (vi, xi) in v.iter_mut().zip(xr) {
                        *vi += coef * *xi;
                    }
                }
                v
            })
            .collect();
        let omega2: Vec<T> = mu[..count].iter().map(|u| *u + sigma).collect();
        let res = residuals(k, m, &omega2, &x[..count]);
        worst = res.iter().fold(T::zero(), |a, r| a.max(*r));
        if worst <= tol {
            return Ok(ModalBasis {
                omega2,
                phi: x[..count].to_vec(),
                iterations: iter,
                max_residual: worst,
            });
        }
    }
    Err(FlutterError::Convergence {
        iterations: opts.max_iterations,
        residual: worst.to_f64_lossy(),
    })
}

/// Dense solve of the full pencil; the reference for small systems.
pub fn dense_free_vibration<T: Real>(k: &CsrMatrix<T>, m: &CsrMatrix<T>, count: usize) -> Result<ModalBasis<T>> {
    let n = k.rows;
    if count == 0 || count > n {
        return Err(FlutterError::Argument(format!("cannot extract {count} modes from {n} free DOFs")));
    }
    let kd = Mat::from_rows(&k.to_dense());
    let md = Mat::from_rows(&m.to_dense());
    let (vals, vecs) = generalized_symmetric_eigen(&kd, &md)?;
    let phi: Vec<Vec<T>> = (0..count).map(|c| vecs.col(c)).collect();
    let omega2 = vals[..count].to_vec();
    let worst = residuals(k, m, &omega2, &phi).iter().fold(T::zero(), |a, r| a.max(*r));
    Ok(ModalBasis {
        omega2,
        phi,
        iterations: 1,
        max_residual: worst,
    })
}

/// `Kr + lambda Ar` with identity reduced mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPencil<T> {
    pub kr: Mat<T>,
    pub ar: Mat<T>,
}

impl<T: Real> ReducedPencil<T> {
    pub fn new(kr: Mat<T>, ar: Mat<T>) -> Result<Self> {
        if kr.rows != kr.cols || ar.rows != ar.cols || kr.rows != ar.rows {
            return Err(FlutterError::Argument("pencil matrices must be square and of equal size".into()));
        }
        Ok(Self { kr, ar })
    }

    pub fn dim(&self) -> usize {
        self.kr.rows
    }

    /// `Kr + lambda Ar`.
    pub fn operator(&self, lambda: T) -> Mat<T> {
        self.kr.add_scaled(&self.ar, lambda)
    }

    /// Pencil in nondimensional units: eigenvalues become `Omega^2` and the
    /// parameter becomes `lambda_nd`.
    pub fn nondimensional(&self, scale: &ScaleMetadata<T>) -> Self {
        let cw = scale.omega2_factor();
        Self {
            kr: self.kr.scaled(cw),
            ar: self.ar.scaled(cw / scale.lambda_factor()),
        }
    }

    /// Keeps the leading `m x m` block.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.dim());
        let cut = |a: &Mat<T>| {
            let mut out = Mat::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    out[(i, j)] = a[(i, j)];
                }
            }
            out
        };
        Self {
            kr: cut(&self.kr),
            ar: cut(&self.ar),
        }
    }
}

/// Projects the aerodynamic matrix onto the modal basis.
pub fn reduce<T: Real>(system: &GlobalSystem<T>, basis: &ModalBasis<T>) -> ReducedPencil<T> {
    let m = basis.len();
    let aphi: Vec<Vec<T>> = basis.phi.par_iter().map(|v| system.abar.mul_vec(v)).collect();
    let mut ar = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            ar[(i, j)] = dot(&basis.phi[i], &aphi[j]);
        }
    }
    ReducedPencil {
        kr: Mat::diag(&basis.omega2),
        ar,
    }
}

/// All eigenvalues of `Kr + lambda Ar` with eigenvectors, sorted by real
/// part with conjugate pairs adjacent.
pub fn complex_eigs<T: Real>(pencil: &ReducedPencil<T>, lambda: T) -> Result<Vec<EigenPair<T>>> {
    if !lambda.is_finite() {
        return Err(FlutterError::Argument("aerodynamic pressure must be finite".into()));
    }
    eigenpairs(&pencil.operator(lambda))
}

/// Eigenvalues only.
pub fn complex_eigenvalues<T: Real>(pencil: &ReducedPencil<T>, lambda: T) -> Result<Vec<Complex<T>>> {
    Ok(complex_eigs(pencil, lambda)?.into_iter().map(|p| p.value).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unsymmetric::relative_residual;

    fn chain(n: usize, rigid: bool) -> (CsrMatrix<f64>, CsrMatrix<f64>) {
        // Spring-mass chain; free ends give one rigid mode.
        let mut k = Vec::new();
        let mut m = Vec::new();
        for i in 0..n {
            let mut d = 0.0;
            if i > 0 {
                k.push((i, i - 1, -1.0));
                d += 1.0;
            }
            if i + 1 < n {
                k.push((i, i + 1, -1.0));
                d += 1.0;
            }
            if !rigid && i == 0 {
                d += 1.0;
            }
            k.push((i, i, d));
            m.push((i, i, 1.0 + 0.01 * i as f64));
        }
        (CsrMatrix::from_triplets(n, n, k), CsrMatrix::from_triplets(n, n, m))
    }

    #[test]
    fn subspace_matches_dense_reference() {
        let (k, m) = chain(300, false);
        let it = free_vibration_with(&k, &m, 6, SubspaceOptions::default()).unwrap();
        let dense = dense_free_vibration(&k, &m, 6).unwrap();
        for (a, b) in it.omega2.iter().zip(&dense.omega2) {
            assert!((a - b).abs() <= 1e-9 * b, "{a} vs {b}");
        }
        for i in 0..6 {
            for j in 0..6 {
                let mij = dot(&it.phi[i], &m.mul_vec(&it.phi[j]));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((mij - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rigid_mode_is_found() {
        let (k, m) = chain(400, true);
        let b = free_vibration_with(&k, &m, 3, SubspaceOptions::default()).unwrap();
        assert!(b.omega2[0].abs() < 1e-10 * b.omega2[1]);
        assert!(b.omega2[1] > 0.0);
    }

    #[test]
    fn uniform_scaling_leaves_eigenvalues() {
        let (k, m) = chain(300, false);
        let s = 7.3e5;
        let scale = |a: &CsrMatrix<f64>| CsrMatrix { data: a.data.iter().map(|v| v * s).collect(), ..a.clone() };
        let a = free_vibration_with(&k, &m, 4, SubspaceOptions::default()).unwrap();
        let b = free_vibration_with(&scale(&k), &scale(&m), 4, SubspaceOptions::default()).unwrap();
        for (x, y) in a.omega2.iter().zip(&b.omega2) {
            assert!((x - y).abs() <= 1e-8 * x);
        }
    }

    #[test]
    fn too_many_modes_is_an_argument_error() {
        let (k, m) = chain(5, false);
        assert!(matches!(free_vibration_with(&k, &m, 6, SubspaceOptions::default()), Err(FlutterError::Argument(_))));
    }

    #[test]
    fn pencil_at_zero_pressure_is_the_modal_spectrum() {
        let kr = Mat::diag(&[1.0f64, 4.0, 9.0]);
        let ar = Mat::from_rows(&[vec![0.1, 1.0, 0.3], vec![-1.0, 0.0, 0.5], vec![0.2, -0.5, 0.0]]);
        let p = ReducedPencil::new(kr, ar).unwrap();
        let ev = complex_eigenvalues(&p, 0.0).unwrap();
        for (e, w) in ev.iter().zip([1.0, 4.0, 9.0]) {
            assert_eq!(e.im, 0.0);
            assert!((e.re - w).abs() < 1e-14);
        }
        let one = p.truncated(1);
        let ev = complex_eigenvalues(&one, 2.0).unwrap();
        assert!((ev[0].re - 1.2).abs() < 1e-14);
        for pair in complex_eigs(&p, 3.0).unwrap() {
            assert!(relative_residual(&p.operator(3.0), &pair) < 1e-8);
        }
    }
}
