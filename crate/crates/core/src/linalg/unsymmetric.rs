//! Eigenvalues and eigenvectors of small real unsymmetric matrices:
//! Householder reduction to upper Hessenberg form, Francis double-shift QR
//! iteration, and complex inverse iteration for the vectors.

use num_complex::Complex;

use crate::error::{FlutterError, Result};
use crate::linalg::dense::Mat;
use crate::scalar::Real;

/// Reduces `a` to upper Hessenberg form by orthogonal similarity.
pub fn hessenberg<T: Real>(a: &Mat<T>) -> Mat<T> {
    let n = a.rows;
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    let mut ort = vec![T::zero(); n];
    let high = n - 1;
    for m in 1..high {
        let scale: T = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == T::zero() {
            continue;
        }
        let mut hh = T::zero();
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = T::zero();
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = T::zero();
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
    }
    for i in 2..n {
        for j in 0..(i - 1) {
            h[(i, j)] = T::zero();
        }
    }
    h
}

/// All eigenvalues of a real matrix, via Hessenberg reduction and the
/// Francis double-shift QR algorithm.
pub fn eigenvalues<T: Real>(a: &Mat<T>) -> Result<Vec<Complex<T>>> {
    let nn = a.rows;
    if nn == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let mut re = vec![T::zero(); nn];
    let mut im = vec![T::zero(); nn];
    let eps = T::epsilon();
    let mut norm = T::zero();
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    let mut exshift = T::zero();
    let (mut p, mut q, mut r, mut s, mut z): (T, T, T, T, T);
    let (mut w, mut x, mut y);
    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    let max_total = 60 * nn.max(4);
    while n >= 0 {
        let nu = n as usize;
        // Single small sub-diagonal element.
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == T::zero() {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }
        if l == nu {
            // One root.
            re[nu] = h[(nu, nu)] + exshift;
            im[nu] = T::zero();
            h[(nu, nu)] = re[nu];
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            // Two roots.
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) * T::half();
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(nu, nu)] + exshift;
            if q >= T::zero() {
                z = if p >= T::zero() { p + z } else { p - z };
                re[nu - 1] = x + z;
                re[nu] = re[nu - 1];
                if z != T::zero() {
                    re[nu] = x - w / z;
                }
                im[nu - 1] = T::zero();
                im[nu] = T::zero();
            } else {
                re[nu - 1] = x + p;
                re[nu] = x + p;
                im[nu - 1] = z;
                im[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // Shift.
            x = h[(nu, nu)];
            y = T::zero();
            w = T::zero();
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) * T::half();
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) * T::half() + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total_iter += 1;
            if total_iter > max_total {
                return Err(FlutterError::Convergence {
                    iterations: total_iter,
                    residual: h[(nu, nu - 1)].abs().to_f64_lossy(),
                });
            }

            // Two consecutive small sub-diagonal elements.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                h[(i, i - 2)] = T::zero();
                if i > m + 2 {
                    h[(i, i - 3)] = T::zero();
                }
            }

            // Double QR step on rows l..=n, columns m..=n.
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { T::zero() };
                    x = p.abs() + q.abs() + r.abs();
                    if x == T::zero() {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s != T::zero() {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            pp += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= pp * z;
                        }
                        h[(k, j)] -= pp * x;
                        h[(k + 1, j)] -= pp * y;
                    }
                    let upper = nu.min(k + 3);
                    for i in 0..=upper {
                        let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            pp += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= pp * r;
                        }
                        h[(i, k)] -= pp;
                        h[(i, k + 1)] -= pp * q;
                    }
                }
            }
        }
    }
    Ok(re.into_iter().zip(im).map(|(r, i)| Complex::new(r, i)).collect())
}

/// Eigenpair of a real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub value: Complex<T>,
    /// Unit 2-norm eigenvector.
    pub vector: Vec<Complex<T>>,
}

/// Eigenvalues sorted by real part (conjugate pairs adjacent, positive
/// imaginary part first) with eigenvectors by inverse iteration.
pub fn eigenpairs<T: Real>(a: &Mat<T>) -> Result<Vec<EigenPair<T>>> {
    let n = a.rows;
    let mut values = eigenvalues(a)?;
    // Clean up conjugate pairing so that the spectrum is exactly closed.
    values.sort_by(|u, v| {
        u.re.partial_cmp(&v.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(v.im.partial_cmp(&u.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    let anorm = a.frobenius_norm().max(T::min_positive_value());
    let mut pairs: Vec<EigenPair<T>> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let v = values[i];
        if v.im > T::zero() && i + 1 < n {
            let vec = inverse_iteration(a, v, anorm, &pairs)?;
            let conj_vec: Vec<Complex<T>> = vec.iter().map(|c| c.conj()).collect();
            pairs.push(EigenPair { value: v, vector: vec });
            pairs.push(EigenPair {
                value: v.conj(),
                vector: conj_vec,
            });
            i += 2;
        } else {
            let value = Complex::new(v.re, T::zero());
            let vec = inverse_iteration(a, value, anorm, &pairs)?;
            pairs.push(EigenPair { value, vector: vec });
            i += 1;
        }
    }
    Ok(pairs)
}

fn inverse_iteration<T: Real>(a: &Mat<T>, value: Complex<T>, anorm: T, previous: &[EigenPair<T>]) -> Result<Vec<Complex<T>>> {
    let n = a.rows;
    let cluster_tol = anorm * T::lit(1e3) * T::epsilon().sqrt();
    let cluster: Vec<&Vec<Complex<T>>> = previous
        .iter()
        .filter(|p| (p.value - value).norm() <= cluster_tol)
        .map(|p| &p.vector)
        .collect();
    let offset = anorm * T::epsilon() * T::lit(16.0);
    let shift = value + Complex::new(offset, offset * T::lit(0.5));
    let mut shifted = vec![Complex::new(T::zero(), T::zero()); n * n];
    for i in 0..n {
        for j in 0..n {
            shifted[i * n + j] = Complex::new(a[(i, j)], T::zero());
        }
        shifted[i * n + i] -= shift;
    }
    let lu = ComplexLu::new(shifted, n);
    // Deterministic start vector, different for every member of a cluster.
    let mut x: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let t = T::from_usize_lossy(k + 1 + 7 * cluster.len());
            Complex::new(T::one() + (t * T::lit(0.618_033_988_749_894_9)).sin() * T::half(), T::zero())
        })
        .collect();
    for _ in 0..3 {
        orthogonalize(&mut x, &cluster);
        lu.solve(&mut x);
        orthogonalize(&mut x, &cluster);
        normalize(&mut x);
    }
    // Fix the phase: largest component real and positive.
    let k = (0..n)
        .max_by(|&i, &j| x[i].norm().partial_cmp(&x[j].norm()).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    if n > 0 && x[k].norm() > T::zero() {
        let phase = x[k].conj() / x[k].norm();
        for c in &mut x {
            *c *= phase;
        }
    }
    if x.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(FlutterError::Convergence {
            iterations: 3,
            residual: f64::NAN,
        });
    }
    Ok(x)
}

fn orthogonalize<T: Real>(x: &mut [Complex<T>], basis: &[&Vec<Complex<T>>]) {
    for b in basis {
        let mut dot = Complex::new(T::zero(), T::zero());
        for (bi, xi) in b.iter().zip(x.iter()) {
            dot += bi.conj() * *xi;
        }
        for (bi, xi) in b.iter().zip(x.iter_mut()) {
            *xi -= *bi * dot;
        }
    }
}

fn normalize<T: Real>(x: &mut [Complex<T>]) {
    let nrm = x.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
    if nrm > T::zero() {
        for c in x.iter_mut() {
            *c /= nrm;
        }
    }
}

/// Dense complex LU with partial pivoting.
struct ComplexLu<T> {
    n: usize,
    lu: Vec<Complex<T>>,
    piv: Vec<usize>,
}

impl<T: Real> ComplexLu<T> {
    fn new(mut a: Vec<Complex<T>>, n: usize) -> Self {
        let mut piv: Vec<usize> = (0..n).collect();
        let tiny = T::min_positive_value().sqrt();
        for col in 0..n {
            let p = (col..n)
                .max_by(|&i, &j| {
                    a[i * n + col]
                        .norm()
                        .partial_cmp(&a[j * n + col].norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("non-empty");
            if p != col {
                for k in 0..n {
                    a.swap(p * n + k, col * n + k);
                }
                piv.swap(p, col);
            }
            if a[col * n + col].norm() < tiny {
                a[col * n + col] = Complex::new(tiny, T::zero());
            }
            let d = a[col * n + col];
            for i in (col + 1)..n {
                let f = a[i * n + col] / d;
                a[i * n + col] = f;
                for k in (col + 1)..n {
                    let v = a[col * n + k];
                    a[i * n + k] -= f * v;
                }
            }
        }
        Self { n, lu: a, piv }
    }

    fn solve(&self, b: &mut [Complex<T>]) {
        let n = self.n;
        let mut x: Vec<Complex<T>> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let v = x[k];
                x[i] -= self.lu[i * n + k] * v;
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let v = x[k];
                x[i] -= self.lu[i * n + k] * v;
            }
            x[i] /= self.lu[i * n + i];
        }
        b.copy_from_slice(&x);
    }
}

/// `||A v - s v|| / ||A||_F` for an eigenpair.
pub fn relative_residual<T: Real>(a: &Mat<T>, pair: &EigenPair<T>) -> T {
    let n = a.rows;
    let mut worst = T::zero();
    for i in 0..n {
        let mut s = Complex::new(T::zero(), T::zero());
        for j in 0..n {
            s += pair.vector[j] * a[(i, j)];
        }
        s -= pair.value * pair.vector[i];
        worst += s.norm_sqr();
    }
    worst.sqrt() / a.frobenius_norm().max(T::min_positive_value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_block_has_imaginary_pair() {
        let a = Mat::from_rows(&[vec![1.0, 1.0], vec![-1.0, 4.0]]);
        // (1 - s)(4 - s) + 1 = 0 -> s = 2.5 +- i sqrt(3)/2... discriminant 9 - 4 = 5 > 0 -> real
        let ev = eigenvalues(&a).unwrap();
        let mut re: Vec<f64> = ev.iter().map(|c| c.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = 5f64.sqrt() / 2.0;
        assert!((re[0] - (2.5 - d)).abs() < 1e-13 && (re[1] - (2.5 + d)).abs() < 1e-13);
        let b = Mat::from_rows(&[vec![1.0f64, 2.0], vec![-2.0, 4.0]]);
        let ev = eigenvalues(&b).unwrap();
        // s^2 - 5s + 8 = 0 -> 2.5 +- i sqrt(7)/2
        for e in ev {
            assert!((e.re - 2.5).abs() < 1e-13 && (e.im.abs() - 7f64.sqrt() / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn companion_matrix_roots() {
        // Roots 1, 2, 3, 4, 5 of the monic quintic.
        let c = [-120.0, 274.0, -225.0, 85.0, -15.0];
        let mut a = Mat::zeros(5, 5);
        for i in 1..5 {
            a[(i, i - 1)] = 1.0;
        }
        for i in 0..5 {
            a[(i, 4)] = -c[i];
        }
        let pairs = eigenpairs(&a).unwrap();
        for (k, p) in pairs.iter().enumerate() {
            assert!((p.value.re - (k as f64 + 1.0)).abs() < 1e-9, "{:?}", p.value);
            assert!(relative_residual(&a, p) < 1e-10);
        }
    }

    #[test]
    fn random_matrix_residuals_and_conjugate_closure() {
        let n = 12;
        let mut a = Mat::zeros(n, n);
        let mut seed = 12345u64;
        for v in a.data.iter_mut() {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *v = ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
        }
        let pairs = eigenpairs(&a).unwrap();
        assert_eq!(pairs.len(), n);
        let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
        let sum: f64 = pairs.iter().map(|p| p.value.re).sum();
        assert!((trace - sum).abs() < 1e-10);
        for p in &pairs {
            assert!(relative_residual(&a, p) < 1e-8);
            if p.value.im != 0.0 {
                assert!(pairs.iter().any(|q| q.value == p.value.conj()));
            }
        }
    }

    #[test]
    fn repeated_eigenvalue_gets_independent_vectors() {
        let a = Mat::diag(&[2.0, 2.0, 5.0]);
        let pairs = eigenpairs(&a).unwrap();
        let v0 = &pairs[0].vector;
        let v1 = &pairs[1].vector;
        let dot: Complex<f64> = v0.iter().zip(v1).map(|(x, y)| x.conj() * y).sum();
        assert!(dot.norm() < 1e-8);
    }
}
