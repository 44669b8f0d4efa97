//! Aerodynamic pressure sweep, coalescence detection and refinement.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{complex_eigs, ReducedPencil};
use crate::error::{FlutterError, Result};
use crate::fem::ScaleMetadata;
use crate::linalg::unsymmetric::EigenPair;
use crate::material::FgmPlate;
use crate::scalar::Real;

/// Number of sweep steps evaluated concurrently before checking for onset.
const SWEEP_CHUNK: usize = 16;

/// Sweep range and detection tolerances, in the units of the pencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig<T> {
    pub lambda_start: T,
    pub lambda_step: T,
    pub lambda_max: T,
    /// Onset when `|Im s| > imag_tolerance * |s|` for some eigenvalue `s`.
    pub imag_tolerance: T,
    /// Bisection stops at relative bracket width `refine_tolerance`.
    pub refine_tolerance: T,
}

impl<T: Real> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            lambda_start: T::zero(),
            lambda_step: T::lit(5.0),
            lambda_max: T::lit(1200.0),
            imag_tolerance: T::lit(1e-6),
            refine_tolerance: T::lit(1e-4),
        }
    }
}

impl<T: Real> SweepConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: T| v > T::zero() && v < T::one();
        if !(self.lambda_step > T::zero()) {
            return Err(FlutterError::config("solver.sweep.lambda_step", "must be positive"));
        }
        if !(self.lambda_start >= T::zero()) || !self.lambda_start.is_finite() {
            return Err(FlutterError::config("solver.sweep.lambda_start", "must be finite and non-negative"));
        }
        if !(self.lambda_max >= self.lambda_start) || !self.lambda_max.is_finite() {
            return Err(FlutterError::config("solver.sweep.lambda_max", "must be finite and not below lambda_start"));
        }
        if !unit(self.imag_tolerance) {
            return Err(FlutterError::config("solver.sweep.imag_tolerance", "must lie in (0, 1)"));
        }
        if !unit(self.refine_tolerance) {
            return Err(FlutterError::config("solver.sweep.refine_tolerance", "must lie in (0, 1)"));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<T> {
        let mut out = Vec::new();
        let mut i = 0usize;
        loop {
            let l = self.lambda_start + self.lambda_step * T::from_usize_lossy(i);
            if l > self.lambda_max * (T::one() + T::epsilon() * T::lit(16.0)) {
                break;
            }
            out.push(l);
            i += 1;
        }
        out
    }
}

fn is_complex<T: Real>(s: Complex<T>, tol: T) -> bool {
    s.im.abs() > tol * s.norm()
}

/// Whether any eigenvalue of the pencil at `lambda` has left the real axis.
pub fn has_coalesced<T: Real>(pencil: &ReducedPencil<T>, lambda: T, imag_tolerance: T) -> Result<bool> {
    Ok(complex_eigs(pencil, lambda)?.iter().any(|p| is_complex(p.value, imag_tolerance)))
}

/// One point of a tracked eigenvalue branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint<T> {
    pub lambda: T,
    pub branch: usize,
    pub value: Complex<T>,
}

/// Outcome of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub trace: Vec<TracePoint<T>>,
    /// First `[lambda_i, lambda_{i+1}]` containing the onset, if any.
    pub bracket: Option<(T, T)>,
    /// Branch ids that are complex at the upper end of the bracket.
    pub coalescing_branches: Option<(usize, usize)>,
    pub steps: usize,
}

impl<T: Real> SweepResult<T> {
    /// Trace as CSV with columns `lambda_nd,branch_id,re_omega2_nd,im_omega2_nd`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("lambda_nd,branch_id,re_omega2_nd,im_omega2_nd\n");
        for p in &self.trace {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                p.lambda.to_f64_lossy(),
                p.branch,
                p.value.re.to_f64_lossy(),
                p.value.im.to_f64_lossy()
            );
        }
        s
    }
}

fn mac<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    let mut s = Complex::new(T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        s += x.conj() * *y;
    }
    s.norm()
}

/// Assigns the eigenpairs of `next` to the branches of `prev` by greedy
/// maximal modal assurance. Returns `order` with `next[order[b]]` on branch `b`.
pub fn track_modes<T: Real>(prev: &[EigenPair<T>], next: &[EigenPair<T>]) -> Vec<usize> {
    let n = prev.len();
    let mut scores = Vec::with_capacity(n * n);
    for (b, p) in prev.iter().enumerate() {
        for (j, q) in next.iter().enumerate() {
            scores.push((mac(&p.vector, &q.vector), b, j));
        }
    }
    // Stable sort keeps ties in (branch, index) order.
    scores.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut order = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (_, b, j) in scores {
        if order[b] == usize::MAX && !taken[j] {
            order[b] = j;
            taken[j] = true;
        }
    }
    order
}

/// Steps the pressure parameter from `lambda_start` and stops at the first
/// step showing a complex eigenvalue.
pub fn sweep<T: Real>(pencil: &ReducedPencil<T>, cfg: &SweepConfig<T>) -> Result<SweepResult<T>> {
    cfg.validate()?;
    let grid = cfg.grid();
    let mut trace = Vec::new();
    let mut prev: Option<(T, Vec<EigenPair<T>>)> = None;
    let mut steps = 0;
    for chunk in grid.chunks(SWEEP_CHUNK) {
        let solved: Vec<Result<Vec<EigenPair<T>>>> = chunk.par_iter().map(|l| complex_eigs(pencil, *l)).collect();
        for (lambda, pairs) in chunk.iter().zip(solved) {
            let pairs = pairs?;
            steps += 1;
            let ordered: Vec<EigenPair<T>> = match &prev {
                None => pairs,
                Some((_, p)) => track_modes(p, &pairs).into_iter().map(|j| pairs[j].clone()).collect(),
            };
            for (b, pair) in ordered.iter().enumerate() {
                trace.push(TracePoint {
                    lambda: *lambda,
                    branch: b,
                    value: pair.value,
                });
            }
            let complex: Vec<usize> = (0..ordered.len()).filter(|&b| is_complex(ordered[b].value, cfg.imag_tolerance)).collect();
            if !complex.is_empty() {
                let Some((lo, _)) = prev else {
                    return Err(FlutterError::Bracket(format!(
                        "eigenvalues are already complex at the first sweep value {lambda}"
                    )));
                };
                let pair = partner(&ordered, &complex);
                return Ok(SweepResult {
                    trace,
                    bracket: Some((lo, *lambda)),
                    coalescing_branches: Some(pair),
                    steps,
                });
            }
            prev = Some((*lambda, ordered));
        }
    }
    Ok(SweepResult {
        trace,
        bracket: None,
        coalescing_branches: None,
        steps,
    })
}

/// The two complex branches forming a conjugate pair, lowest real part first.
fn partner<T: Real>(values: &[EigenPair<T>], complex: &[usize]) -> (usize, usize) {
    let first = *complex
        .iter()
        .min_by(|a, b| values[**a].value.re.partial_cmp(&values[**b].value.re).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty");
    let target = values[first].value.conj();
    let second = complex
        .iter()
        .copied()
        .filter(|&b| b != first)
        .min_by(|a, b| {
            let da = (values[*a].value - target).norm();
            let db = (values[*b].value - target).norm();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(first);
    (first.min(second), first.max(second))
}

/// Refined onset of coalescence, in the units of the pencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Onset<T> {
    pub lambda: T,
    /// Mean real part of the merging pair at `lambda`.
    pub omega2: T,
    /// Positions of the merging pair in the ascending spectrum just below onset.
    pub mode_pair: (usize, usize),
    pub bracket: (T, T),
}

/// Bisects `bracket` down to the relative width `cfg.refine_tolerance`.
pub fn refine<T: Real>(pencil: &ReducedPencil<T>, bracket: (T, T), cfg: &SweepConfig<T>) -> Result<Onset<T>> {
    cfg.validate()?;
    let (mut lo, mut hi) = bracket;
    if !(lo <= hi) {
        return Err(FlutterError::Bracket(format!("empty bracket [{lo}, {hi}]")));
    }
    let onset = |l: T| has_coalesced(pencil, l, cfg.imag_tolerance);
    if hi - lo > cfg.refine_tolerance * hi.abs() {
        if onset(lo)? {
            return Err(FlutterError::Bracket(format!("already coalesced at the lower end {lo}")));
        }
        if !onset(hi)? {
            return Err(FlutterError::Bracket(format!("no coalescence at the upper end {hi}")));
        }
    }
    while hi - lo > cfg.refine_tolerance * hi.abs() {
        let mid = (lo + hi) * T::half();
        if onset(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = (lo + hi) * T::half();
    // The merging pair is the conjugate pair at `hi`; at `lambda` it is the
    // two eigenvalues nearest to that pair's real part.
    let upper = complex_eigs(pencil, hi)?;
    let at_hi: Vec<usize> = (0..upper.len()).filter(|&i| is_complex(upper[i].value, cfg.imag_tolerance)).collect();
    let centre = match at_hi.first() {
        Some(&i) => upper[i].value.re,
        None => {
            // Degenerate bracket passed in: fall back to the closest pair.
            let ev = complex_eigs(pencil, lambda)?;
            closest_pair(&ev).map(|(a, b)| (ev[a].value.re + ev[b].value.re) * T::half()).unwrap_or(ev[0].value.re)
        }
    };
    let at = complex_eigs(pencil, lambda)?;
    let mut idx: Vec<usize> = (0..at.len()).collect();
    idx.sort_by(|a, b| {
        let da = (at[*a].value.re - centre).abs();
        let db = (at[*b].value.re - centre).abs();
        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b))
    });
    let (i, j) = if idx.len() >= 2 { (idx[0].min(idx[1]), idx[0].max(idx[1])) } else { (0, 0) };
    let omega2 = (at[i].value.re + at[j].value.re) * T::half();
    Ok(Onset {
        lambda,
        omega2,
        mode_pair: (i, j),
        bracket: (lo, hi),
    })
}

fn closest_pair<T: Real>(ev: &[EigenPair<T>]) -> Option<(usize, usize)> {
    (1..ev.len())
        .map(|i| (i - 1, i))
        .min_by(|a, b| {
            let da = (ev[a.1].value.re - ev[a.0].value.re).abs();
            let db = (ev[b.1].value.re - ev[b.0].value.re).abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
}

/// Critical point in dimensional and nondimensional form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlutterPoint<T> {
    /// Critical aerodynamic pressure parameter (Pa/m).
    pub lambda_cr: T,
    /// Coalescence frequency (rad/s).
    pub omega_cr: T,
    pub mode_pair: (usize, usize),
    /// `lambda_cr a^3 / D_c`.
    pub lambda_cr_nd: T,
    /// `omega_cr a^2 sqrt(rho_c h / D_c)`.
    pub omega_cr_nd: T,
    /// Square of `omega_cr_nd`.
    pub omega2_cr_nd: T,
}

impl<T: Real> FlutterPoint<T> {
    /// From an onset found on the nondimensional pencil.
    pub fn from_nondimensional(onset: &Onset<T>, scale: &ScaleMetadata<T>) -> Self {
        let omega2_nd = onset.omega2.max(T::zero());
        let omega_nd = omega2_nd.sqrt();
        Self {
            lambda_cr: onset.lambda / scale.lambda_factor(),
            omega_cr: (omega2_nd / scale.omega2_factor()).sqrt(),
            mode_pair: onset.mode_pair,
            lambda_cr_nd: onset.lambda,
            omega_cr_nd: omega_nd,
            omega2_cr_nd: omega2_nd,
        }
    }

    /// From an onset found on the dimensional pencil.
    pub fn from_dimensional(onset: &Onset<T>, scale: &ScaleMetadata<T>) -> Self {
        let omega = onset.omega2.max(T::zero()).sqrt();
        let (lambda_nd, omega_nd, omega2_nd) = nondimensionalize_with(onset.lambda, omega, scale);
        Self {
            lambda_cr: onset.lambda,
            omega_cr: omega,
            mode_pair: onset.mode_pair,
            lambda_cr_nd: lambda_nd,
            omega_cr_nd: omega_nd,
            omega2_cr_nd: omega2_nd,
        }
    }
}

/// `(lambda a^3 / D_c, omega a^2 sqrt(rho_c h / D_c), Omega^2)`.
pub fn nondimensionalize_with<T: Real>(lambda: T, omega: T, scale: &ScaleMetadata<T>) -> (T, T, T) {
    let omega2 = omega * omega * scale.omega2_factor();
    (lambda * scale.lambda_factor(), omega2.sqrt(), omega2)
}

/// Nondimensional pressure, frequency and squared frequency for `plate`,
/// normalized by the ceramic phase.
pub fn nondimensionalize<T: Real>(lambda: T, omega: T, plate: &FgmPlate<T>) -> Result<(T, T, T)> {
    Ok(nondimensionalize_with(lambda, omega, &ScaleMetadata::from_plate(plate)?))
}
