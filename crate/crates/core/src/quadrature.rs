//! Gauss rules on the interval, the reference square and triangles.

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Roots are found by Newton iteration on the Legendre recurrence, so any
/// order is available in any precision.
pub fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    assert!(n >= 1, "quadrature order must be positive");
    let mut rule = vec![(T::zero(), T::zero()); n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    for i in 0..m {
        // Work in f64 for the root search, then refine once in T.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_f64(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_f64(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = (T::lit(-x), T::lit(w));
        rule[n - 1 - i] = (T::lit(x), T::lit(w));
    }
    rule
}

fn legendre_f64(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product Gauss rule on the reference square, as `(xi, eta, weight)`.
pub fn gauss_square<T: Real>(n: usize) -> Vec<(T, T, T)> {
    let line = gauss_legendre::<T>(n);
    let mut pts = Vec::with_capacity(n * n);
    for &(eta, we) in &line {
        for &(xi, wx) in &line {
            pts.push((xi, eta, wx * we));
        }
    }
    pts
}

/// Triangle rules in barycentric form: `([l1, l2, l3], weight / area)`.
pub fn triangle_rule<T: Real>(points: usize) -> Vec<([T; 3], T)> {
    match points {
        3 => {
            let a = T::lit(2.0 / 3.0);
            let b = T::lit(1.0 / 6.0);
            let w = T::lit(1.0 / 3.0);
            vec![([a, b, b], w), ([b, a, b], w), ([b, b, a], w)]
        }
        7 => {
            let c = T::lit(1.0 / 3.0);
            let a1 = T::lit(0.059_715_871_789_769_8);
            let b1 = T::lit(0.470_142_064_105_115_1);
            let w1 = T::lit(0.132_394_152_788_506_2);
            let a2 = T::lit(0.797_426_985_353_087_3);
            let b2 = T::lit(0.101_286_507_323_456_3);
            let w2 = T::lit(0.125_939_180_544_827_1);
            vec![
                ([c, c, c], T::lit(0.225)),
                ([a1, b1, b1], w1),
                ([b1, a1, b1], w1),
                ([b1, b1, a1], w1),
                ([a2, b2, b2], w2),
                ([b2, a2, b2], w2),
                ([b2, b2, a2], w2),
            ]
        }
        _ => panic!("unsupported triangle rule with {points} points"),
    }
}
