//! Bilinear quadrilateral geometry: shape functions, Jacobians and the
//! inverse isoparametric map.

use crate::error::{FlutterError, Result};
use crate::scalar::Real;

/// Natural coordinates of the four element nodes, counterclockwise.
pub const NODE_NATURAL: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

#[inline]
pub fn shape<T: Real>(xi: T, eta: T) -> [T; 4] {
    let q = T::lit(0.25);
    let one = T::one();
    [
        q * (one - xi) * (one - eta),
        q * (one + xi) * (one - eta),
        q * (one + xi) * (one + eta),
        q * (one - xi) * (one + eta),
    ]
}

/// Natural derivatives `[dN/dxi, dN/deta]`.
#[inline]
pub fn shape_natural_derivatives<T: Real>(xi: T, eta: T) -> [[T; 4]; 2] {
    let q = T::lit(0.25);
    let one = T::one();
    [
        [-q * (one - eta), q * (one - eta), q * (one + eta), -q * (one + eta)],
        [-q * (one - xi), -q * (one + xi), q * (one + xi), q * (one - xi)],
    ]
}

/// `J[r][c] = d(x_c)/d(natural_r)`.
#[inline]
pub fn jacobian<T: Real>(coords: &[[T; 2]; 4], xi: T, eta: T) -> [[T; 2]; 2] {
    let dn = shape_natural_derivatives(xi, eta);
    let mut j = [[T::zero(); 2]; 2];
    for r in 0..2 {
        for (i, p) in coords.iter().enumerate() {
            j[r][0] += dn[r][i] * p[0];
            j[r][1] += dn[r][i] * p[1];
        }
    }
    j
}

#[inline]
pub fn det2<T: Real>(m: &[[T; 2]; 2]) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[inline]
pub fn inv2<T: Real>(m: &[[T; 2]; 2]) -> Option<[[T; 2]; 2]> {
    let d = det2(m);
    if d == T::zero() || !d.is_finite() {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

pub fn to_physical<T: Real>(coords: &[[T; 2]; 4], xi: T, eta: T) -> [T; 2] {
    let n = shape(xi, eta);
    let mut p = [T::zero(); 2];
    for i in 0..4 {
        p[0] += n[i] * coords[i][0];
        p[1] += n[i] * coords[i][1];
    }
    p
}

/// Cartesian shape derivatives and `det J` at a natural point.
pub fn cartesian_derivatives<T: Real>(coords: &[[T; 2]; 4], xi: T, eta: T, element: usize) -> Result<([[T; 4]; 2], T)> {
    let j = jacobian(coords, xi, eta);
    let det = det2(&j);
    if !(det > T::zero()) {
        return Err(FlutterError::ElementGeometry {
            element,
            reason: format!("non-positive Jacobian determinant {det}"),
        });
    }
    let inv = inv2(&j).expect("positive determinant");
    let dn = shape_natural_derivatives(xi, eta);
    let mut d = [[T::zero(); 4]; 2];
    for i in 0..4 {
        d[0][i] = inv[0][0] * dn[0][i] + inv[0][1] * dn[1][i];
        d[1][i] = inv[1][0] * dn[0][i] + inv[1][1] * dn[1][i];
    }
    Ok((d, det))
}

/// Natural coordinates of a physical point by Newton iteration.
pub fn to_natural<T: Real>(coords: &[[T; 2]; 4], p: [T; 2]) -> Result<[T; 2]> {
    let mut xi = T::zero();
    let mut eta = T::zero();
    // Rounding in `to_physical` scales with the absolute coordinates, not the element size.
    let magnitude = coords.iter().fold(p[0].abs() + p[1].abs(), |m, c| m.max(c[0].abs() + c[1].abs()));
    let tol = T::epsilon() * T::lit(16.0) * (polygon_area(coords).abs().sqrt() + magnitude);
    for _ in 0..50 {
        let q = to_physical(coords, xi, eta);
        let r = [p[0] - q[0], p[1] - q[1]];
        if (r[0].abs() + r[1].abs()) <= tol {
            return Ok([xi, eta]);
        }
        let j = jacobian(coords, xi, eta);
        let inv = inv2(&j).ok_or_else(|| FlutterError::Geometry("singular Jacobian in inverse map".into()))?;
        // dx = J^T d(natural)
        let dxi = inv[0][0] * r[0] + inv[1][0] * r[1];
        let deta = inv[0][1] * r[0] + inv[1][1] * r[1];
        xi += dxi;
        eta += deta;
        if dxi.abs() + deta.abs() <= T::epsilon() * T::lit(16.0) {
            return Ok([xi, eta]);
        }
    }
    Err(FlutterError::Geometry("inverse isoparametric map did not converge".into()))
}

/// Signed shoelace area of a polygon (positive when counterclockwise).
pub fn polygon_area<T: Real>(poly: &[[T; 2]]) -> T {
    let n = poly.len();
    let mut s = T::zero();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    s * T::half()
}
