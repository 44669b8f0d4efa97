//! Mesh-independent through crack: level sets, element classification,
//! enrichment functions, enriched DOF numbering and cut-element quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{FlutterError, Result};
use crate::mesh::{DofMap, Mesh, FIELDS};
use crate::quadrature::{gauss_square, triangle_rule};
use crate::scalar::Real;
use crate::shape::{det2, jacobian, polygon_area, to_natural};

/// Branch functions per tip-enriched node.
pub const BRANCH_FUNCTIONS: usize = 4;

/// Node-to-crack distance (relative to element size) treated as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;
/// Offset (relative to element size) applied to a degenerate crack.
pub const PERTURBATION: f64 = 1e-6;
/// Distance, relative to the element size, within which an element counts
/// as touching a crack tip for enrichment.
pub const TIP_CONTACT: f64 = 1e-4;
/// Heaviside enrichment is skipped when the smaller side of a nodal support
/// holds less than this fraction of its area.
pub const MIN_SUPPORT_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrackKind {
    /// Both tips inside the plate.
    Center,
    /// One tip inside, the crack mouth on (or beyond) the plate boundary.
    Edge,
}

/// Straight through crack described by its center, length and orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrackGeometry<T> {
    pub cx: T,
    pub cy: T,
    /// Crack length (m).
    pub d: T,
    /// Orientation from the +x axis (rad).
    pub theta: T,
    pub kind: CrackKind,
}

impl<T: Real> CrackGeometry<T> {
    pub fn new(cx: T, cy: T, d: T, theta: T, kind: CrackKind) -> Self {
        Self { cx, cy, d, theta, kind }
    }

    pub fn tangent(&self) -> [T; 2] {
        [self.theta.cos(), self.theta.sin()]
    }

    pub fn normal(&self) -> [T; 2] {
        [-self.theta.sin(), self.theta.cos()]
    }

    pub fn tips(&self) -> [[T; 2]; 2] {
        let t = self.tangent();
        let hd = self.d * T::half();
        [
            [self.cx - hd * t[0], self.cy - hd * t[1]],
            [self.cx + hd * t[0], self.cy + hd * t[1]],
        ]
    }

    /// Checks tip placement against the plate `[0, a] x [0, b]`.
    pub fn validate(&self, a: T, b: T) -> Result<()> {
        if !(self.d > T::zero() && self.d.is_finite()) {
            return Err(FlutterError::DegenerateCrack("crack length must be positive".into()));
        }
        let inside = |p: [T; 2]| p[0] > T::zero() && p[0] < a && p[1] > T::zero() && p[1] < b;
        let n_inside = self.tips().iter().filter(|p| inside(**p)).count();
        match (self.kind, n_inside) {
            (CrackKind::Center, 2) | (CrackKind::Edge, 1) => Ok(()),
            (CrackKind::Center, n) => Err(FlutterError::DegenerateCrack(format!(
                "center crack needs both tips strictly inside the plate, {n} are"
            ))),
            (CrackKind::Edge, n) => Err(FlutterError::DegenerateCrack(format!(
                "edge crack needs exactly one tip inside the plate, {n} are"
            ))),
        }
    }
}

/// Signed normal distance and signed tangential distance beyond the nearer tip.
pub fn level_sets<T: Real>(crack: &CrackGeometry<T>, p: [T; 2]) -> (T, T) {
    let t = crack.tangent();
    let n = crack.normal();
    let rel = [p[0] - crack.cx, p[1] - crack.cy];
    let phi = rel[0] * n[0] + rel[1] * n[1];
    let s = rel[0] * t[0] + rel[1] * t[1];
    (phi, s.abs() - crack.d * T::half())
}

#[inline]
pub fn heaviside<T: Real>(phi: T) -> T {
    if phi >= T::zero() {
        T::one()
    } else {
        -T::one()
    }
}

/// The four asymptotic branch functions in crack-tip polar coordinates.
pub fn tip_branch<T: Real>(r: T, theta: T) -> [T; BRANCH_FUNCTIONS] {
    if r <= T::zero() {
        return [T::zero(); BRANCH_FUNCTIONS];
    }
    let sr = r.sqrt();
    let (s2, c2) = (theta * T::half()).sin_cos();
    let st = theta.sin();
    [sr * s2, sr * c2, sr * s2 * st, sr * c2 * st]
}

/// Branch functions and their derivatives with respect to `(r, theta)`.
fn tip_branch_polar_derivatives<T: Real>(r: T, theta: T) -> ([T; 4], [T; 4], [T; 4]) {
    let sr = r.sqrt();
    let (s2, c2) = (theta * T::half()).sin_cos();
    let (st, ct) = theta.sin_cos();
    let h = T::half();
    let f = [sr * s2, sr * c2, sr * s2 * st, sr * c2 * st];
    let inv = h / sr;
    let dr = [inv * s2, inv * c2, inv * s2 * st, inv * c2 * st];
    let dt = [
        sr * h * c2,
        -sr * h * s2,
        sr * (h * c2 * st + s2 * ct),
        sr * (-h * s2 * st + c2 * ct),
    ];
    (f, dr, dt)
}

/// Working crack segment after edge extension and degeneracy perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrackSegment<T> {
    pub start: [T; 2],
    pub end: [T; 2],
    /// Whether each end is a genuine crack tip inside the plate.
    pub is_tip: [bool; 2],
}

impl<T: Real> CrackSegment<T> {
    pub fn direction(&self) -> [T; 2] {
        let d = [self.end[0] - self.start[0], self.end[1] - self.start[1]];
        let l = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [d[0] / l, d[1] / l]
    }

    pub fn normal(&self) -> [T; 2] {
        let t = self.direction();
        [-t[1], t[0]]
    }

    /// Signed distance to the crack line.
    pub fn phi(&self, p: [T; 2]) -> T {
        let n = self.normal();
        (p[0] - self.start[0]) * n[0] + (p[1] - self.start[1]) * n[1]
    }

    pub fn distance_to_point(&self, p: [T; 2]) -> T {
        let d = [self.end[0] - self.start[0], self.end[1] - self.start[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        let t = (((p[0] - self.start[0]) * d[0] + (p[1] - self.start[1]) * d[1]) / l2)
            .max(T::zero())
            .min(T::one());
        let q = [self.start[0] + t * d[0], self.start[1] + t * d[1]];
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    /// End `i` of the working segment.
    pub fn tip_point(&self, i: usize) -> [T; 2] {
        if i == 0 {
            self.start
        } else {
            self.end
        }
    }

    /// Crack-extension direction at tip `i` (pointing out of the crack).
    fn tip_direction(&self, i: usize) -> [T; 2] {
        let t = self.direction();
        if i == 0 {
            [-t[0], -t[1]]
        } else {
            t
        }
    }

    /// Tip-local polar coordinates of `p` for tip `i`.
    pub fn tip_polar(&self, i: usize, p: [T; 2]) -> (T, T) {
        let tip = self.tip_point(i);
        let e1 = self.tip_direction(i);
        let e2 = [-e1[1], e1[0]];
        let rel = [p[0] - tip[0], p[1] - tip[1]];
        let x = rel[0] * e1[0] + rel[1] * e1[1];
        let y = rel[0] * e2[0] + rel[1] * e2[1];
        ((x * x + y * y).sqrt(), y.atan2(x))
    }

    /// Branch functions at `p` for tip `i` and their Cartesian gradients.
    pub fn branch_with_gradient(&self, i: usize, p: [T; 2]) -> ([T; 4], [[T; 2]; 4]) {
        let (r, th) = self.tip_polar(i, p);
        if r <= T::zero() {
            return ([T::zero(); 4], [[T::zero(); 2]; 4]);
        }
        let (f, dr, dt) = tip_branch_polar_derivatives(r, th);
        let (st, ct) = th.sin_cos();
        let e1 = self.tip_direction(i);
        let mut g = [[T::zero(); 2]; 4];
        for k in 0..4 {
            let dxl = ct * dr[k] - st / r * dt[k];
            let dyl = st * dr[k] + ct / r * dt[k];
            // Rotate the local gradient back to global axes.
            g[k] = [e1[0] * dxl - e1[1] * dyl, e1[1] * dxl + e1[0] * dyl];
        }
        (f, g)
    }
}

/// How the crack intersects one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutKind<T> {
    Standard,
    /// Crossed completely; the chord runs between two boundary points.
    Split { entry: [T; 2], exit: [T; 2] },
    /// Contains tip `tip`; the crack leaves the element at `entry`.
    Tip { entry: [T; 2], tip_point: [T; 2], tip: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCut<T> {
    pub element: usize,
    pub kind: CutKind<T>,
}

impl<T> ElementCut<T> {
    pub fn is_cut(&self) -> bool {
        !matches!(self.kind, CutKind::Standard)
    }
}

/// A crack placed on a particular mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CrackModel<T> {
    pub geometry: CrackGeometry<T>,
    pub segment: CrackSegment<T>,
    pub cuts: Vec<ElementCut<T>>,
    /// Total perturbation applied to remove degeneracies (m).
    pub perturbation: [T; 2],
    /// Tip touched by each element's closed area, if any.
    pub tip_contact: Vec<Option<usize>>,
}

impl<T: Real> CrackModel<T> {
    pub fn new(mesh: &Mesh<T>, geometry: CrackGeometry<T>) -> Result<Self> {
        let (segment, perturbation) = working_segment(mesh, &geometry)?;
        let cuts = classify_segment(mesh, &segment)?;
        let tip_contact = tip_contact(mesh, &segment, &cuts);
        Ok(Self {
            geometry,
            segment,
            cuts,
            perturbation,
            tip_contact,
        })
    }

    pub fn cut(&self, element: usize) -> &ElementCut<T> {
        &self.cuts[element]
    }

    pub fn split_count(&self) -> usize {
        self.cuts.iter().filter(|c| matches!(c.kind, CutKind::Split { .. })).count()
    }

    pub fn tip_count(&self) -> usize {
        self.cuts.iter().filter(|c| matches!(c.kind, CutKind::Tip { .. })).count()
    }
}

/// Classifies every element of `mesh` against `crack`.
pub fn classify_elements<T: Real>(mesh: &Mesh<T>, crack: &CrackGeometry<T>) -> Result<Vec<ElementCut<T>>> {
    Ok(CrackModel::new(mesh, *crack)?.cuts)
}

fn working_segment<T: Real>(mesh: &Mesh<T>, crack: &CrackGeometry<T>) -> Result<(CrackSegment<T>, [T; 2])> {
    let he = mesh.element_size();
    if !(crack.d > T::lit(DEGENERACY_TOLERANCE) * he) {
        return Err(FlutterError::DegenerateCrack(format!(
            "crack length {} below the geometric tolerance of the mesh",
            crack.d
        )));
    }
    let (xmin, xmax, ymin, ymax) = mesh.bounds();
    let inside = |p: [T; 2]| p[0] > xmin && p[0] < xmax && p[1] > ymin && p[1] < ymax;
    let tips = crack.tips();
    let t = crack.tangent();
    let reach = (xmax - xmin).max(ymax - ymin) * T::two();
    let mut seg = CrackSegment {
        start: tips[0],
        end: tips[1],
        is_tip: [true, true],
    };
    // Only an edge crack has a mouth; a centre crack keeps both tips even
    // when it lies outside the plate, in which case it cuts nothing.
    if crack.kind == CrackKind::Edge {
        seg.is_tip = [inside(tips[0]), inside(tips[1])];
        if seg.is_tip == [false, false] || seg.is_tip == [true, true] {
            return Err(FlutterError::DegenerateCrack("an edge crack needs exactly one tip inside the plate".into()));
        }
    }
    // Crack mouths are pushed well outside the plate.
    if !seg.is_tip[0] {
        seg.start = [seg.start[0] - reach * t[0], seg.start[1] - reach * t[1]];
    }
    if !seg.is_tip[1] {
        seg.end = [seg.end[0] + reach * t[0], seg.end[1] + reach * t[1]];
    }

    let tol = T::lit(DEGENERACY_TOLERANCE) * he;
    let step = T::lit(PERTURBATION) * he;
    let mut shift = [T::zero(); 2];
    for _ in 0..8 {
        let mut changed = false;
        if mesh.nodes.iter().any(|p| seg.distance_to_point(*p) <= tol) {
            let n = seg.normal();
            for p in [&mut seg.start, &mut seg.end] {
                p[0] += step * n[0];
                p[1] += step * n[1];
            }
            shift[0] += step * n[0];
            shift[1] += step * n[1];
            changed = true;
        }
        for i in 0..2 {
            if !seg.is_tip[i] {
                continue;
            }
            let tip = seg.tip_point(i);
            if tip_near_element_edge(mesh, tip, tol) {
                let dir = seg.tip_direction(i);
                let p = if i == 0 { &mut seg.start } else { &mut seg.end };
                p[0] += step * dir[0];
                p[1] += step * dir[1];
                changed = true;
            }
        }
        if !changed {
            return Ok((seg, shift));
        }
    }
    Err(FlutterError::Geometry("could not perturb the crack off mesh degeneracies".into()))
}

fn tip_near_element_edge<T: Real>(mesh: &Mesh<T>, tip: [T; 2], tol: T) -> bool {
    mesh.elements.iter().any(|conn| {
        (0..4).any(|k| {
            let a = mesh.nodes[conn[k]];
            let b = mesh.nodes[conn[(k + 1) % 4]];
            let edge = CrackSegment {
                start: a,
                end: b,
                is_tip: [false; 2],
            };
            edge.distance_to_point(tip) <= tol
        })
    })
}

fn strictly_inside<T: Real>(poly: &[[T; 2]; 4], p: [T; 2]) -> bool {
    (0..4).all(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % 4];
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) > T::zero()
    })
}

/// Parametric range of the segment `a -> b` inside a convex CCW polygon.
fn clip_segment<T: Real>(poly: &[[T; 2]; 4], a: [T; 2], b: [T; 2]) -> Option<(T, T)> {
    let mut t0 = T::zero();
    let mut t1 = T::one();
    let d = [b[0] - a[0], b[1] - a[1]];
    for k in 0..4 {
        let p = poly[k];
        let q = poly[(k + 1) % 4];
        // Outward normal of a CCW edge.
        let n = [q[1] - p[1], p[0] - q[0]];
        let num = n[0] * (a[0] - p[0]) + n[1] * (a[1] - p[1]);
        let den = n[0] * d[0] + n[1] * d[1];
        if den == T::zero() {
            if num > T::zero() {
                return None;
            }
        } else {
            let t = -num / den;
            if den < T::zero() {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 < t1).then_some((t0, t1))
}

fn lerp<T: Real>(a: [T; 2], b: [T; 2], t: T) -> [T; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn classify_segment<T: Real>(mesh: &Mesh<T>, seg: &CrackSegment<T>) -> Result<Vec<ElementCut<T>>> {
    let mut cuts = Vec::with_capacity(mesh.element_count());
    for e in 0..mesh.element_count() {
        let poly = mesh.element_coords(e);
        let tips_inside: Vec<usize> = (0..2)
            .filter(|&i| seg.is_tip[i] && strictly_inside(&poly, seg.tip_point(i)))
            .collect();
        let kind = match tips_inside.as_slice() {
            [_, _] => {
                return Err(FlutterError::DegenerateCrack(format!(
                    "both crack tips lie inside element {e}; refine the mesh"
                )))
            }
            [i] => {
                let i = *i;
                let (t0, t1) = clip_segment(&poly, seg.start, seg.end)
                    .ok_or_else(|| FlutterError::Geometry(format!("tip element {e} does not clip the crack")))?;
                let entry = if i == 0 { lerp(seg.start, seg.end, t1) } else { lerp(seg.start, seg.end, t0) };
                CutKind::Tip {
                    entry,
                    tip_point: seg.tip_point(i),
                    tip: i,
                }
            }
            _ => match clip_segment(&poly, seg.start, seg.end) {
                Some((t0, t1)) if t0 > T::zero() && t1 < T::one() => CutKind::Split {
                    entry: lerp(seg.start, seg.end, t0),
                    exit: lerp(seg.start, seg.end, t1),
                },
                _ => CutKind::Standard,
            },
        };
        cuts.push(ElementCut { element: e, kind });
    }
    Ok(cuts)
}

/// Standard DOF map extended with Heaviside and branch-function blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct EnrichedDofMap {
    pub base: DofMap,
    /// First global DOF of the 5-field Heaviside block of each node.
    pub heaviside: Vec<Option<usize>>,
    /// First global DOF of the `4 x 5` branch block of each node, and the tip it refers to.
    pub tip: Vec<Option<(usize, usize)>>,
    /// Constraint flag per global DOF (standard then enriched).
    pub constrained: Vec<bool>,
}

impl EnrichedDofMap {
    pub fn standard(base: DofMap) -> Self {
        let n = base.node_count;
        Self {
            constrained: base.constrained.clone(),
            base,
            heaviside: vec![None; n],
            tip: vec![None; n],
        }
    }

    pub fn total(&self) -> usize {
        self.constrained.len()
    }

    pub fn enriched_count(&self) -> usize {
        self.total() - self.base.total()
    }

    pub fn free_count(&self) -> usize {
        self.constrained.iter().filter(|c| !**c).count()
    }

    /// Global to free-DOF index.
    pub fn free_index(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.constrained
            .iter()
            .map(|&c| {
                if c {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    }
}

/// Appends enrichment DOFs to `base` for the nodes touched by the crack.
pub fn build_enrichment_map<T: Real>(mesh: &Mesh<T>, crack: Option<&CrackModel<T>>, base: &DofMap) -> Result<EnrichedDofMap> {
    let mut map = EnrichedDofMap::standard(base.clone());
    let Some(crack) = crack else {
        return Ok(map);
    };
    let adj = mesh.node_elements();
    let mut next = base.total();
    for node in 0..mesh.node_count() {
        let elems = &adj[node];
        let tip_of = elems.iter().find_map(|&e| crack.tip_contact[e]);
        if let Some(tip) = tip_of {
            map.tip[node] = Some((next, tip));
            for _ in 0..BRANCH_FUNCTIONS {
                for f in 0..FIELDS {
                    map.constrained.push(base.is_node_field_constrained(node, f));
                }
            }
            next += BRANCH_FUNCTIONS * FIELDS;
            continue;
        }
        let touches_split = elems.iter().any(|&e| matches!(crack.cuts[e].kind, CutKind::Split { .. }));
        if touches_split && support_is_well_split(mesh, crack, elems)? {
            map.heaviside[node] = Some(next);
            for f in 0..FIELDS {
                map.constrained.push(base.is_node_field_constrained(node, f));
            }
            next += FIELDS;
        }
    }
    Ok(map)
}

/// Tip touched by each element's closed area. A tip nudged off a shared
/// edge still touches the neighbour, which keeps the branch set symmetric.
fn tip_contact<T: Real>(mesh: &Mesh<T>, segment: &CrackSegment<T>, cuts: &[ElementCut<T>]) -> Vec<Option<usize>> {
    let tol = T::lit(TIP_CONTACT) * mesh.element_size();
    (0..mesh.element_count())
        .map(|e| {
            if let CutKind::Tip { tip, .. } = cuts[e].kind {
                return Some(tip);
            }
            let poly = mesh.element_coords(e);
            (0..2)
                .filter(|&i| segment.is_tip[i])
                .find(|&i| boundary_distance(&poly, segment.tip_point(i)).0 <= tol)
        })
        .collect()
}

/// Distance from `p` to the boundary of `poly` and the nearest boundary point.
fn boundary_distance<T: Real>(poly: &[[T; 2]; 4], p: [T; 2]) -> (T, [T; 2]) {
    let mut best = (T::infinity(), poly[0]);
    for k in 0..4 {
        let a = poly[k];
        let b = poly[(k + 1) % 4];
        let ab = [b[0] - a[0], b[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).max(T::zero()).min(T::one());
        let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
        let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        if d < best.0 {
            best = (d, q);
        }
    }
    best
}

fn support_is_well_split<T: Real>(mesh: &Mesh<T>, crack: &CrackModel<T>, elems: &[usize]) -> Result<bool> {
    let mut pos = T::zero();
    let mut neg = T::zero();
    for &e in elems {
        let poly = mesh.element_coords(e);
        match crack.cuts[e].kind {
            CutKind::Split { entry, exit } => {
                let (p, n) = split_polygon(&poly, &crack.segment, entry, exit);
                pos += polygon_area(&p);
                neg += polygon_area(&n);
            }
            _ => {
                let c = centroid(&poly);
                let area = polygon_area(&poly);
                if crack.segment.phi(c) >= T::zero() {
                    pos += area;
                } else {
                    neg += area;
                }
            }
        }
    }
    Ok(pos.min(neg) >= T::lit(MIN_SUPPORT_FRACTION) * (pos + neg))
}

fn centroid<T: Real>(poly: &[[T; 2]]) -> [T; 2] {
    let n = T::from_usize_lossy(poly.len());
    let mut c = [T::zero(); 2];
    for p in poly {
        c[0] += p[0];
        c[1] += p[1];
    }
    [c[0] / n, c[1] / n]
}

/// Splits a convex element by the crack chord into (phi >= 0, phi < 0) parts.
fn split_polygon<T: Real>(poly: &[[T; 2]; 4], seg: &CrackSegment<T>, entry: [T; 2], exit: [T; 2]) -> (Vec<[T; 2]>, Vec<[T; 2]>) {
    let mut pos = Vec::with_capacity(6);
    let mut neg = Vec::with_capacity(6);
    for k in 0..4 {
        let p = poly[k];
        let q = poly[(k + 1) % 4];
        let sp = seg.phi(p) >= T::zero();
        let sq = seg.phi(q) >= T::zero();
        if sp {
            pos.push(p);
        } else {
            neg.push(p);
        }
        if sp != sq {
            // Use whichever chord end lies on this edge.
            let x = closest_on_edge(p, q, entry, exit);
            pos.push(x);
            neg.push(x);
        }
    }
    (pos, neg)
}

fn closest_on_edge<T: Real>(p: [T; 2], q: [T; 2], a: [T; 2], b: [T; 2]) -> [T; 2] {
    let edge = CrackSegment {
        start: p,
        end: q,
        is_tip: [false; 2],
    };
    if edge.distance_to_point(a) <= edge.distance_to_point(b) {
        a
    } else {
        b
    }
}

/// Quadrature point on an element: natural coordinates, physical position
/// and a weight that already includes the area measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint<T> {
    pub xi: T,
    pub eta: T,
    pub x: [T; 2],
    pub weight: T,
}

/// Order of the Gauss rule used on uncut elements.
pub const STANDARD_GAUSS: usize = 2;
/// Triangle rule used on each sub-cell of a cut element.
pub const SUBCELL_POINTS: usize = 7;

/// Tensor Gauss rule of order `n` mapped onto an element.
pub fn element_gauss<T: Real>(coords: &[[T; 2]; 4], n: usize, element: usize) -> Result<Vec<QuadPoint<T>>> {
    gauss_square::<T>(n)
        .into_iter()
        .map(|(xi, eta, w)| {
            let det = det2(&jacobian(coords, xi, eta));
            if !(det > T::zero()) {
                return Err(FlutterError::ElementGeometry {
                    element,
                    reason: format!("non-positive Jacobian determinant {det}"),
                });
            }
            Ok(QuadPoint {
                xi,
                eta,
                x: crate::shape::to_physical(coords, xi, eta),
                weight: w * det,
            })
        })
        .collect()
}

/// Quadrature over an element that respects the crack.
///
/// Uncut elements get the ordinary 2 x 2 Gauss rule. Split elements are
/// divided along the chord into two convex parts, each fanned into triangles
/// about its vertex centroid; tip elements are fanned about the tip so the
/// crack is a fan edge. Every triangle carries the 7-point rule.
pub fn subcell_quadrature<T: Real>(
    coords: &[[T; 2]; 4],
    cut: &ElementCut<T>,
    segment: &CrackSegment<T>,
    levels: usize,
) -> Result<Vec<QuadPoint<T>>> {
    let triangles: Vec<[[T; 2]; 3]> = match cut.kind {
        CutKind::Standard => return element_gauss(coords, STANDARD_GAUSS, cut.element),
        CutKind::Split { entry, exit } => {
            let (pos, neg) = split_polygon(coords, segment, entry, exit);
            let mut tris = fan_about_centroid(&pos);
            tris.extend(fan_about_centroid(&neg));
            tris
        }
        CutKind::Tip { entry, tip_point, .. } => {
            let mut ring: Vec<[T; 2]> = Vec::with_capacity(5);
            for k in 0..4 {
                let p = coords[k];
                let q = coords[(k + 1) % 4];
                ring.push(p);
                let edge = CrackSegment {
                    start: p,
                    end: q,
                    is_tip: [false; 2],
                };
                let scale = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                if edge.distance_to_point(entry) <= scale * T::lit(1e-10) {
                    ring.push(entry);
                }
            }
            if ring.len() != 5 {
                return Err(FlutterError::Geometry(format!(
                    "crack mouth of tip element {} not found on its boundary",
                    cut.element
                )));
            }
            (0..ring.len())
                .map(|k| [tip_point, ring[k], ring[(k + 1) % ring.len()]])
                .collect()
        }
    };

    triangles_to_points(coords, &subdivide(triangles, levels), cut.element)
}

/// Quadrature for an uncut element touching a crack tip: triangles fanned
/// about the boundary point nearest the tip, mirroring the tip element.
pub fn tip_fan_quadrature<T: Real>(coords: &[[T; 2]; 4], element: usize, tip: [T; 2], levels: usize) -> Result<Vec<QuadPoint<T>>> {
    let (_, apex) = boundary_distance(coords, tip);
    let area = polygon_area(coords);
    let triangles: Vec<[[T; 2]; 3]> = (0..4)
        .map(|k| [apex, coords[k], coords[(k + 1) % 4]])
        .filter(|t| polygon_area(t) > T::lit(1e-12) * area)
        .collect();
    triangles_to_points(coords, &subdivide(triangles, levels), element)
}

/// Quadrature for an uncut element with branch-enriched nodes, built from
/// the same centroid fan as the parts of a split element.
pub fn centroid_fan_quadrature<T: Real>(coords: &[[T; 2]; 4], element: usize, levels: usize) -> Result<Vec<QuadPoint<T>>> {
    triangles_to_points(coords, &subdivide(fan_about_centroid(coords), levels), element)
}

/// Splits every triangle into four at its edge midpoints, `levels` times.
fn subdivide<T: Real>(mut triangles: Vec<[[T; 2]; 3]>, levels: usize) -> Vec<[[T; 2]; 3]> {
    let mid = |p: [T; 2], q: [T; 2]| [(p[0] + q[0]) * T::half(), (p[1] + q[1]) * T::half()];
    for _ in 0..levels {
        triangles = triangles
            .iter()
            .flat_map(|&[a, b, c]| {
                let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
                [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
            })
            .collect();
    }
    triangles
}

fn triangles_to_points<T: Real>(coords: &[[T; 2]; 4], triangles: &[[[T; 2]; 3]], element: usize) -> Result<Vec<QuadPoint<T>>> {
    let rule = triangle_rule::<T>(SUBCELL_POINTS);
    let mut points = Vec::with_capacity(triangles.len() * rule.len());
    for tri in triangles {
        let area = polygon_area(tri);
        if !(area > T::zero()) {
            return Err(FlutterError::Geometry(format!("degenerate sub-cell in element {element}")));
        }
        for (l, w) in &rule {
            let x = [
                l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0],
                l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1],
            ];
            let nat = to_natural(coords, x)?;
            points.push(QuadPoint {
                xi: nat[0],
                eta: nat[1],
                x,
                weight: *w * area,
            });
        }
    }
    let total: T = points.iter().map(|p| p.weight).sum();
    let area = polygon_area(coords);
    if (total - area).abs() > T::lit(1e-10) * area {
        return Err(FlutterError::Geometry(format!(
            "sub-cell weights of element {element} sum to {total}, element area {area}"
        )));
    }
    Ok(points)
}

fn fan_about_centroid<T: Real>(poly: &[[T; 2]]) -> Vec<[[T; 2]; 3]> {
    let c = centroid(poly);
    (0..poly.len())
        .map(|k| [c, poly[k], poly[(k + 1) % poly.len()]])
        .filter(|t| polygon_area(t) > T::zero())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{apply_boundary, generate_structured, BoundaryKind};
    use std::f64::consts::PI;

    #[test]
    fn level_set_examples() {
        let c = CrackGeometry::new(0.0f64, 0.0, 0.2, 0.0, CrackKind::Center);
        let (phi, psi) = level_sets(&c, [0.0, 0.1]);
        assert!((phi - 0.1).abs() < 1e-15 && psi < 0.0);
        let (phi, psi) = level_sets(&c, [0.3, 0.0]);
        assert!(phi.abs() < 1e-15 && psi > 0.0);
        let v = CrackGeometry::new(0.0, 0.0, 0.2, PI / 2.0, CrackKind::Center);
        let (phi, _) = level_sets(&v, [0.1, 0.0]);
        assert!((phi.abs() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn heaviside_convention() {
        assert_eq!(heaviside(0.2f64), 1.0);
        assert_eq!(heaviside(-1e-12f64), -1.0);
        assert_eq!(heaviside(0.0f64), 1.0);
    }

    #[test]
    fn branch_examples() {
        assert_eq!(tip_branch(0.0f64, 1.0), [0.0; 4]);
        let f = tip_branch(1.0f64, 0.0);
        assert!((f[0]).abs() < 1e-15 && (f[1] - 1.0).abs() < 1e-15 && f[2].abs() < 1e-15 && f[3].abs() < 1e-15);
        let f = tip_branch(1.0f64, PI);
        assert!((f[0] - 1.0).abs() < 1e-15 && f[1].abs() < 1e-15 && f[2].abs() < 1e-15 && f[3].abs() < 1e-15);
    }

    #[test]
    fn branch_gradient_matches_finite_differences() {
        let seg = CrackSegment {
            start: [0.1, 0.2],
            end: [0.6, 0.45],
            is_tip: [true, true],
        };
        for tip in 0..2 {
            for p in [[0.7, 0.3], [0.05, 0.4], [0.3, 0.1]] {
                let (_, g) = seg.branch_with_gradient(tip, p);
                let h = 1e-6;
                for k in 0..4 {
                    let fx = |q: [f64; 2]| seg.branch_with_gradient(tip, q).0[k];
                    let dx = (fx([p[0] + h, p[1]]) - fx([p[0] - h, p[1]])) / (2.0 * h);
                    let dy = (fx([p[0], p[1] + h]) - fx([p[0], p[1] - h])) / (2.0 * h);
                    assert!((g[k][0] - dx).abs() < 1e-6, "tip {tip} k {k}");
                    assert!((g[k][1] - dy).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn horizontal_center_crack_classification() {
        let mesh = generate_structured(1.0f64, 1.0, 34, 34).unwrap();
        let crack = CrackGeometry::new(0.5, 0.5, 0.5, 0.0, CrackKind::Center);
        let model = CrackModel::new(&mesh, crack).unwrap();
        assert_eq!(model.tip_count(), 2);
        // Perturbed off the y = 0.5 grid line into a single row.
        let rows: Vec<usize> = model
            .cuts
            .iter()
            .filter(|c| c.is_cut())
            .map(|c| c.element / 34)
            .collect();
        assert!(rows.windows(2).all(|w| w[0] == w[1]));
        let cols: Vec<usize> = model.cuts.iter().filter(|c| c.is_cut()).map(|c| c.element % 34).collect();
        assert!(cols.windows(2).all(|w| w[1] == w[0] + 1), "contiguous band");
        assert!(model.perturbation[1].abs() > 0.0);
    }

    #[test]
    fn crack_inside_one_element_is_refused() {
        let mesh = generate_structured(1.0, 1.0, 4, 4).unwrap();
        let crack = CrackGeometry::new(0.37, 0.37, 0.05, 0.3, CrackKind::Center);
        assert!(matches!(CrackModel::new(&mesh, crack), Err(FlutterError::DegenerateCrack(_))));
        let tiny = CrackGeometry::new(0.37, 0.37, 1e-14, 0.3, CrackKind::Center);
        assert!(matches!(CrackModel::new(&mesh, tiny), Err(FlutterError::DegenerateCrack(_))));
    }

    #[test]
    fn enrichment_counts() {
        let mesh = generate_structured(1.0, 1.0, 3, 3).unwrap();
        let base = apply_boundary(&mesh, BoundaryKind::Free);
        let map = build_enrichment_map(&mesh, None, &base).unwrap();
        assert_eq!(map.total(), base.total());

        // Edge crack from x = 0 through the first row's middle element.
        let crack = CrackGeometry::new(0.2, 0.5, 0.8, 0.0, CrackKind::Edge);
        let model = CrackModel::new(&mesh, crack).unwrap();
        assert_eq!(model.split_count(), 1);
        assert_eq!(model.tip_count(), 1);
        let map = build_enrichment_map(&mesh, Some(&model), &base).unwrap();
        let heav = map.heaviside.iter().filter(|h| h.is_some()).count();
        let tip = map.tip.iter().filter(|t| t.is_some()).count();
        assert_eq!(tip, 4);
        assert_eq!(heav, 2);
        assert_eq!(map.enriched_count(), 4 * 20 + 2 * 5);
        assert!((0..16).all(|n| !(map.heaviside[n].is_some() && map.tip[n].is_some())));
    }

    #[test]
    fn subcell_weights_partition_area() {
        let mesh = generate_structured(1.0, 1.0, 5, 5).unwrap();
        let crack = CrackGeometry::new(0.47, 0.53, 0.55, 0.4, CrackKind::Center);
        let model = CrackModel::new(&mesh, crack).unwrap();
        for cut in &model.cuts {
            let coords = mesh.element_coords(cut.element);
            let pts = subcell_quadrature(&coords, cut, &model.segment, 0).unwrap();
            let s: f64 = pts.iter().map(|p| p.weight).sum();
            assert!((s - 0.04).abs() < 1e-12 * 0.04);
            if cut.is_cut() {
                for p in &pts {
                    assert!(model.segment.phi(p.x).abs() > 1e-12);
                }
            } else {
                assert_eq!(pts.len(), 4);
            }
        }
    }
}
