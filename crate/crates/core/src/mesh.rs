//! Structured quadrilateral meshes of the rectangular plate and the
//! constrained-DOF patterns of the supported boundary conditions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{FlutterError, Result};
use crate::scalar::Real;

/// Standard degrees of freedom carried by every node.
pub const FIELDS: usize = 5;

/// Field order within a nodal block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    U = 0,
    V = 1,
    W = 2,
    ThetaX = 3,
    ThetaY = 4,
}

impl Field {
    pub const ALL: [Field; FIELDS] = [Field::U, Field::V, Field::W, Field::ThetaX, Field::ThetaY];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    pub nodes: Vec<[T; 2]>,
    /// Counterclockwise 4-node connectivity.
    pub elements: Vec<[usize; 4]>,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Real> Mesh<T> {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element_coords(&self, e: usize) -> [[T; 2]; 4] {
        let conn = self.elements[e];
        [
            self.nodes[conn[0]],
            self.nodes[conn[1]],
            self.nodes[conn[2]],
            self.nodes[conn[3]],
        ]
    }

    /// Characteristic element size (the larger of the grid spacings).
    pub fn element_size(&self) -> T {
        let (xmin, xmax, ymin, ymax) = self.bounds();
        let dx = (xmax - xmin) / T::from_usize_lossy(self.nx.max(1));
        let dy = (ymax - ymin) / T::from_usize_lossy(self.ny.max(1));
        dx.max(dy)
    }

    pub fn bounds(&self) -> (T, T, T, T) {
        let mut b = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
        for p in &self.nodes {
            b.0 = b.0.min(p[0]);
            b.1 = b.1.max(p[0]);
            b.2 = b.2.min(p[1]);
            b.3 = b.3.max(p[1]);
        }
        b
    }

    /// Elements attached to each node.
    pub fn node_elements(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (e, conn) in self.elements.iter().enumerate() {
            for &n in conn {
                adj[n].push(e);
            }
        }
        adj
    }

    /// Node and element tables as CSV text.
    pub fn to_csv(&self) -> (String, String) {
        let mut nodes = String::from("node,x,y\n");
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(nodes, "{i},{},{}", p[0], p[1]);
        }
        let mut elems = String::from("element,n0,n1,n2,n3\n");
        for (i, c) in self.elements.iter().enumerate() {
            let _ = writeln!(elems, "{i},{},{},{},{}", c[0], c[1], c[2], c[3]);
        }
        (nodes, elems)
    }
}

/// Uniform `nx` by `ny` grid over `[0, a] x [0, b]`, nodes numbered row by row.
pub fn generate_structured<T: Real>(a: T, b: T, nx: usize, ny: usize) -> Result<Mesh<T>> {
    if nx == 0 || ny == 0 {
        return Err(FlutterError::Argument("mesh needs at least one subdivision per direction".into()));
    }
    if !(a > T::zero() && b > T::zero()) {
        return Err(FlutterError::Argument("mesh extents must be positive".into()));
    }
    let dx = a / T::from_usize_lossy(nx);
    let dy = b / T::from_usize_lossy(ny);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { a } else { dx * T::from_usize_lossy(i) };
            let y = if j == ny { b } else { dy * T::from_usize_lossy(j) };
            nodes.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elements.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Ok(Mesh { nodes, elements, nx, ny })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// `u = w = theta_y = 0` on `x = 0, a`; `v = w = theta_x = 0` on `y = 0, b`.
    #[serde(alias = "simply-supported-all", alias = "ssss")]
    SimplySupported,
    /// All five fields fixed on every edge.
    #[serde(alias = "clamped-all", alias = "cccc")]
    Clamped,
    /// All five fields fixed on `x = 0`, other edges free.
    #[serde(alias = "cantilever-clamped-at-x0")]
    Cantilever,
    /// No constraints. Used for rigid-body checks.
    Free,
}

impl std::str::FromStr for BoundaryKind {
    type Err = FlutterError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simply-supported" | "simply-supported-all" | "ssss" => Ok(Self::SimplySupported),
            "clamped" | "clamped-all" | "cccc" => Ok(Self::Clamped),
            "cantilever" | "cantilever-clamped-at-x0" => Ok(Self::Cantilever),
            "free" => Ok(Self::Free),
            other => Err(FlutterError::Argument(format!("unknown boundary kind `{other}`"))),
        }
    }
}

/// Standard nodal DOF numbering (`5 * node + field`) and its constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub node_count: usize,
    /// One flag per standard DOF.
    pub constrained: Vec<bool>,
}

impl DofMap {
    pub fn unconstrained(node_count: usize) -> Self {
        Self {
            node_count,
            constrained: vec![false; node_count * FIELDS],
        }
    }

    #[inline]
    pub fn dof(node: usize, field: usize) -> usize {
        node * FIELDS + field
    }

    pub fn total(&self) -> usize {
        self.constrained.len()
    }

    pub fn free_count(&self) -> usize {
        self.constrained.iter().filter(|c| !**c).count()
    }

    pub fn constrained_indices(&self) -> Vec<usize> {
        (0..self.total()).filter(|&d| self.constrained[d]).collect()
    }

    pub fn is_node_field_constrained(&self, node: usize, field: usize) -> bool {
        self.constrained[Self::dof(node, field)]
    }
}

/// Builds the constrained-DOF set for one of the supported boundary kinds.
pub fn apply_boundary<T: Real>(mesh: &Mesh<T>, kind: BoundaryKind) -> DofMap {
    let mut map = DofMap::unconstrained(mesh.node_count());
    let (xmin, xmax, ymin, ymax) = mesh.bounds();
    let tol = mesh.element_size() * T::lit(1e-9);
    let on = |v: T, target: T| (v - target).abs() <= tol;
    let fix = |map: &mut DofMap, n: usize, fields: &[Field]| {
        for f in fields {
            map.constrained[DofMap::dof(n, *f as usize)] = true;
        }
    };
    for (n, p) in mesh.nodes.iter().enumerate() {
        let x_edge = on(p[0], xmin) || on(p[0], xmax);
        let y_edge = on(p[1], ymin) || on(p[1], ymax);
        match kind {
            BoundaryKind::SimplySupported => {
                if x_edge {
                    fix(&mut map, n, &[Field::U, Field::W, Field::ThetaY]);
                }
                if y_edge {
                    fix(&mut map, n, &[Field::V, Field::W, Field::ThetaX]);
                }
            }
            BoundaryKind::Clamped => {
                if x_edge || y_edge {
                    fix(&mut map, n, &Field::ALL);
                }
            }
            BoundaryKind::Cantilever => {
                if on(p[0], xmin) {
                    fix(&mut map, n, &Field::ALL);
                }
            }
            BoundaryKind::Free => {}
        }
    }
    map
}
