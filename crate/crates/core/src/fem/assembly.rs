use std::path::Path;

use rayon::prelude::*;

use crate::crack::{CrackModel, EnrichedDofMap};
use crate::error::{FlutterError, Result};
use crate::fem::element::{element_matrices, ElementBasis, ElementMatrices, ElementMatrix};
use crate::linalg::CsrMatrix;
use crate::material::{FgmPlate, SectionProperties};
use crate::mesh::{Mesh, FIELDS};
use crate::scalar::Real;

/// Reference quantities of the nondimensional form:
/// `lambda_nd = lambda a^3 / D_c`, `Omega = omega a^2 sqrt(rho_c h / D_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleMetadata<T> {
    pub a: T,
    pub h: T,
    pub d_c: T,
    pub rho_c: T,
}

impl<T: Real> ScaleMetadata<T> {
    pub fn from_plate(plate: &FgmPlate<T>) -> Result<Self> {
        Ok(Self {
            a: plate.a,
            h: plate.h,
            d_c: plate.ceramic_rigidity()?,
            rho_c: plate.ceramic.rho,
        })
    }

    /// `omega^2` multiplier giving `Omega^2`.
    pub fn omega2_factor(&self) -> T {
        self.a.powi(4) * self.rho_c * self.h / self.d_c
    }

    /// `lambda` multiplier giving `lambda_nd`.
    pub fn lambda_factor(&self) -> T {
        self.a.powi(3) / self.d_c
    }
}

/// Constrained global matrices over the free DOFs.
#[derive(Debug, Clone)]
pub struct GlobalSystem<T> {
    pub k: CsrMatrix<T>,
    pub m: CsrMatrix<T>,
    /// Aerodynamic matrix; the flutter operator is `K + lambda * abar`.
    pub abar: CsrMatrix<T>,
    pub dof_map: EnrichedDofMap,
    /// Global DOF to row of the free system.
    pub free_index: Vec<Option<usize>>,
    pub scale: ScaleMetadata<T>,
    pub flow_angle: T,
}

impl<T: Real> GlobalSystem<T> {
    pub fn free_count(&self) -> usize {
        self.k.rows
    }

    /// Writes `K.mtx`, `M.mtx` and `A.mtx` in Matrix Market format.
    pub fn write_matrix_market(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("K.mtx"), self.k.to_matrix_market())?;
        std::fs::write(dir.join("M.mtx"), self.m.to_matrix_market())?;
        std::fs::write(dir.join("A.mtx"), self.abar.to_matrix_market())?;
        Ok(())
    }
}

fn check_map<T: Real>(mesh: &Mesh<T>, map: &EnrichedDofMap) -> Result<()> {
    if map.base.node_count != mesh.node_count() || map.base.total() != mesh.node_count() * FIELDS {
        return Err(FlutterError::Assembly(format!(
            "DOF map covers {} nodes but the mesh has {}",
            map.base.node_count,
            mesh.node_count()
        )));
    }
    if map.heaviside.len() != mesh.node_count() || map.tip.len() != mesh.node_count() {
        return Err(FlutterError::Assembly("enrichment tables do not match the mesh".into()));
    }
    let total = map.total();
    let in_range = |start: usize, len: usize| start + len <= total;
    let ok = map.heaviside.iter().flatten().all(|&s| in_range(s, FIELDS))
        && map.tip.iter().flatten().all(|&(s, _)| in_range(s, 4 * FIELDS));
    if !ok {
        return Err(FlutterError::Assembly("enriched DOF index beyond the map".into()));
    }
    Ok(())
}

/// Element matrices for every element, computed in parallel, in element order.
pub fn element_contributions<T: Real>(
    mesh: &Mesh<T>,
    crack: Option<&CrackModel<T>>,
    section: &SectionProperties<T>,
    map: &EnrichedDofMap,
    flow_angle: T,
) -> Result<Vec<(Vec<usize>, ElementMatrices<T>)>> {
    (0..mesh.element_count())
        .into_par_iter()
        .map(|e| {
            let basis = ElementBasis::new(mesh, e, crack, map);
            let mats = element_matrices(&basis, crack, section, flow_angle)?;
            Ok((basis.dofs, mats))
        })
        .collect()
}

fn scatter<T: Real>(
    parts: &[(Vec<usize>, ElementMatrices<T>)],
    free: &[Option<usize>],
    n: usize,
    pick: impl Fn(&ElementMatrices<T>) -> &ElementMatrix<T>,
) -> CsrMatrix<T> {
    let mut trip = Vec::new();
    for (dofs, mats) in parts {
        let em = pick(mats);
        for (i, gi) in dofs.iter().enumerate() {
            let Some(r) = free[*gi] else { continue };
            for (j, gj) in dofs.iter().enumerate() {
                let Some(c) = free[*gj] else { continue };
                let v = em.get(i, j);
                if v != T::zero() {
                    trip.push((r, c, v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, n, trip)
}

/// Assembles `K`, `M` and `abar` over the free DOFs of `map`.
pub fn assemble<T: Real>(
    mesh: &Mesh<T>,
    crack: Option<&CrackModel<T>>,
    section: &SectionProperties<T>,
    map: &EnrichedDofMap,
    flow_angle: T,
    scale: ScaleMetadata<T>,
) -> Result<GlobalSystem<T>> {
    check_map(mesh, map)?;
    let parts = element_contributions(mesh, crack, section, map, flow_angle)?;
    let free_index = map.free_index();
    let n = map.free_count();
    let k = scatter(&parts, &free_index, n, |m| &m.stiffness);
    let m = scatter(&parts, &free_index, n, |m| &m.mass);
    let abar = scatter(&parts, &free_index, n, |m| &m.aero);
    Ok(GlobalSystem {
        k,
        m,
        abar,
        dof_map: map.clone(),
        free_index,
        scale,
        flow_angle,
    })
}

/// Aerodynamic damping pattern `int N_w^T N_w` over the free DOFs. It is
/// not part of the flutter operator and is only assembled for reporting.
pub fn assemble_aero_damping<T: Real>(
    mesh: &Mesh<T>,
    crack: Option<&CrackModel<T>>,
    section: &SectionProperties<T>,
    map: &EnrichedDofMap,
) -> Result<CsrMatrix<T>> {
    check_map(mesh, map)?;
    let parts = element_contributions(mesh, crack, section, map, T::zero())?;
    Ok(scatter(&parts, &map.free_index(), map.free_count(), |m| &m.aero_damping))
}
