//! End-to-end physics checks against closed-form and independent dense oracles.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use panel_flutter::config::RunConfig;
use panel_flutter::crack::{build_enrichment_map, CrackGeometry, CrackKind, CrackModel, EnrichedDofMap};
use panel_flutter::eigen::complex_eigenvalues;
use panel_flutter::fem::{assemble, element_stiffness, ElementBasis, ScaleMetadata};
use panel_flutter::material::{section_properties, FgmPlate, MaterialPhase, SectionProperties, ShearCorrectionMode};
use panel_flutter::mesh::{apply_boundary, generate_structured, BoundaryKind, DofMap, Mesh, FIELDS};
use panel_flutter::runner::{analyze, build_model, run_case, write_case};

fn iso_config(n: usize, boundary: &str, modes: usize, extra: &str) -> RunConfig {
    let text = format!(
        r#"
[plate]
a_m = 1.0
h_m = 0.01
[plate.isotropic]
youngs_modulus_pa = 70.0e9
poisson_ratio = 0.3
density_kg_m3 = 2700.0
[mesh]
nx = {n}
ny = {n}
boundary = "{boundary}"
[solver]
modes = {modes}
{extra}
"#
    );
    RunConfig::from_toml_str(&text).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn navier(m: usize, n: usize) -> f64 {
    PI * PI * (m * m + n * n) as f64
}

fn nondimensional_modes(cfg: &RunConfig) -> Vec<f64> {
    run_case(cfg).unwrap().report.modes.iter().map(|m| m.omega_nd).collect()
}

#[test]
fn simply_supported_8x8_fundamental_within_two_percent() {
    let omega = nondimensional_modes(&iso_config(8, "simply-supported", 4, ""));
    assert!(rel(omega[0], navier(1, 1)) <= 0.02, "{}", omega[0]);
}

#[test]
fn simply_supported_16x16_fundamental_is_locking_free() {
    let omega = nondimensional_modes(&iso_config(16, "simply-supported", 2, ""));
    assert!(rel(omega[0], navier(1, 1)) <= 0.01, "{}", omega[0]);
}

#[test]
fn simply_supported_degenerate_pair() {
    let omega = nondimensional_modes(&iso_config(24, "simply-supported", 4, ""));
    assert!(rel(omega[1], navier(1, 2)) <= 0.01, "{}", omega[1]);
    assert!(rel(omega[2], navier(2, 1)) <= 0.01, "{}", omega[2]);
    assert!(rel(omega[1], omega[2]) <= 1e-6, "pair split {} {}", omega[1], omega[2]);
}

#[test]
fn clamped_fundamental() {
    // Rayleigh-Ritz value for the fully clamped square plate.
    let omega = nondimensional_modes(&iso_config(20, "clamped", 2, ""));
    assert!(rel(omega[0], 35.99) <= 0.02, "{}", omega[0]);
}

/// Critical `lambda a^3 / D` of the strip-like Galerkin model with modes
/// `sin(r pi x) sin(pi y)`, `r = 1..=n`: the FE model with x-directed flow
/// only couples modes sharing the spanwise wavenumber.
fn galerkin_lambda(n: usize) -> f64 {
    let k = DMatrix::from_fn(n, n, |i, j| if i == j { PI.powi(4) * (((i + 1) * (i + 1) + 1) as f64).powi(2) } else { 0.0 });
    // Mass-normalized modes 2 sin(r pi x) sin(pi y): A_rs = 4 r s / (r^2 - s^2) for r + s odd.
    let a = DMatrix::from_fn(n, n, |i, j| {
        let (r, s) = ((i + 1) as f64, (j + 1) as f64);
        if (i + j) % 2 == 1 {
            4.0 * r * s / (r * r - s * s)
        } else {
            0.0
        }
    });
    let coalesced = |l: f64| {
        let ev = (&k + &a * l).complex_eigenvalues();
        ev.iter().any(|s| s.im.abs() > 1e-9 * s.norm())
    };
    let (mut lo, mut hi) = (0.0, 2000.0);
    assert!(coalesced(hi));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if coalesced(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[test]
fn simply_supported_flutter_matches_galerkin_oracle() {
    // m = 20 on a square plate retains the streamwise modes r = 1..5.
    let out = run_case(&iso_config(24, "simply-supported", 20, "")).unwrap();
    let fe = out.report.flutter.unwrap().lambda_cr_nd;
    let oracle = galerkin_lambda(5);
    assert!(rel(fe, oracle) <= 0.01, "fe {fe} oracle {oracle}");
}

#[test]
fn reduced_pencil_tracks_full_pencil_below_onset() {
    let model = build_model(&iso_config(10, "simply-supported", 20, "")).unwrap();
    let (_, pencil, _, point) = analyze(&model).unwrap();
    let lambda_nd = 0.25 * point.unwrap().lambda_cr_nd;
    let scale = model.system.scale;

    let dense = |m: &panel_flutter::linalg::CsrMatrix<f64>| {
        let d = m.to_dense();
        DMatrix::from_fn(m.rows, m.cols, |i, j| d[i][j])
    };
    let k = dense(&model.system.k);
    let a = dense(&model.system.abar);
    let l = dense(&model.system.m).cholesky().unwrap().l();
    let li = l.clone().try_inverse().unwrap();
    let op = &li * (k + a * (lambda_nd / scale.lambda_factor())) * li.transpose();
    let mut full: Vec<f64> = op.complex_eigenvalues().iter().map(|s| s.re * scale.omega2_factor()).collect();
    full.sort_by(f64::total_cmp);

    let reduced = complex_eigenvalues(&pencil, lambda_nd).unwrap();
    for i in 0..4 {
        assert!(reduced[i].im.abs() < 1e-9 * reduced[i].re);
        assert!(rel(reduced[i].re, full[i]) <= 0.005, "mode {i}: reduced {} full {}", reduced[i].re, full[i]);
    }
}

#[test]
fn free_plate_has_six_rigid_modes() {
    let model = build_model(&iso_config(6, "free", 10, "")).unwrap();
    let basis = panel_flutter::eigen::dense_free_vibration(&model.system.k, &model.system.m, 8).unwrap();
    let elastic = basis.omega2[6];
    assert!(elastic > 0.0);
    assert!(basis.omega2[..6].iter().all(|w| w.abs() < 1e-6 * elastic), "{:?}", basis.omega2);
}

fn iso_section(h: f64) -> SectionProperties<f64> {
    let p = FgmPlate::homogeneous(1.0, 1.0, h, MaterialPhase::isotropic("iso", 2.0e5, 0.25, 1.0)).unwrap();
    section_properties(&p, ShearCorrectionMode::Constant).unwrap()
}

/// Distorted 2 x 2 patch with the interior node moved off the grid.
fn distorted_patch() -> Mesh<f64> {
    let mut mesh = generate_structured(2.0, 2.0, 2, 2).unwrap();
    mesh.nodes[4] = [1.13, 0.88];
    mesh
}

#[test]
fn constant_curvature_patch_test() {
    let mesh = distorted_patch();
    let section = iso_section(0.1);
    let map = EnrichedDofMap::standard(DofMap::unconstrained(mesh.node_count()));
    // w quadratic, rotations tied to its gradient: constant curvature, no shear.
    let (ax, bxy, cy) = (0.7, -0.3, 0.4);
    let field = |p: [f64; 2]| {
        let [x, y] = p;
        let w = 0.5 * (ax * x * x + 2.0 * bxy * x * y + cy * y * y);
        [0.0, 0.0, w, -(ax * x + bxy * y), -(bxy * x + cy * y)]
    };
    let kappa = [-ax, -cy, -2.0 * bxy];
    let mut density = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            density += kappa[i] * section.db[i][j] * kappa[j];
        }
    }

    let scale = iso_section(0.1).db[0][0];
    let mut residual = vec![0.0; mesh.node_count() * FIELDS];
    for e in 0..mesh.element_count() {
        let basis = ElementBasis::new(&mesh, e, None, &map);
        let k = element_stiffness(&basis, None, &section).unwrap();
        let u: Vec<f64> = basis.coords.iter().flat_map(|p| field(*p)).collect();
        let area = panel_flutter::shape::polygon_area(&basis.coords);
        let energy = k.quadratic_form(&u);
        assert!(rel(energy, area * density) <= 1e-10, "element {e}: {energy} vs {}", area * density);
        for (i, f) in k.mul_vec(&u).into_iter().enumerate() {
            residual[basis.dofs[i]] += f;
        }
    }
    // Interior node is in equilibrium under constant moments.
    for f in 0..FIELDS {
        let r = residual[4 * FIELDS + f];
        assert!(r.abs() <= 1e-10 * scale, "field {f}: {r}");
    }
}

#[test]
fn aero_symmetric_part_lives_on_the_boundary() {
    // A + A^T integrates (w1 w2)' along the flow: only boundary rows survive.
    let mesh = generate_structured(1.0, 1.0, 4, 4).unwrap();
    let section = iso_section(0.01);
    let map = EnrichedDofMap::standard(apply_boundary(&mesh, BoundaryKind::Free));
    let plate = FgmPlate::homogeneous(1.0, 1.0, 0.01, MaterialPhase::isotropic("iso", 2.0e5, 0.25, 1.0)).unwrap();
    let sys = assemble(&mesh, None, &section, &map, 0.6, ScaleMetadata::from_plate(&plate).unwrap()).unwrap();
    let at = sys.abar.transpose();
    let on_boundary = |dof: usize| {
        let [x, y] = mesh.nodes[dof / FIELDS];
        x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0
    };
    let mut boundary_mass = 0.0f64;
    for r in 0..sys.abar.rows {
        for (c, v) in sys.abar.row(r) {
            let s = v + at.get(r, c);
            if on_boundary(r) && on_boundary(c) {
                boundary_mass = boundary_mass.max(s.abs());
            } else {
                assert!(s.abs() <= 1e-14, "interior ({r}, {c}) {s}");
            }
        }
    }
    assert!(boundary_mass > 1e-3);
}

#[test]
fn flutter_point_is_scale_invariant() {
    let base = iso_config(8, "simply-supported", 8, "");
    let mut scaled = base.clone();
    scaled.plate.a_m = 2.5;
    scaled.plate.h_m = 0.025;
    let iso = scaled.plate.isotropic.as_mut().unwrap();
    iso.youngs_modulus_pa *= 3.0;
    iso.density_kg_m3 *= 7.0;
    let p = run_case(&base).unwrap().report.flutter.unwrap();
    let q = run_case(&scaled).unwrap().report.flutter.unwrap();
    assert!(rel(q.lambda_cr_nd, p.lambda_cr_nd) <= 1e-6, "{} {}", p.lambda_cr_nd, q.lambda_cr_nd);
    assert!(rel(q.omega_cr_nd, p.omega_cr_nd) <= 1e-6);
    assert_eq!(p.mode_pair, q.mode_pair);
}

#[test]
fn cantilever_2x2_counts() {
    let model = build_model(&iso_config(2, "cantilever", 1, "")).unwrap();
    assert_eq!(model.system.free_count(), 30);
    let fixed: Vec<usize> = (0..model.mesh.node_count())
        .filter(|&n| (0..FIELDS).all(|f| model.system.dof_map.base.is_node_field_constrained(n, f)))
        .collect();
    assert_eq!(fixed.len(), 3);
    assert!(fixed.iter().all(|&n| model.mesh.nodes[n][0] == 0.0));
}

#[test]
fn crack_on_a_mesh_line_is_nudged_and_classified() {
    let mesh = generate_structured(1.0, 1.0, 4, 4).unwrap();
    let crack = CrackModel::new(&mesh, CrackGeometry::new(0.5f64, 0.5, 0.6, 0.0, CrackKind::Center)).unwrap();
    let shift = crack.perturbation[0].hypot(crack.perturbation[1]);
    let he = mesh.element_size();
    assert!(shift > 0.0 && shift <= 1e-5 * he, "{shift}");
    assert_eq!((crack.split_count(), crack.tip_count()), (2, 2));
    let rows: Vec<usize> = crack.cuts.iter().filter(|c| c.is_cut()).map(|c| c.element / mesh.nx).collect();
    assert!(rows.iter().all(|r| *r == rows[0]), "{rows:?}");
    let base = apply_boundary(&mesh, BoundaryKind::SimplySupported);
    let map = build_enrichment_map(&mesh, Some(&crack), &base).unwrap();
    assert!(map.enriched_count() > 0);
}

#[test]
fn cracked_case_output_is_deterministic() {
    let extra = "[crack]\nd_over_a = 0.4\ntheta_degrees = 30.0\n[output]\nwrite_mesh = true\nwrite_matrices = true";
    let cfg = iso_config(8, "simply-supported", 8, extra);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_case(&run_case(&cfg).unwrap(), d.path()).unwrap();
    }
    for name in ["trace.csv", "modes.csv", "mesh_nodes.csv", "mesh_elements.csv", "K.mtx", "M.mtx", "A.mtx"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert!(!a.is_empty(), "{name} empty");
        assert!(a == b, "{name} differs between runs");
    }
    let trace = std::fs::read_to_string(dirs[0].path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("lambda_nd,branch_id,re_omega2_nd,im_omega2_nd"));
}
