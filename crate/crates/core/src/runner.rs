//! End-to-end case and study execution with text, JSON and CSV reports.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::crack::{build_enrichment_map, CrackModel};
use crate::eigen::{free_vibration, reduce, ModalBasis, ReducedPencil};
use crate::error::{FlutterError, Result};
use crate::fem::{assemble, assemble_aero_damping, GlobalSystem, ScaleMetadata};
use crate::flutter::{refine, sweep, FlutterPoint, SweepResult};
use crate::material::{section_properties, FgmPlate, SectionProperties};
use crate::mesh::{apply_boundary, generate_structured, Mesh};

/// Everything assembled for one configuration.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: RunConfig,
    pub plate: FgmPlate<f64>,
    pub section: SectionProperties<f64>,
    pub mesh: Mesh<f64>,
    pub crack: Option<CrackModel<f64>>,
    pub system: GlobalSystem<f64>,
}

/// Resolves `config` and assembles the constrained global system.
pub fn build_model(config: &RunConfig) -> Result<Model> {
    let config = config.resolved()?;
    let plate = config.plate()?;
    let section = section_properties(&plate, config.plate.shear_correction)?;
    let (nx, ny) = config.mesh_divisions();
    let mesh = generate_structured(plate.a, plate.b, nx, ny)?;
    let crack = match config.crack_geometry() {
        Some(g) => {
            g.validate(plate.a, plate.b)?;
            Some(CrackModel::new(&mesh, g)?)
        }
        None => None,
    };
    let base = apply_boundary(&mesh, config.boundary());
    let map = build_enrichment_map(&mesh, crack.as_ref(), &base)?;
    let scale = ScaleMetadata::from_plate(&plate)?;
    let system = assemble(&mesh, crack.as_ref(), &section, &map, config.flow_angle(), scale)?;
    Ok(Model {
        config,
        plate,
        section,
        mesh,
        crack,
        system,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSummary {
    pub nx: usize,
    pub ny: usize,
    pub nodes: usize,
    pub elements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofSummary {
    pub standard: usize,
    pub enriched: usize,
    pub free: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrackSummary {
    pub split_elements: usize,
    pub tip_elements: usize,
    /// Shift applied to avoid degenerate cuts (m).
    pub perturbation_m: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionSummary {
    pub kappa: f64,
    pub d11: f64,
    pub i0: f64,
    pub i1: f64,
    /// Ceramic bending rigidity used for normalization.
    pub d_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub index: usize,
    pub omega_rad_s: f64,
    /// `omega a^2 sqrt(rho_c h / D_c)`.
    pub omega_nd: f64,
    pub omega2_nd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalSummary {
    pub retained: usize,
    pub iterations: usize,
    pub max_residual: f64,
}

/// Result of one analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    /// Fully resolved configuration.
    pub config: RunConfig,
    pub mesh: MeshSummary,
    pub dofs: DofSummary,
    pub crack: Option<CrackSummary>,
    pub section: SectionSummary,
    pub modes: Vec<ModeSummary>,
    pub modal: ModalSummary,
    /// `None` when no coalescence occurs up to the sweep limit.
    pub flutter: Option<FlutterPoint<f64>>,
    /// First sweep bracket in nondimensional pressure.
    pub bracket_nd: Option<(f64, f64)>,
    pub sweep_steps: usize,
    /// Diagonal of the modal aerodynamic damping matrix, when requested.
    pub aero_damping_modal: Option<Vec<f64>>,
    pub wall_clock_s: f64,
}

/// Report together with the data behind it.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub report: CaseReport,
    pub sweep: SweepResult<f64>,
    /// Nondimensional reduced pencil.
    pub pencil: ReducedPencil<f64>,
    pub basis: ModalBasis<f64>,
}

/// Modal basis, nondimensional pencil, sweep and critical point of a model.
pub type Analysis = (ModalBasis<f64>, ReducedPencil<f64>, SweepResult<f64>, Option<FlutterPoint<f64>>);

/// Modes and critical point for an assembled model.
pub fn analyze(model: &Model) -> Result<Analysis> {
    let modes = model.config.modes();
    let free = model.system.free_count();
    if modes > free {
        return Err(FlutterError::config("solver.modes", format!("{modes} modes requested but only {free} free DOFs")));
    }
    let basis = free_vibration(&model.system, modes)?;
    let pencil = reduce(&model.system, &basis).nondimensional(&model.system.scale);
    let cfg = model.config.solver.sweep;
    let result = sweep(&pencil, &cfg)?;
    let point = match result.bracket {
        Some(b) => Some(FlutterPoint::from_nondimensional(&refine(&pencil, b, &cfg)?, &model.system.scale)),
        None => None,
    };
    Ok((basis, pencil, result, point))
}

/// Runs one flutter analysis.
pub fn run_case(config: &RunConfig) -> Result<CaseOutcome> {
    let start = Instant::now();
    let model = build_model(config)?;
    let (basis, pencil, sweep_result, flutter) = analyze(&model)?;
    let scale = model.system.scale;
    let modes = basis
        .omega2
        .iter()
        .enumerate()
        .map(|(i, w2)| {
            let w2 = w2.max(0.0);
            let omega2_nd = w2 * scale.omega2_factor();
            ModeSummary {
                index: i + 1,
                omega_rad_s: w2.sqrt(),
                omega_nd: omega2_nd.sqrt(),
                omega2_nd,
            }
        })
        .collect();
    let aero_damping_modal = if model.config.output.aero_damping_diagnostic {
        let map = &model.system.dof_map;
        let d = assemble_aero_damping(&model.mesh, model.crack.as_ref(), &model.section, map)?;
        Some(
            basis
                .phi
                .iter()
                .map(|v| v.iter().zip(d.mul_vec(v)).map(|(a, b)| a * b).sum())
                .collect(),
        )
    } else {
        None
    };
    let map = &model.system.dof_map;
    let report = CaseReport {
        mesh: MeshSummary {
            nx: model.mesh.nx,
            ny: model.mesh.ny,
            nodes: model.mesh.node_count(),
            elements: model.mesh.element_count(),
        },
        dofs: DofSummary {
            standard: map.base.total(),
            enriched: map.enriched_count(),
            free: model.system.free_count(),
        },
        crack: model.crack.as_ref().map(|c| CrackSummary {
            split_elements: c.split_count(),
            tip_elements: c.tip_count(),
            perturbation_m: c.perturbation,
        }),
        section: SectionSummary {
            kappa: model.section.kappa,
            d11: model.section.db[0][0],
            i0: model.section.i0,
            i1: model.section.i1,
            d_c: scale.d_c,
        },
        modes,
        modal: ModalSummary {
            retained: basis.len(),
            iterations: basis.iterations,
            max_residual: basis.max_residual,
        },
        flutter,
        bracket_nd: sweep_result.bracket,
        sweep_steps: sweep_result.steps,
        aero_damping_modal,
        wall_clock_s: start.elapsed().as_secs_f64(),
        config: model.config,
    };
    Ok(CaseOutcome {
        report,
        sweep: sweep_result,
        pencil,
        basis,
    })
}

impl CaseReport {
    pub fn to_text(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "panel flutter case report");
        let _ = writeln!(s, "mesh            {} x {} ({} nodes, {} elements)", self.mesh.nx, self.mesh.ny, self.mesh.nodes, self.mesh.elements);
        let _ = writeln!(s, "dofs            {} standard, {} enriched, {} free", self.dofs.standard, self.dofs.enriched, self.dofs.free);
        if let Some(c) = &self.crack {
            let _ = writeln!(s, "crack           {} split elements, {} tip elements", c.split_elements, c.tip_elements);
        }
        let _ = writeln!(s, "shear factor    {:.6}", self.section.kappa);
        let _ = writeln!(
            s,
            "modal basis     {} modes, {} iterations, residual {:.2e}",
            self.modal.retained, self.modal.iterations, self.modal.max_residual
        );
        let _ = writeln!(s, "\n mode   omega (rad/s)        Omega        Omega^2");
        for m in &self.modes {
            let _ = writeln!(s, "{:5} {:15.6} {:12.5} {:14.4}", m.index, m.omega_rad_s, m.omega_nd, m.omega2_nd);
        }
        let _ = writeln!(s);
        match &self.flutter {
            Some(f) => {
                let _ = writeln!(s, "critical pressure      lambda_nd = {:.4}  (lambda = {:.6e} Pa/m)", f.lambda_cr_nd, f.lambda_cr);
                let _ = writeln!(s, "coalescence frequency  Omega = {:.4}  Omega^2 = {:.3}  (omega = {:.6e} rad/s)", f.omega_cr_nd, f.omega2_cr_nd, f.omega_cr);
                let _ = writeln!(s, "merging modes          {} and {}", f.mode_pair.0 + 1, f.mode_pair.1 + 1);
                if let Some((lo, hi)) = self.bracket_nd {
                    let _ = writeln!(s, "sweep bracket          [{lo}, {hi}] after {} steps", self.sweep_steps);
                }
            }
            None => {
                let _ = writeln!(
                    s,
                    "no coalescence up to lambda_nd = {} ({} steps)",
                    self.config.solver.sweep.lambda_max, self.sweep_steps
                );
            }
        }
        if let Some(d) = &self.aero_damping_modal {
            let _ = writeln!(s, "modal aero damping     {:?}", d);
        }
        let _ = writeln!(s, "wall clock             {:.3} s", self.wall_clock_s);
        let _ = writeln!(s, "\n# resolved configuration\n{}", self.config.to_toml_string()?);
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| FlutterError::Io(e.to_string()))
    }

    /// In-vacuo modes as CSV.
    pub fn modes_csv(&self) -> String {
        let mut s = String::from("mode,omega_rad_s,omega_nd,omega2_nd\n");
        for m in &self.modes {
            let _ = writeln!(s, "{},{},{},{}", m.index, m.omega_rad_s, m.omega_nd, m.omega2_nd);
        }
        s
    }
}

/// Writes the report files of one case into `dir`.
pub fn write_case(outcome: &CaseOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let out = &outcome.report.config.output;
    std::fs::write(dir.join("report.txt"), outcome.report.to_text()?)?;
    std::fs::write(dir.join("report.json"), outcome.report.to_json()?)?;
    std::fs::write(dir.join("modes.csv"), outcome.report.modes_csv())?;
    if out.write_trace {
        std::fs::write(dir.join("trace.csv"), outcome.sweep.trace_csv())?;
    }
    if out.write_mesh || out.write_matrices {
        let model = build_model(&outcome.report.config)?;
        if out.write_mesh {
            let (nodes, elements) = model.mesh.to_csv();
            std::fs::write(dir.join("mesh_nodes.csv"), nodes)?;
            std::fs::write(dir.join("mesh_elements.csv"), elements)?;
        }
        if out.write_matrices {
            model.system.write_matrix_market(dir)?;
        }
    }
    Ok(())
}

/// One row of a parameter study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub value: f64,
    pub lambda_cr_nd: Option<f64>,
    pub omega_cr_nd: Option<f64>,
    pub omega2_cr_nd: Option<f64>,
    pub mode_pair: Option<(usize, usize)>,
    /// `ok`, `no-flutter` or an error message.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyTable {
    pub parameter: String,
    pub config: RunConfig,
    pub rows: Vec<StudyRow>,
}

impl StudyTable {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut s = format!("{},lambda_cr_nd,omega_cr_nd,omega2_cr_nd,status\n", self.parameter);
        for r in &self.rows {
            let status = r.status.replace([',', '\n'], ";");
            let _ = writeln!(s, "{},{},{},{},{}", r.value, opt(r.lambda_cr_nd), opt(r.omega_cr_nd), opt(r.omega2_cr_nd), status);
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| FlutterError::Io(e.to_string()))
    }

    /// Critical pressures of the successful rows, in row order.
    pub fn lambdas(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.lambda_cr_nd).collect()
    }
}

/// Runs one case per study value. Failing cases are recorded, not fatal.
pub fn run_study(config: &RunConfig) -> Result<StudyTable> {
    let resolved = config.resolved()?;
    let study = resolved
        .study
        .clone()
        .ok_or_else(|| FlutterError::config("study", "a [study] block is required"))?;
    let rows = study
        .values
        .par_iter()
        .map(|&value| {
            let case = resolved.with_parameter(&study.parameter, value).and_then(|c| run_case(&c));
            match case {
                Ok(o) => match o.report.flutter {
                    Some(f) => StudyRow {
                        value,
                        lambda_cr_nd: Some(f.lambda_cr_nd),
                        omega_cr_nd: Some(f.omega_cr_nd),
                        omega2_cr_nd: Some(f.omega2_cr_nd),
                        mode_pair: Some(f.mode_pair),
                        status: "ok".into(),
                    },
                    None => StudyRow {
                        value,
                        lambda_cr_nd: None,
                        omega_cr_nd: None,
                        omega2_cr_nd: None,
                        mode_pair: None,
                        status: "no-flutter".into(),
                    },
                },
                Err(e) => StudyRow {
                    value,
                    lambda_cr_nd: None,
                    omega_cr_nd: None,
                    omega2_cr_nd: None,
                    mode_pair: None,
                    status: format!("error: {e}"),
                },
            }
        })
        .collect();
    Ok(StudyTable {
        parameter: study.parameter,
        config: resolved,
        rows,
    })
}

/// Writes `study.csv` and `study.json` into `dir`.
pub fn write_study(table: &StudyTable, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("study.csv"), table.to_csv())?;
    std::fs::write(dir.join("study.json"), table.to_json()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(extra: &str) -> RunConfig {
        RunConfig::from_toml_str(&format!(
            r#"
            [plate]
            a_m = 1.0
            h_m = 0.01
            [plate.isotropic]
            youngs_modulus_pa = 7.0e10
            poisson_ratio = 0.3
            density_kg_m3 = 2700.0
            [mesh]
            nx = 8
            ny = 8
            [solver]
            modes = 6
            {extra}
            "#
        ))
        .unwrap()
    }

    #[test]
    fn small_case_runs_and_reports() {
        let o = run_case(&small("")).unwrap();
        let f = o.report.flutter.unwrap();
        assert!(f.lambda_cr_nd > 300.0 && f.lambda_cr_nd < 700.0, "{f:?}");
        assert_eq!(f.mode_pair, (0, 1));
        let text = o.report.to_text().unwrap();
        assert!(text.contains("# resolved configuration"));
        assert!(o.report.to_json().unwrap().contains("\"config\""));
    }

    #[test]
    fn empty_study_is_empty_table() {
        let t = run_study(&small("[study]\nparameter = \"plate.gradient_index\"\nvalues = []")).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.to_csv(), "plate.gradient_index,lambda_cr_nd,omega_cr_nd,omega2_cr_nd,status\n");
    }

    #[test]
    fn failing_study_rows_are_recorded() {
        let t = run_study(&small("[study]\nparameter = \"solver.modes\"\nvalues = [4, 100000]")).unwrap();
        assert_eq!(t.rows[0].status, "ok");
        assert!(t.rows[1].status.starts_with("error"));
    }
}
