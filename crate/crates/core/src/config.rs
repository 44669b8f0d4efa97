//! Run configuration read from TOML. Field names carry their units.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crack::{CrackGeometry, CrackKind};
use crate::error::{FlutterError, Result};
use crate::flutter::SweepConfig;
use crate::material::{FgmPlate, MaterialPhase, ShearCorrectionMode, TemperatureCoefficients, DEFAULT_TEMPERATURE};
use crate::mesh::BoundaryKind;

/// Mesh and mode-count defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// 34 x 34 mesh, 16 modes.
    #[default]
    Default,
    /// 20 x 20 mesh, 12 modes.
    Fast,
}

impl Profile {
    pub fn mesh_divisions(self) -> usize {
        match self {
            Profile::Default => 34,
            Profile::Fast => 20,
        }
    }

    pub fn modes(self) -> usize {
        match self {
            Profile::Default => 16,
            Profile::Fast => 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropicConfig {
    pub youngs_modulus_pa: f64,
    pub poisson_ratio: f64,
    pub density_kg_m3: f64,
}

/// One constituent. `preset` names a built-in phase (`Si3N4`, `SUS304`);
/// the remaining fields override it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub e_coeffs_pa: Option<TemperatureCoefficients<f64>>,
    pub alpha_coeffs_per_k: Option<TemperatureCoefficients<f64>>,
    pub poisson_ratio: Option<f64>,
    pub density_kg_m3: Option<f64>,
}

impl PhaseConfig {
    fn preset(name: &str) -> Self {
        Self {
            preset: Some(name.into()),
            ..Self::default()
        }
    }

    fn phase(&self, field: &str) -> Result<MaterialPhase<f64>> {
        let mut p = match self.preset.as_deref() {
            Some(s) => match s.to_ascii_lowercase().as_str() {
                "si3n4" | "silicon-nitride" => MaterialPhase::silicon_nitride(),
                "sus304" | "stainless-steel" => MaterialPhase::stainless_steel(),
                other => return Err(FlutterError::config(format!("{field}.preset"), format!("unknown material preset `{other}`"))),
            },
            None => {
                let (Some(e), Some(nu), Some(rho)) = (self.e_coeffs_pa, self.poisson_ratio, self.density_kg_m3) else {
                    return Err(FlutterError::config(field, "without a preset, e_coeffs_pa, poisson_ratio and density_kg_m3 are required"));
                };
                let mut p = MaterialPhase::isotropic(self.name.clone().unwrap_or_else(|| "custom".into()), e.p0, nu, rho);
                p.e_coeffs = e;
                p
            }
        };
        if let Some(n) = &self.name {
            p.name = n.clone();
        }
        if let Some(e) = self.e_coeffs_pa {
            p.e_coeffs = e;
        }
        if let Some(a) = self.alpha_coeffs_per_k {
            p.alpha_coeffs = a;
        }
        if let Some(nu) = self.poisson_ratio {
            p.nu = nu;
        }
        if let Some(rho) = self.density_kg_m3 {
            p.rho = rho;
        }
        p.validate().map_err(|e| FlutterError::config(field, e.to_string()))?;
        Ok(p)
    }

    fn resolved(&self, field: &str) -> Result<Self> {
        let p = self.phase(field)?;
        Ok(Self {
            preset: self.preset.clone(),
            name: Some(p.name),
            e_coeffs_pa: Some(p.e_coeffs),
            alpha_coeffs_per_k: Some(p.alpha_coeffs),
            poisson_ratio: Some(p.nu),
            density_kg_m3: Some(p.rho),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FgmConfig {
    #[serde(default = "ceramic_default")]
    pub ceramic: PhaseConfig,
    #[serde(default = "metal_default")]
    pub metal: PhaseConfig,
}

fn ceramic_default() -> PhaseConfig {
    PhaseConfig::preset("Si3N4")
}

fn metal_default() -> PhaseConfig {
    PhaseConfig::preset("SUS304")
}

impl Default for FgmConfig {
    fn default() -> Self {
        Self {
            ceramic: ceramic_default(),
            metal: metal_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateConfig {
    pub a_m: f64,
    /// Defaults to `a_m`.
    pub b_m: Option<f64>,
    pub h_m: f64,
    #[serde(default)]
    pub gradient_index: f64,
    pub temperature_k: Option<f64>,
    #[serde(default)]
    pub shear_correction: ShearCorrectionMode,
    pub isotropic: Option<IsotropicConfig>,
    pub fgm: Option<FgmConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub boundary: Option<BoundaryKind>,
}

/// Crack placement. `cx_m`, `cy_m` locate the midpoint of the physical
/// crack (default: plate centre). For an edge crack the midpoint sits half a
/// length in from the edge, so one end lies on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrackConfig {
    #[serde(default = "center_kind")]
    pub kind: CrackKind,
    pub cx_m: Option<f64>,
    pub cy_m: Option<f64>,
    /// Crack length over plate length `a`. Zero disables the crack.
    pub d_over_a: f64,
    #[serde(default)]
    pub theta_degrees: f64,
}

fn center_kind() -> CrackKind {
    CrackKind::Center
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    #[serde(default)]
    pub theta_prime_degrees: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Retained in-vacuo modes.
    pub modes: Option<usize>,
    /// Sweep in nondimensional pressure `lambda a^3 / D_c`.
    #[serde(default)]
    pub sweep: SweepConfig<f64>,
}

/// Parameter study: `parameter` is a dotted path to a numeric field, e.g.
/// `plate.gradient_index` or `crack.theta_degrees`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub parameter: String,
    #[serde(default)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "yes")]
    pub write_trace: bool,
    #[serde(default)]
    pub write_mesh: bool,
    #[serde(default)]
    pub write_matrices: bool,
    #[serde(default)]
    pub aero_damping_diagnostic: bool,
}

fn default_directory() -> String {
    "output".into()
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            write_trace: true,
            write_mesh: false,
            write_matrices: false,
            aero_damping_diagnostic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub profile: Profile,
    pub plate: PlateConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    pub crack: Option<CrackConfig>,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub study: Option<StudyConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FlutterError::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(FlutterError::config(field, "must be finite"))
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| FlutterError::config("<file>", e.to_string().trim_end().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FlutterError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| FlutterError::Io(e.to_string()))
    }

    /// Copy with every default filled in, after validation.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        let p = &mut c.plate;
        positive("plate.a_m", p.a_m)?;
        p.b_m = Some(p.b_m.unwrap_or(p.a_m));
        positive("plate.b_m", p.b_m.unwrap_or_default())?;
        positive("plate.h_m", p.h_m)?;
        if !(p.gradient_index >= 0.0) || !p.gradient_index.is_finite() {
            return Err(FlutterError::config("plate.gradient_index", "must be finite and non-negative"));
        }
        p.temperature_k = Some(p.temperature_k.unwrap_or(DEFAULT_TEMPERATURE));
        positive("plate.temperature_k", p.temperature_k.unwrap_or_default())?;
        match (&p.isotropic, &p.fgm) {
            (Some(_), Some(_)) => return Err(FlutterError::config("plate", "give either an isotropic block or an fgm block, not both")),
            (None, None) => return Err(FlutterError::config("plate", "an isotropic block or an fgm block is required")),
            (Some(iso), None) => {
                positive("plate.isotropic.youngs_modulus_pa", iso.youngs_modulus_pa)?;
                positive("plate.isotropic.density_kg_m3", iso.density_kg_m3)?;
                if !(iso.poisson_ratio > 0.0 && iso.poisson_ratio < 0.5) {
                    return Err(FlutterError::config("plate.isotropic.poisson_ratio", "must lie in (0, 0.5)"));
                }
            }
            (None, Some(f)) => {
                p.fgm = Some(FgmConfig {
                    ceramic: f.ceramic.resolved("plate.fgm.ceramic")?,
                    metal: f.metal.resolved("plate.fgm.metal")?,
                });
            }
        }
        let n = c.profile.mesh_divisions();
        c.mesh.nx = Some(c.mesh.nx.unwrap_or(n));
        c.mesh.ny = Some(c.mesh.ny.unwrap_or(c.mesh.nx.unwrap_or(n)));
        if c.mesh.nx == Some(0) || c.mesh.ny == Some(0) {
            return Err(FlutterError::config("mesh", "nx and ny must be at least 1"));
        }
        c.mesh.boundary = Some(c.mesh.boundary.unwrap_or(BoundaryKind::SimplySupported));
        if let Some(cr) = &mut c.crack {
            let a = c.plate.a_m;
            let b = c.plate.b_m.unwrap_or(a);
            finite("crack.theta_degrees", cr.theta_degrees)?;
            if !(cr.d_over_a >= 0.0) || !cr.d_over_a.is_finite() {
                return Err(FlutterError::config("crack.d_over_a", "must be finite and non-negative"));
            }
            cr.cx_m = Some(cr.cx_m.unwrap_or(a / 2.0));
            cr.cy_m = Some(cr.cy_m.unwrap_or(b / 2.0));
            finite("crack.cx_m", cr.cx_m.unwrap_or_default())?;
            finite("crack.cy_m", cr.cy_m.unwrap_or_default())?;
        }
        finite("flow.theta_prime_degrees", c.flow.theta_prime_degrees)?;
        c.solver.modes = Some(c.solver.modes.unwrap_or(c.profile.modes()));
        if c.solver.modes == Some(0) {
            return Err(FlutterError::config("solver.modes", "must be at least 1"));
        }
        c.solver.sweep.validate()?;
        if let Some(study) = &c.study {
            c.study_target(&study.parameter)?;
            for v in &study.values {
                finite("study.values", *v)?;
            }
        }
        if c.output.directory.is_empty() {
            return Err(FlutterError::config("output.directory", "must not be empty"));
        }
        Ok(c)
    }

    /// Plate with its material pair (isotropic override as a homogeneous plate).
    pub fn plate(&self) -> Result<FgmPlate<f64>> {
        let p = &self.plate;
        let b = p.b_m.unwrap_or(p.a_m);
        let temperature = p.temperature_k.unwrap_or(DEFAULT_TEMPERATURE);
        let plate = match (&p.isotropic, &p.fgm) {
            (Some(iso), None) => {
                let phase = MaterialPhase::isotropic("isotropic", iso.youngs_modulus_pa, iso.poisson_ratio, iso.density_kg_m3);
                let mut plate = FgmPlate::homogeneous(p.a_m, b, p.h_m, phase)?;
                plate.temperature = temperature;
                plate
            }
            (None, Some(f)) => FgmPlate::new(
                p.a_m,
                b,
                p.h_m,
                p.gradient_index,
                f.ceramic.phase("plate.fgm.ceramic")?,
                f.metal.phase("plate.fgm.metal")?,
                temperature,
            )?,
            _ => return Err(FlutterError::config("plate", "exactly one of isotropic or fgm is required")),
        };
        Ok(plate)
    }

    /// Crack geometry in plate coordinates, or `None` when absent or of zero length.
    pub fn crack_geometry(&self) -> Option<CrackGeometry<f64>> {
        let c = self.crack.as_ref()?;
        if c.d_over_a == 0.0 {
            return None;
        }
        let a = self.plate.a_m;
        let b = self.plate.b_m.unwrap_or(a);
        Some(CrackGeometry::new(
            c.cx_m.unwrap_or(a / 2.0),
            c.cy_m.unwrap_or(b / 2.0),
            c.d_over_a * a,
            c.theta_degrees.to_radians(),
            c.kind,
        ))
    }

    pub fn mesh_divisions(&self) -> (usize, usize) {
        let n = self.profile.mesh_divisions();
        let nx = self.mesh.nx.unwrap_or(n);
        (nx, self.mesh.ny.unwrap_or(nx))
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.mesh.boundary.unwrap_or(BoundaryKind::SimplySupported)
    }

    pub fn modes(&self) -> usize {
        self.solver.modes.unwrap_or(self.profile.modes())
    }

    pub fn flow_angle(&self) -> f64 {
        self.flow.theta_prime_degrees.to_radians()
    }

    fn study_target(&self, path: &str) -> Result<toml::Value> {
        let mut probe = self.clone();
        probe.study = None;
        let root = toml::Value::try_from(&probe).map_err(|e| FlutterError::Io(e.to_string()))?;
        let mut cur = &root;
        for key in path.split('.') {
            cur = cur
                .get(key)
                .ok_or_else(|| FlutterError::config("study.parameter", format!("`{path}` does not name a configuration field")))?;
        }
        match cur {
            toml::Value::Float(_) | toml::Value::Integer(_) => Ok(cur.clone()),
            _ => Err(FlutterError::config("study.parameter", format!("`{path}` is not a numeric field"))),
        }
    }

    /// Copy with the numeric field at `path` set to `value`. Works on the
    /// resolved configuration so optional fields with defaults are reachable.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Self> {
        let mut base = self.resolved()?;
        base.study = None;
        let target = base.study_target(path)?;
        let mut root = toml::Value::try_from(&base).map_err(|e| FlutterError::Io(e.to_string()))?;
        let mut cur = &mut root;
        let keys: Vec<&str> = path.split('.').collect();
        for key in &keys[..keys.len() - 1] {
            cur = cur.get_mut(*key).expect("path checked above");
        }
        let leaf = keys[keys.len() - 1];
        let new = match target {
            toml::Value::Integer(_) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(FlutterError::config("study.values", format!("`{path}` needs non-negative integers, got {value}")));
                }
                toml::Value::Integer(value as i64)
            }
            _ => toml::Value::Float(value),
        };
        cur.as_table_mut().expect("parent is a table").insert(leaf.to_string(), new);
        let out: RunConfig = root.try_into().map_err(|e: toml::de::Error| FlutterError::config(path, e.to_string()))?;
        out.resolved()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ISO: &str = r#"
        [plate]
        a_m = 1.0
        h_m = 0.01
        [plate.isotropic]
        youngs_modulus_pa = 7.0e10
        poisson_ratio = 0.3
        density_kg_m3 = 2700.0
    "#;

    #[test]
    fn defaults_resolve_from_profile() {
        let c = RunConfig::from_toml_str(ISO).unwrap().resolved().unwrap();
        assert_eq!(c.mesh_divisions(), (34, 34));
        assert_eq!(c.modes(), 16);
        assert_eq!(c.boundary(), BoundaryKind::SimplySupported);
        assert_eq!(c.plate.b_m, Some(1.0));
        let fast = RunConfig::from_toml_str(&format!("profile = \"fast\"\n{ISO}")).unwrap().resolved().unwrap();
        assert_eq!((fast.mesh_divisions(), fast.modes()), ((20, 20), 12));
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig::from_toml_str(ISO).unwrap().resolved().unwrap();
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn both_material_blocks_are_rejected() {
        let text = format!("{ISO}\n[plate.fgm]\n");
        let err = RunConfig::from_toml_str(&text).unwrap().resolved().unwrap_err();
        assert!(matches!(err, FlutterError::Config { ref field, .. } if field == "plate"));
    }

    #[test]
    fn fgm_presets_fill_phases() {
        let text = "[plate]\na_m = 1.0\nh_m = 0.01\ngradient_index = 5\n[plate.fgm]\n";
        let c = RunConfig::from_toml_str(text).unwrap().resolved().unwrap();
        let plate = c.plate().unwrap();
        assert_eq!(plate.ceramic.name, "Si3N4");
        assert_eq!(plate.metal.rho, 8166.0);
        assert_eq!(plate.k, 5.0);
    }

    #[test]
    fn unknown_fields_and_units_are_caught() {
        assert!(RunConfig::from_toml_str(&ISO.replace("h_m", "h")).is_err());
        let bad = RunConfig::from_toml_str(&ISO.replace("h_m = 0.01", "h_m = -0.01")).unwrap().resolved().unwrap_err();
        assert!(matches!(bad, FlutterError::Config { ref field, .. } if field == "plate.h_m"));
    }

    #[test]
    fn study_parameter_paths() {
        let c = RunConfig::from_toml_str(&format!("{ISO}\n[crack]\nd_over_a = 0.5\n")).unwrap();
        let d = c.with_parameter("crack.d_over_a", 0.2).unwrap();
        assert_eq!(d.crack.unwrap().d_over_a, 0.2);
        let n = c.with_parameter("mesh.nx", 12.0).unwrap();
        assert_eq!(n.mesh.nx, Some(12));
        assert!(c.with_parameter("mesh.nx", 1.5).is_err());
        assert!(c.with_parameter("plate.nothing", 1.0).is_err());
        assert!(c.with_parameter("mesh.boundary", 1.0).is_err());
        let with_study = format!("{ISO}\n[study]\nparameter = \"plate.wrong\"\nvalues = [1.0]\n");
        assert!(RunConfig::from_toml_str(&with_study).unwrap().resolved().is_err());
    }

    #[test]
    fn crack_defaults_to_plate_centre() {
        let c = RunConfig::from_toml_str(&format!("{ISO}\n[crack]\nd_over_a = 0.5\ntheta_degrees = 90.0\n")).unwrap();
        let g = c.crack_geometry().unwrap();
        assert_eq!((g.cx, g.cy, g.d), (0.5, 0.5, 0.5));
        assert!((g.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let none = RunConfig::from_toml_str(&format!("{ISO}\n[crack]\nd_over_a = 0.0\n")).unwrap();
        assert!(none.crack_geometry().is_none());
    }
}
