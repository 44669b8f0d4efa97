//! Temperature-dependent constituents, power-law grading through the
//! thickness and the resulting plate section stiffness and inertia.

use serde::{Deserialize, Serialize};

use crate::error::{FlutterError, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

/// Number of Gauss-Legendre points used for every through-thickness integral.
pub const THICKNESS_GAUSS_POINTS: usize = 20;

/// Default reference temperature (K).
pub const DEFAULT_TEMPERATURE: f64 = 300.0;

/// Coefficients of `P(T) = P0 (P-1 / T + 1 + P1 T + P2 T^2 + P3 T^3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"))]
pub struct TemperatureCoefficients<T> {
    pub p0: T,
    #[serde(default)]
    pub p_minus1: T,
    #[serde(default)]
    pub p1: T,
    #[serde(default)]
    pub p2: T,
    #[serde(default)]
    pub p3: T,
}

impl<T: Real> TemperatureCoefficients<T> {
    /// A temperature-independent property.
    pub fn constant(value: T) -> Self {
        Self {
            p0: value,
            p_minus1: T::zero(),
            p1: T::zero(),
            p2: T::zero(),
            p3: T::zero(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus1 == T::zero() && self.p1 == T::zero() && self.p2 == T::zero() && self.p3 == T::zero()
    }

    pub fn at(&self, temperature: T) -> Result<T> {
        property_at(self, temperature)
    }
}

/// Evaluates a temperature-dependent property at `temperature` (K).
pub fn property_at<T: Real>(coeffs: &TemperatureCoefficients<T>, temperature: T) -> Result<T> {
    if !(temperature > T::zero()) {
        return Err(FlutterError::Domain(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let t = temperature;
    let poly = coeffs.p_minus1 / t + T::one() + coeffs.p1 * t + coeffs.p2 * t * t + coeffs.p3 * t * t * t;
    let value = coeffs.p0 * poly;
    if !value.is_finite() {
        return Err(FlutterError::InvalidCoefficient(format!(
            "property evaluates to {value} at T = {temperature} K"
        )));
    }
    Ok(value)
}

/// One constituent of the graded plate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"))]
pub struct MaterialPhase<T> {
    pub name: String,
    /// Young's modulus coefficients (Pa).
    pub e_coeffs: TemperatureCoefficients<T>,
    /// Thermal expansion coefficients (1/K). Stored for completeness; no
    /// implemented load case consumes them.
    pub alpha_coeffs: TemperatureCoefficients<T>,
    pub nu: T,
    /// Mass density (kg/m^3).
    pub rho: T,
}

impl<T: Real> MaterialPhase<T> {
    /// Silicon nitride with the tabulated temperature coefficients.
    pub fn silicon_nitride() -> Self {
        Self {
            name: "Si3N4".into(),
            e_coeffs: TemperatureCoefficients {
                p0: T::lit(348.43e9),
                p_minus1: T::zero(),
                p1: T::lit(-3.070e-4),
                p2: T::lit(2.160e-7),
                p3: T::lit(-8.946e-11),
            },
            alpha_coeffs: TemperatureCoefficients {
                p0: T::lit(5.8723e-6),
                p_minus1: T::zero(),
                p1: T::lit(9.095e-4),
                p2: T::zero(),
                p3: T::zero(),
            },
            nu: T::lit(0.28),
            rho: T::lit(2370.0),
        }
    }

    /// SUS304 stainless steel with the tabulated temperature coefficients.
    pub fn stainless_steel() -> Self {
        Self {
            name: "SUS304".into(),
            e_coeffs: TemperatureCoefficients {
                p0: T::lit(201.04e9),
                p_minus1: T::zero(),
                p1: T::lit(3.079e-4),
                p2: T::lit(-6.534e-7),
                p3: T::zero(),
            },
            alpha_coeffs: TemperatureCoefficients {
                p0: T::lit(12.330e-6),
                p_minus1: T::zero(),
                p1: T::lit(8.086e-4),
                p2: T::zero(),
                p3: T::zero(),
            },
            nu: T::lit(0.28),
            rho: T::lit(8166.0),
        }
    }

    /// Temperature-independent isotropic material.
    pub fn isotropic(name: impl Into<String>, youngs_modulus: T, nu: T, rho: T) -> Self {
        Self {
            name: name.into(),
            e_coeffs: TemperatureCoefficients::constant(youngs_modulus),
            alpha_coeffs: TemperatureCoefficients::constant(T::zero()),
            nu,
            rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > T::zero() && self.nu < T::half()) {
            return Err(FlutterError::Argument(format!(
                "{}: Poisson ratio {} outside (0, 0.5)",
                self.name, self.nu
            )));
        }
        if !(self.rho > T::zero()) {
            return Err(FlutterError::Argument(format!("{}: density must be positive", self.name)));
        }
        if !(self.e_coeffs.p0 > T::zero()) {
            return Err(FlutterError::InvalidCoefficient(format!(
                "{}: Young's modulus base value must be positive",
                self.name
            )));
        }
        Ok(())
    }

    pub fn youngs_modulus(&self, temperature: T) -> Result<T> {
        property_at(&self.e_coeffs, temperature)
    }
}

/// Rectangular plate graded from ceramic (top, `z = h/2`) to metal (bottom).
#[derive(Debug, Clone, PartialEq)]
pub struct FgmPlate<T> {
    pub a: T,
    pub b: T,
    pub h: T,
    /// Gradient index of the ceramic volume-fraction power law.
    pub k: T,
    pub ceramic: MaterialPhase<T>,
    pub metal: MaterialPhase<T>,
    /// Reference temperature (K).
    pub temperature: T,
}

impl<T: Real> FgmPlate<T> {
    pub fn new(a: T, b: T, h: T, k: T, ceramic: MaterialPhase<T>, metal: MaterialPhase<T>, temperature: T) -> Result<Self> {
        let plate = Self {
            a,
            b,
            h,
            k,
            ceramic,
            metal,
            temperature,
        };
        plate.validate()?;
        Ok(plate)
    }

    /// Homogeneous plate: both phases are `phase` and `k = 0`.
    pub fn homogeneous(a: T, b: T, h: T, phase: MaterialPhase<T>) -> Result<Self> {
        Self::new(a, b, h, T::zero(), phase.clone(), phase, T::lit(DEFAULT_TEMPERATURE))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("h", self.h)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(FlutterError::Argument(format!("plate dimension {name} must be positive")));
            }
        }
        if !(self.k >= T::zero() && self.k.is_finite()) {
            return Err(FlutterError::Argument(format!("gradient index must be >= 0, got {}", self.k)));
        }
        if !(self.temperature > T::zero()) {
            return Err(FlutterError::Domain("temperature must be positive".into()));
        }
        self.ceramic.validate()?;
        self.metal.validate()?;
        Ok(())
    }

    /// Bending rigidity of a homogeneous ceramic plate, the normalising scale.
    pub fn ceramic_rigidity(&self) -> Result<T> {
        let e = self.ceramic.youngs_modulus(self.temperature)?;
        let nu = self.ceramic.nu;
        Ok(e * self.h.powi(3) / (T::lit(12.0) * (T::one() - nu * nu)))
    }
}

/// Ceramic volume fraction `((2z + h) / 2h)^k`.
pub fn volume_fraction_ceramic<T: Real>(z: T, plate: &FgmPlate<T>) -> Result<T> {
    let half = plate.h * T::half();
    let slack = plate.h * T::epsilon() * T::lit(16.0);
    if !(z >= -half - slack && z <= half + slack) {
        return Err(FlutterError::Domain(format!(
            "z = {z} outside [-h/2, h/2] with h = {}",
            plate.h
        )));
    }
    let base = ((T::two() * z + plate.h) / (T::two() * plate.h)).max(T::zero()).min(T::one());
    if plate.k == T::zero() {
        return Ok(T::one());
    }
    Ok(base.powf(plate.k))
}

/// Effective properties at a point through the thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveProperties<T> {
    pub e: T,
    pub nu: T,
    pub rho: T,
}

/// Rule-of-mixtures properties at height `z`.
pub fn effective_properties<T: Real>(z: T, plate: &FgmPlate<T>) -> Result<EffectiveProperties<T>> {
    let vc = volume_fraction_ceramic(z, plate)?;
    let vm = T::one() - vc;
    let ec = plate.ceramic.youngs_modulus(plate.temperature)?;
    let em = plate.metal.youngs_modulus(plate.temperature)?;
    Ok(EffectiveProperties {
        e: ec * vc + em * vm,
        nu: plate.ceramic.nu * vc + plate.metal.nu * vm,
        rho: plate.ceramic.rho * vc + plate.metal.rho * vm,
    })
}

/// How the transverse shear correction factor is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShearCorrectionMode {
    /// The classical 5/6.
    #[default]
    Constant,
    /// Shear energy of the constant FSDT strain equated with that of the
    /// equilibrium shear stress profile of the graded section.
    EnergyEquivalence,
}

/// Shear correction factor for the plate section.
pub fn shear_correction<T: Real>(plate: &FgmPlate<T>, mode: ShearCorrectionMode) -> Result<T> {
    match mode {
        ShearCorrectionMode::Constant => Ok(T::lit(5.0 / 6.0)),
        ShearCorrectionMode::EnergyEquivalence => energy_equivalent_shear_correction(plate),
    }
}

fn energy_equivalent_shear_correction<T: Real>(plate: &FgmPlate<T>) -> Result<T> {
    let rule = gauss_legendre::<T>(THICKNESS_GAUSS_POINTS);
    let half = plate.h * T::half();
    let reduced = |z: T| -> Result<(T, T)> {
        let p = effective_properties(z, plate)?;
        Ok((p.e / (T::one() - p.nu * p.nu), p.e / (T::two() * (T::one() + p.nu))))
    };

    // Neutral surface and bending stiffness about it.
    let mut s0 = T::zero();
    let mut s1 = T::zero();
    let mut shear_sum = T::zero();
    for &(x, w) in &rule {
        let z = half * x;
        let (es, g) = reduced(z)?;
        s0 += w * half * es;
        s1 += w * half * es * z;
        shear_sum += w * half * g;
    }
    let z0 = s1 / s0;
    let mut d_eff = T::zero();
    for &(x, w) in &rule {
        let z = half * x;
        let (es, _) = reduced(z)?;
        d_eff += w * half * es * (z - z0) * (z - z0);
    }

    // First moment of the stiffness below each height drives the shear flow.
    let mut energy = T::zero();
    for &(x, w) in &rule {
        let z = half * x;
        let (_, g_z) = reduced(z)?;
        let lower = -half;
        let span = (z - lower) * T::half();
        let mut first_moment = T::zero();
        for &(y, wy) in &rule {
            let zeta = lower + span * (y + T::one());
            let (es, _) = reduced(zeta)?;
            first_moment += wy * span * es * (zeta - z0);
        }
        energy += w * half * first_moment * first_moment / g_z;
    }
    let kappa = d_eff * d_eff / (shear_sum * energy);
    if !(kappa.is_finite() && kappa > T::zero()) {
        return Err(FlutterError::Integration(format!("shear correction evaluated to {kappa}")));
    }
    Ok(kappa.min(T::one()))
}

/// Through-thickness resultant stiffness and inertia of the plate section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionProperties<T> {
    /// Extensional stiffness (N/m).
    pub a: [[T; 3]; 3],
    /// Bending-extensional coupling (N).
    pub b: [[T; 3]; 3],
    /// Bending stiffness (N m).
    pub db: [[T; 3]; 3],
    /// Transverse shear stiffness including the correction factor (N/m).
    pub es: [[T; 2]; 2],
    /// Translational inertia (kg/m^2).
    pub i0: T,
    /// Rotary inertia (kg).
    pub i1: T,
    pub kappa: T,
}

/// Integrates the plane-stress stiffness and density through the thickness.
pub fn section_properties<T: Real>(plate: &FgmPlate<T>, mode: ShearCorrectionMode) -> Result<SectionProperties<T>> {
    plate.validate()?;
    let kappa = shear_correction(plate, mode)?;
    let rule = gauss_legendre::<T>(THICKNESS_GAUSS_POINTS);
    let half = plate.h * T::half();
    let zero3 = [[T::zero(); 3]; 3];
    let mut a = zero3;
    let mut b = zero3;
    let mut db = zero3;
    let mut g_int = T::zero();
    let mut i0 = T::zero();
    let mut i1 = T::zero();
    for &(x, w) in &rule {
        let z = half * x;
        let wz = w * half;
        let p = effective_properties(z, plate)?;
        let q = plane_stress(p.e, p.nu);
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += wz * q[r][c];
                b[r][c] += wz * z * q[r][c];
                db[r][c] += wz * z * z * q[r][c];
            }
        }
        g_int += wz * p.e / (T::two() * (T::one() + p.nu));
        i0 += wz * p.rho;
        i1 += wz * z * z * p.rho;
    }
    let es = [[kappa * g_int, T::zero()], [T::zero(), kappa * g_int]];
    let props = SectionProperties {
        a,
        b,
        db,
        es,
        i0,
        i1,
        kappa,
    };
    if !(props.i0 > T::zero() && props.i1 > T::zero() && props.a[0][0].is_finite()) {
        return Err(FlutterError::Integration("non-positive section inertia".into()));
    }
    Ok(props)
}

/// Plane-stress reduced stiffness of an isotropic layer.
pub fn plane_stress<T: Real>(e: T, nu: T) -> [[T; 3]; 3] {
    let f = e / (T::one() - nu * nu);
    [
        [f, f * nu, T::zero()],
        [f * nu, f, T::zero()],
        [T::zero(), T::zero(), f * (T::one() - nu) * T::half()],
    ]
}
