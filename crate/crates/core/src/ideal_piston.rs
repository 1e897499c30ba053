//! Regularized vacuum energy of the empty piston.
//!
//! Per side of length s the energy per unit area is
//! (1/2π) Σ_m ∫ k dk ω e^{−ξω} with ω = √((mπ/s)² + k²), m ≥ 0.

use std::f64::consts::PI;

use serde::Serialize;
use twofloat::TwoFloat;

use crate::asymptotics::LaurentCoefficients;
use crate::error::{PistonError, Result};
use crate::model::{PistonGeometry, Regulator, Side};
use crate::precise::div;
use crate::specfun::{exp_cosech_derivatives, exp_cosech_derivatives_precise};
use crate::summation::CompensatedSum;
use crate::Method;

/// e^{−37} ≈ 10⁻¹⁶: modes beyond m = 37s/(πξ) are below double resolution.
pub const TAIL_EXPONENT: f64 = 37.0;
pub const DEFAULT_MAX_TERMS: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyPerArea {
    pub value: f64,
    pub method: Method,
    pub xi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumOptions {
    pub max_terms: u64,
    /// Weight of the m = 0 term on each side.
    pub zero_mode_weight: f64,
}

impl Default for SumOptions {
    fn default() -> Self {
        Self {
            max_terms: DEFAULT_MAX_TERMS,
            zero_mode_weight: 1.0,
        }
    }
}

/// Last mode index kept by the direct sums on a side of length `s`.
pub fn mode_cutoff(s: f64, xi: f64) -> f64 {
    (TAIL_EXPONENT * s / (PI * xi)).ceil()
}

pub(crate) fn check_term_budget(geometry: &PistonGeometry, xi: f64, max_terms: u64) -> Result<u64> {
    let total: f64 = Side::BOTH
        .iter()
        .map(|&side| mode_cutoff(geometry.side_length(side), xi) + 1.0)
        .sum();
    if total > max_terms as f64 {
        return Err(PistonError::Resource(format!(
            "xi = {xi:e} needs {total:.3e} mode terms (cap {max_terms}); use the closed form"
        )));
    }
    Ok(total as u64)
}

/// ∫_{u0}^∞ u² e^{−ξu} du.
fn shell_integral(u0: f64, xi: f64) -> f64 {
    (-xi * u0).exp() * (u0 * u0 / xi + 2.0 * u0 / (xi * xi) + 2.0 / (xi * xi * xi))
}

/// Direct mode sum with the transverse integral done exactly.
pub fn energy_numeric(
    geometry: &PistonGeometry,
    regulator: &Regulator,
    options: SumOptions,
) -> Result<EnergyPerArea> {
    let xi = regulator.xi();
    check_term_budget(geometry, xi, options.max_terms)?;
    let mut total = CompensatedSum::new();
    for side in Side::BOTH {
        let s = geometry.side_length(side);
        let m_max = mode_cutoff(s, xi) as u64;
        total.add(options.zero_mode_weight * shell_integral(0.0, xi));
        for m in 1..=m_max {
            total.add(shell_integral(m as f64 * PI / s, xi));
        }
    }
    Ok(EnergyPerArea {
        value: total.value() / (2.0 * PI),
        method: Method::Numeric,
        xi,
        warning: None,
    })
}

/// One side of the closed form: (1/2π)[f/ξ³ − k f'/ξ² + k² f''/(2ξ)],
/// f(u) = eᵘ cosech u at u = kξ, k = π/(2s).
pub fn side_energy_closed(s: f64, xi: f64) -> Result<f64> {
    let k = PI / (2.0 * s);
    let [f0, f1, f2] = exp_cosech_derivatives(k * xi)?;
    let bracket = f0 / (xi * xi * xi) - k * f1 / (xi * xi) + k * k * f2 / (2.0 * xi);
    Ok(bracket / (2.0 * PI))
}

pub fn energy_closed(geometry: &PistonGeometry, regulator: &Regulator) -> Result<EnergyPerArea> {
    let xi = regulator.xi();
    let mut value = 0.0;
    for side in Side::BOTH {
        value += side_energy_closed(geometry.side_length(side), xi)?;
    }
    Ok(EnergyPerArea {
        value,
        method: Method::Closed,
        xi,
        warning: None,
    })
}

/// The closed form carried in double-double, for coefficient fits whose
/// dynamic range exceeds double precision.
pub fn energy_closed_precise(geometry: &PistonGeometry, xi: f64) -> Result<TwoFloat> {
    let mut total = TwoFloat::from(0.0);
    let x = TwoFloat::from(xi);
    for s in precise_side_lengths(geometry) {
        let k = div(twofloat::consts::PI, s * 2.0);
        let [f0, f1, f2] = exp_cosech_derivatives_precise(k * x)?;
        let x2 = x * x;
        let bracket = div(f0, x2 * x) - div(k * f1, x2) + div(k * k * f2, x * 2.0);
        total += bracket;
    }
    Ok(div(total, twofloat::consts::PI * 2.0))
}

/// a and L − a, the latter without rounding so that the two sides still
/// add up to L exactly.
pub(crate) fn precise_side_lengths(geometry: &PistonGeometry) -> [TwoFloat; 2] {
    let a = TwoFloat::from(geometry.position());
    [a, TwoFloat::from(geometry.length()) - a]
}

/// Laurent coefficients of the small-ξ energy: ξ⁻⁴, ξ⁻³ and ξ⁰.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdealCoefficients {
    pub inverse_quartic: f64,
    pub inverse_cubic: f64,
    pub constant: f64,
}

impl IdealCoefficients {
    pub fn to_laurent(&self) -> LaurentCoefficients {
        let mut c = LaurentCoefficients::default();
        c.set(-4, self.inverse_quartic);
        c.set(-3, self.inverse_cubic);
        c.set(0, self.constant);
        c
    }
}

pub fn asymptotic_coefficients(geometry: &PistonGeometry) -> IdealCoefficients {
    let l = geometry.length();
    let a = geometry.side_length(Side::Left);
    let b = geometry.side_length(Side::Right);
    IdealCoefficients {
        inverse_quartic: 3.0 * l / (PI * PI),
        inverse_cubic: 1.0 / PI,
        constant: -PI * PI / 720.0 * (a.powi(-3) + b.powi(-3)),
    }
}

/// Small-ξ form 3L/(π²ξ⁴) + 1/(πξ³) − π²/720 (a⁻³ + (L−a)⁻³).
pub fn energy_asymptotic(geometry: &PistonGeometry, regulator: &Regulator) -> EnergyPerArea {
    let xi = regulator.xi();
    let c = asymptotic_coefficients(geometry);
    let value = c.inverse_quartic / xi.powi(4) + c.inverse_cubic / xi.powi(3) + c.constant;
    let shortest = geometry
        .side_length(Side::Left)
        .min(geometry.side_length(Side::Right));
    let warning = (xi / shortest >= 0.5).then(|| {
        format!(
            "xi / min(a, L - a) = {:.3} is not small; the expansion is unreliable",
            xi / shortest
        )
    });
    EnergyPerArea {
        value,
        method: Method::Asymptotic,
        xi,
        warning,
    }
}

/// Casimir pressure π²/240 ((L−a)⁻⁴ − a⁻⁴); positive pushes toward larger a.
pub fn force_per_area(geometry: &PistonGeometry) -> f64 {
    let a = geometry.side_length(Side::Left);
    let b = geometry.side_length(Side::Right);
    PI * PI / 240.0 * (b.powi(-4) - a.powi(-4))
}

/// (ω/ξ + 1/ξ²) e^{−ξω}, whose k-derivative is −k e^{−ξω}.
pub fn cutoff_antiderivative(m: u32, s: f64, xi: f64, k_par: f64) -> f64 {
    let omega = (m as f64 * PI / s).hypot(k_par);
    (omega / xi + 1.0 / (xi * xi)) * (-xi * omega).exp()
}
