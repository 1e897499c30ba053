//! First-order response of the regularized energy to a weak dielectric
//! δε(x) = α sin(πx/L).
//!
//! All quantities are per unit α. For a side of length s:
//! C = L(1 − cos(πs/L))/(πs) is the mean of sin(πx/L) over that side,
//! r = 2mL/s, g = r²/(1 − r²), h = 1/(1 − r²) and p = mπ/s.

use std::f64::consts::PI;

use serde::Serialize;
use twofloat::TwoFloat;

use crate::asymptotics::LaurentCoefficients;
use crate::error::{PistonError, Result};
use crate::ideal_piston::{check_term_budget, mode_cutoff, precise_side_lengths, EnergyPerArea, SumOptions};
use crate::model::{
    intensity_at, omega0, DielectricProfile, Mode, PistonGeometry, Polarization, Regulator, Side,
};
use crate::precise::{div, exp_m1, to_f64};
use crate::quadrature::{integrate, integrate_piecewise, Tolerance};
use crate::specfun::{
    digamma, exp_cosech_derivatives, exp_cosech_derivatives_precise, lerch_phi, LerchArgs,
    EULER_GAMMA,
};
use crate::summation::CompensatedSum;
use crate::Method;

const SHIFT_TOLERANCE: f64 = 1e-10;
const INTEGRAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftResult {
    pub mode: Mode,
    pub omega0: f64,
    pub omega1: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralResult {
    pub side: Side,
    pub m: u32,
    pub lambda: u8,
    pub xi: f64,
    pub value: f64,
    pub method: Method,
}

/// Mean of sin(πx/L) over the side: L(1 − cos(πs/L))/(πs).
pub fn side_mean(geometry: &PistonGeometry, side: Side) -> f64 {
    let l = geometry.length();
    let s = geometry.side_length(side);
    l * (1.0 - (PI * s / l).cos()) / (PI * s)
}

struct SideFactors {
    c: f64,
    g: f64,
    h: f64,
    p: f64,
}

fn factors(geometry: &PistonGeometry, side: Side, m: u32) -> SideFactors {
    let s = geometry.side_length(side);
    let r = 2.0 * m as f64 * geometry.length() / s;
    // r > 2 for m ≥ 1 since s < L, so 1 − r² never vanishes
    let h = 1.0 / (1.0 - r * r);
    SideFactors {
        c: side_mean(geometry, side),
        g: r * r * h,
        h,
        p: m as f64 * PI / s,
    }
}

/// ω⁽¹⁾/ω⁽⁰⁾ from the closed expressions, per unit α.
fn relative_shift(f: &SideFactors, k_par: f64, polarization: Polarization) -> f64 {
    match polarization {
        Polarization::Te => 0.5 * f.c * f.g,
        Polarization::Tm => {
            let (p2, k2) = (f.p * f.p, k_par * k_par);
            let ratio = if f.p == 0.0 { -1.0 } else { (p2 - k2) / (p2 + k2) };
            -0.5 * f.c * (1.0 - ratio * f.h)
        }
    }
}

/// −½ ω⁽⁰⁾ ∫ |E⁽⁰⁾|² δε dx over the mode's side, by adaptive quadrature.
pub fn first_order_shift_quadrature(
    geometry: &PistonGeometry,
    mode: &Mode,
    profile: &DielectricProfile,
) -> Result<ShiftResult> {
    profile.validate(geometry)?;
    let (x0, x1) = geometry.side_interval(mode.side());
    let w0 = omega0(geometry, mode);
    let integrand = |x: f64| intensity_at(geometry, mode, x - x0) * profile.delta_eps(geometry, x);
    let scale = profile.max_abs();
    let tol = Tolerance::relative(SHIFT_TOLERANCE).with_absolute(1e-15 * scale);
    let overlap = integrate_piecewise(integrand, &profile.breakpoints(x0, x1), tol)?;
    Ok(ShiftResult {
        mode: *mode,
        omega0: w0,
        omega1: -0.5 * w0 * overlap.value,
        method: Method::Quadrature,
    })
}

/// The closed per-mode shifts for δε = α sin(πx/L), taken literally.
///
/// At m = 0 the λ = 2 expression gives −ω⁽⁰⁾C, twice the value obtained
/// from the normalized uniform mode; see [`zero_mode_report`].
pub fn first_order_shift_closed(geometry: &PistonGeometry, mode: &Mode, alpha: f64) -> ShiftResult {
    let f = factors(geometry, mode.side(), mode.m());
    let w0 = omega0(geometry, mode);
    ShiftResult {
        mode: *mode,
        omega0: w0,
        omega1: alpha * w0 * relative_shift(&f, mode.k_par(), mode.polarization()),
        method: Method::Closed,
    }
}

/// ∫_{p}^∞ u² e^{−ξu} du.
fn shell(p: f64, xi: f64) -> f64 {
    (-xi * p).exp() * (p * p / xi + 2.0 * p / (xi * xi) + 2.0 / (xi * xi * xi))
}

/// ∫₀^∞ k ω⁽¹⁾(k) e^{−ξω⁽⁰⁾(k)} dk evaluated by quadrature of the closed shift.
pub fn appendix_integral_quadrature(
    geometry: &PistonGeometry,
    side: Side,
    m: u32,
    polarization: Polarization,
    regulator: &Regulator,
) -> Result<IntegralResult> {
    Mode::new(side, m, 0.0, polarization)?;
    let xi = regulator.xi();
    let f = factors(geometry, side, m);
    let integrand = |k: f64| {
        let w0 = f.p.hypot(k);
        k * w0 * relative_shift(&f, k, polarization) * (-xi * w0).exp()
    };
    // |ω⁽¹⁾| ≤ bound·ω⁽⁰⁾ since both bracket factors are bounded
    let bound = f.c.abs() * (1.0 + f.g.abs() + f.h.abs());
    let tol = Tolerance::relative(INTEGRAL_TOLERANCE);
    let chunk = 8.0 / xi;
    let mut total = CompensatedSum::new();
    let mut lo = 0.0;
    loop {
        let hi = lo + chunk;
        let part = integrate(integrand, lo, hi, tol.with_absolute(1e-3 * INTEGRAL_TOLERANCE * total.value().abs()))?;
        total.add(part.value);
        lo = hi;
        let tail = bound * shell(f.p.hypot(lo), xi);
        if tail <= INTEGRAL_TOLERANCE * total.value().abs() {
            break;
        }
        if lo > 1e4 * chunk {
            return Err(PistonError::Quadrature {
                message: "tail bound never fell below tolerance".into(),
                trace: vec![format!("cutoff {lo:e}, tail bound {tail:e}, total {:e}", total.value())],
            });
        }
    }
    Ok(IntegralResult {
        side,
        m,
        lambda: polarization.lambda(),
        xi,
        value: total.value(),
        method: Method::Quadrature,
    })
}

fn integral_closed_value(f: &SideFactors, polarization: Polarization, xi: f64) -> f64 {
    let e = (-xi * f.p).exp();
    let (x2, x3) = (xi * xi, xi * xi * xi);
    match polarization {
        Polarization::Te => f.c * f.g * e * (1.0 / x3 + f.p / x2 + f.p * f.p / (2.0 * xi)),
        Polarization::Tm => {
            f.c * e * ((f.h + 1.0) * (-f.p / x2 - 1.0 / x3) + f.g * f.p * f.p / (2.0 * xi))
        }
    }
}

/// The k∥-integrated shifts in closed form, per unit α.
pub fn appendix_integral_closed(
    geometry: &PistonGeometry,
    side: Side,
    m: u32,
    polarization: Polarization,
    regulator: &Regulator,
) -> Result<IntegralResult> {
    Mode::new(side, m, 0.0, polarization)?;
    let xi = regulator.xi();
    let f = factors(geometry, side, m);
    Ok(IntegralResult {
        side,
        m,
        lambda: polarization.lambda(),
        xi,
        value: integral_closed_value(&f, polarization, xi),
        method: Method::Closed,
    })
}

/// (1/4π) Σ_{side, m, λ} of the closed integrals, m up to the double
/// precision tail cutoff.
pub fn denergy_dalpha_sum(
    geometry: &PistonGeometry,
    regulator: &Regulator,
    options: SumOptions,
) -> Result<EnergyPerArea> {
    let xi = regulator.xi();
    check_term_budget(geometry, xi, options.max_terms)?;
    let mut total = CompensatedSum::new();
    for side in Side::BOTH {
        let m_max = mode_cutoff(geometry.side_length(side), xi) as u32;
        let zero = factors(geometry, side, 0);
        total.add(options.zero_mode_weight * integral_closed_value(&zero, Polarization::Tm, xi));
        for m in 1..=m_max {
            let f = factors(geometry, side, m);
            total.add(integral_closed_value(&f, Polarization::Te, xi));
            total.add(integral_closed_value(&f, Polarization::Tm, xi));
        }
    }
    Ok(EnergyPerArea {
        value: total.value() / (4.0 * PI),
        method: Method::Sum,
        xi,
        warning: None,
    })
}

/// One side of the closed form:
/// C/(4π){f₁/ξ² − f₀/ξ³ − f₂/(2ξ) + (s/(4Lξ)) ∂²_ξ[Φ(z,1,v) − Φ(z,1,−v)]},
/// z = e^{−πξ/s}, v = s/(2L), f_d = k^d f^{(d)}(kξ), k = π/(2s).
pub fn side_denergy_closed(geometry: &PistonGeometry, side: Side, xi: f64) -> Result<f64> {
    let l = geometry.length();
    let s = geometry.side_length(side);
    let k = PI / (2.0 * s);
    let [f0, f1, f2] = exp_cosech_derivatives(k * xi)?;
    let kernel = k * f1 / (xi * xi) - f0 / (xi * xi * xi) - k * k * f2 / (2.0 * xi);
    let t = PI * xi / s;
    let v = s / (2.0 * l);
    let one_minus_z = -(-t).exp_m1();
    let dphi = lerch_phi(LerchArgs::from_log(t, v)?) - lerch_phi(LerchArgs::from_log(t, -v)?);
    // ∂²_ξ Σ zᵐ/(m ± v) = (π/s)² Σ m² zᵐ/(m ± v); the difference of the two
    // second moments is −2v/(1 − z) + v²ΔΦ
    let second = (PI / s).powi(2) * (-2.0 * v / one_minus_z + v * v * dphi);
    let c = side_mean(geometry, side);
    Ok(c / (4.0 * PI) * (kernel + s / (4.0 * l * xi) * second))
}

/// (1/ξ) ∂²_ξ[Φ(z,1,v) − Φ(z,1,−v)] with z = e^{−πξ/s}, exactly.
pub fn lerch_combination(s: f64, v: f64, xi: f64) -> Result<f64> {
    let t = PI * xi / s;
    let one_minus_z = -(-t).exp_m1();
    let dphi = lerch_phi(LerchArgs::from_log(t, v)?) - lerch_phi(LerchArgs::from_log(t, -v)?);
    Ok((PI / s).powi(2) * (-2.0 * v / one_minus_z + v * v * dphi) / xi)
}

/// Small-ξ form of [`lerch_combination`] with positive powers of ξ dropped.
pub fn lerch_combination_asymptotic(s: f64, v: f64, xi: f64) -> Result<f64> {
    let (psi_p, psi_m) = (digamma(v)?, digamma(-v)?);
    let q = PI / s;
    Ok(-2.0 * PI * v / (s * xi * xi)
        - 2.0 * (q * v).powi(3) * (xi * q).ln()
        - PI * PI * v / (s * s * xi) * (1.0 + v * (psi_p - psi_m))
        - q.powi(3) * v * (v * v * (2.0 * (EULER_GAMMA - 1.0) + psi_p + psi_m) + 1.0 / 6.0))
}

pub fn denergy_dalpha_closed(geometry: &PistonGeometry, regulator: &Regulator) -> Result<EnergyPerArea> {
    let xi = regulator.xi();
    let mut value = 0.0;
    for side in Side::BOTH {
        value += side_denergy_closed(geometry, side, xi)?;
    }
    Ok(EnergyPerArea {
        value,
        method: Method::Closed,
        xi,
        warning: None,
    })
}

/// The braces of [`side_denergy_closed`] (everything but C/(4π)) in
/// double-double.
pub fn side_denergy_bracket_precise(geometry: &PistonGeometry, side: Side, xi: f64) -> Result<TwoFloat> {
    let l = geometry.length();
    let pi = twofloat::consts::PI;
    let x = TwoFloat::from(xi);
    let s = precise_side_lengths(geometry)[match side {
        Side::Left => 0,
        Side::Right => 1,
    }];
    let k = div(pi, s * 2.0);
    let [f0, f1, f2] = exp_cosech_derivatives_precise(k * x)?;
    let x2 = x * x;
    let kernel = div(k * f1, x2) - div(f0, x2 * x) - div(k * k * f2, x * 2.0);
    let t = div(pi * x, s);
    let v = s / (2.0 * l);
    let one_minus_z = -exp_m1(-t);
    let (tf, vf) = (to_f64(t), to_f64(v));
    // this difference enters at order 1/ξ, so double precision suffices
    let dphi = lerch_phi(LerchArgs::from_log(tf, vf)?) - lerch_phi(LerchArgs::from_log(tf, -vf)?);
    let bracket = div(v * -2.0, one_minus_z) + v * v * dphi;
    let ratio = div(pi, s);
    let lerch_part = div(s * ratio * ratio * bracket, x * (4.0 * l));
    Ok(kernel + lerch_part)
}

/// [`denergy_dalpha_closed`] with the terms that dominate at small ξ carried
/// in double-double.
pub fn denergy_dalpha_closed_precise(geometry: &PistonGeometry, xi: f64) -> Result<TwoFloat> {
    let mut total = TwoFloat::from(0.0);
    for side in Side::BOTH {
        let c = side_mean(geometry, side);
        total += side_denergy_bracket_precise(geometry, side, xi)? * (c / (4.0 * PI));
    }
    Ok(total)
}

/// Small-ξ coefficients of one side's contribution, log term in ln ξ.
pub fn asymptotic_coefficients_side(geometry: &PistonGeometry, side: Side) -> Result<LaurentCoefficients> {
    let l = geometry.length();
    let s = geometry.side_length(side);
    let v = s / (2.0 * l);
    let pref = (1.0 - (PI * s / l).cos()) / (4.0 * PI * PI);
    let (psi_p, psi_m) = (digamma(v)?, digamma(-v)?);
    let pi3 = PI.powi(3);
    let log = -pi3 / (16.0 * l.powi(3));
    let constant = log * (PI / s).ln()
        - pi3 / (8.0 * s * s * l) * (v * v * (2.0 * (EULER_GAMMA - 1.0) + psi_p + psi_m) + 1.0 / 6.0)
        + l * pi3 / (360.0 * s.powi(4));
    let mut c = LaurentCoefficients::default();
    c.set(-4, pref * (-6.0 * l / PI));
    c.set(-3, pref * (-l / s));
    c.set(-2, pref * (-PI / (4.0 * l)));
    c.set(-1, pref * (-PI * PI / (8.0 * s * l)) * (1.0 + v * (psi_p - psi_m)));
    c.set(0, pref * constant);
    c.log = pref * log;
    Ok(c)
}

pub fn asymptotic_coefficients(geometry: &PistonGeometry) -> Result<LaurentCoefficients> {
    let mut total = LaurentCoefficients::default();
    for side in Side::BOTH {
        total = total.add(&asymptotic_coefficients_side(geometry, side)?);
    }
    Ok(total)
}

pub fn denergy_dalpha_asymptotic(geometry: &PistonGeometry, regulator: &Regulator) -> Result<EnergyPerArea> {
    let xi = regulator.xi();
    let value = asymptotic_coefficients(geometry)?.evaluate(xi);
    let shortest = geometry
        .side_length(Side::Left)
        .min(geometry.side_length(Side::Right));
    let warning = (xi / shortest >= 0.1).then(|| {
        format!(
            "xi / min(a, L - a) = {:.3} is not small; the expansion is unreliable",
            xi / shortest
        )
    });
    Ok(EnergyPerArea {
        value,
        method: Method::Asymptotic,
        xi,
        warning,
    })
}

/// The m = 0, λ = 2 term of the sums on one side: the literal closed
/// expression against the value from the normalized uniform mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroModeSide {
    pub side: Side,
    pub shift_literal_over_omega0: f64,
    pub shift_normalized_over_omega0: f64,
    pub energy_literal: f64,
    pub energy_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroModeReport {
    pub xi: f64,
    pub sides: Vec<ZeroModeSide>,
    /// Literal minus normalized contribution to dE/dα, both sides.
    pub energy_difference: f64,
    /// The same difference written as c/ξ³.
    pub inverse_cubic_difference: f64,
}

/// Compares the literal m = 0 shift with the quadrature of the normalized
/// mode and reports the resulting change in dE/dα.
pub fn zero_mode_report(geometry: &PistonGeometry, regulator: &Regulator) -> Result<ZeroModeReport> {
    let xi = regulator.xi();
    let profile = DielectricProfile::sinusoidal(1.0)?;
    let mut sides = Vec::new();
    let mut difference = 0.0;
    for side in Side::BOTH {
        let mode = Mode::new(side, 0, 1.0, Polarization::Tm)?;
        let literal = first_order_shift_closed(geometry, &mode, 1.0);
        let normalized = first_order_shift_quadrature(geometry, &mode, &profile)?;
        let ratio_lit = literal.omega1 / literal.omega0;
        let ratio_norm = normalized.omega1 / normalized.omega0;
        // k∫k ω e^{−ξω} dk over m = 0 is 2/ξ³
        let energy_literal = ratio_lit * 2.0 / xi.powi(3) / (4.0 * PI);
        let energy_normalized = ratio_norm * 2.0 / xi.powi(3) / (4.0 * PI);
        difference += energy_literal - energy_normalized;
        sides.push(ZeroModeSide {
            side,
            shift_literal_over_omega0: ratio_lit,
            shift_normalized_over_omega0: ratio_norm,
            energy_literal,
            energy_normalized,
        });
    }
    Ok(ZeroModeReport {
        xi,
        sides,
        energy_difference: difference,
        inverse_cubic_difference: difference * xi.powi(3),
    })
}
