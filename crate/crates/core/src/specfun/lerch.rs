use crate::error::{domain, Result};
use crate::summation::CompensatedSum;

use super::bernoulli::{bernoulli_poly, MAX_ORDER};
use super::digamma::{digamma, EULER_GAMMA};

/// Below this value of t = −ln z the small-t expansion replaces summation.
const SWITCH_T: f64 = 1.000_500_333_583_533_5e-3; // −ln(0.999)
const MAX_SMALL_XI_ORDER: usize = 25;

/// Arguments of Φ(z, 1, v) = Σ_{m≥0} zᵐ/(m + v).
///
/// `z` is kept as t = −ln z so that values close to 1 lose no digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LerchArgs {
    t: f64,
    v: f64,
}

fn check_v(function: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(domain(function, format!("non-finite v = {v}")));
    }
    if v <= 0.0 && v == v.floor() {
        return Err(domain(function, format!("v = {v} is a non-positive integer")));
    }
    Ok(())
}

impl LerchArgs {
    pub fn new(z: f64, v: f64) -> Result<Self> {
        if !(z > 0.0 && z < 1.0) {
            return Err(domain("lerch_phi", format!("z = {z} outside (0, 1)")));
        }
        Self::from_log(-(z - 1.0).ln_1p(), v)
    }

    /// Builds the arguments from t with z = e^{−t}.
    pub fn from_log(t: f64, v: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(domain("lerch_phi", format!("t = {t} must be positive")));
        }
        check_v("lerch_phi", v)?;
        Ok(Self { t, v })
    }

    pub fn z(&self) -> f64 {
        (-self.t).exp()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

/// Φ(z, 1, v).
pub fn lerch_phi(args: LerchArgs) -> f64 {
    if args.t < SWITCH_T {
        if let Some(value) = small_t_expansion(args.t, args.v, 1e-17) {
            return value;
        }
    }
    direct_sum(args.t, args.v)
}

/// Σ_{m≥0} m² zᵐ/(m + v), from m²/(m+v) = m − v + v²/(m+v).
pub fn lerch_second_moment(args: LerchArgs) -> f64 {
    let z = args.z();
    let one_minus_z = -(-args.t).exp_m1();
    let v = args.v;
    z / (one_minus_z * one_minus_z) - v / one_minus_z + v * v * lerch_phi(args)
}

fn direct_sum(t: f64, v: f64) -> f64 {
    let one_minus_z = -(-t).exp_m1();
    let mut sum = CompensatedSum::new();
    let mut m = 0u64;
    loop {
        let mf = m as f64;
        let weight = (-t * mf).exp();
        sum.add(weight / (mf + v));
        m += 1;
        let next = m as f64 + v;
        if next > 0.0 {
            let tail = (-t * m as f64).exp() / (next * one_minus_z);
            if tail < 1e-17 * sum.value().abs().max(1.0) {
                break;
            }
        }
    }
    sum.value()
}

/// e^{tv}(−ln t − γ − ψ(v) − Σₙ (−1)ⁿ Bₙ(v) tⁿ/(n·n!)), summed until the
/// terms fall below `tol` relative to the bracket. `None` if the table
/// runs out first.
fn small_t_expansion(t: f64, v: f64, tol: f64) -> Option<f64> {
    let psi = digamma(v).ok()?;
    let mut bracket = -t.ln() - EULER_GAMMA - psi;
    let mut power = 1.0; // tⁿ/n!
    for n in 1..=MAX_ORDER {
        power *= t / n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * bernoulli_poly(n, v).ok()? * power / n as f64;
        bracket -= term;
        if term.abs() < tol * bracket.abs().max(1.0) {
            return Some((t * v).exp() * bracket);
        }
    }
    None
}

/// Φ(e^{−πξ/s}, 1, v) from the small-ξ expansion truncated after the
/// Bernoulli term of degree `order + 1`.
pub fn lerch_small_xi(v: f64, s: f64, xi: f64, order: usize) -> Result<f64> {
    check_v("lerch_small_xi", v)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain("lerch_small_xi", format!("length s = {s} must be positive")));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(domain("lerch_small_xi", format!("xi = {xi} must be positive")));
    }
    if order > MAX_SMALL_XI_ORDER {
        return Err(domain(
            "lerch_small_xi",
            format!("order {order} exceeds {MAX_SMALL_XI_ORDER}"),
        ));
    }
    let t = std::f64::consts::PI * xi / s;
    let mut bracket = -t.ln() - EULER_GAMMA - digamma(v)?;
    let mut power = 1.0;
    for n in 1..=order + 1 {
        power *= t / n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        bracket -= sign * bernoulli_poly(n, v)? * power / n as f64;
    }
    Ok((t * v).exp() * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(z: f64, v: f64, terms: u64) -> f64 {
        let mut s = CompensatedSum::new();
        let mut zm = 1.0;
        for m in 0..terms {
            s.add(zm / (m as f64 + v));
            zm *= z;
        }
        s.value()
    }

    #[test]
    fn unit_v_is_a_logarithm() {
        for &z in &[0.1, 0.5, 0.9, 0.99] {
            let got = lerch_phi(LerchArgs::new(z, 1.0).unwrap());
            let want = -(1.0f64 - z).ln() / z;
            assert!((got - want).abs() < 1e-12, "z={z}");
        }
        let got = lerch_phi(LerchArgs::new(0.5, 1.0).unwrap());
        assert!((got - 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn partial_sum_oracle() {
        let z = (-0.1f64).exp();
        let got = lerch_phi(LerchArgs::new(z, 0.25).unwrap());
        // the truncated tail z^M/((M+v)(1−z)) underflows at M = 10⁶
        assert!((got - brute(z, 0.25, 1_000_000)).abs() < 1e-12);
    }

    #[test]
    fn shift_recurrence_example() {
        let (z, v) = (0.3, 0.7);
        let d = lerch_phi(LerchArgs::new(z, v).unwrap())
            - z * lerch_phi(LerchArgs::new(z, v + 1.0).unwrap());
        assert!((d - 1.0 / v).abs() < 1e-13);
    }

    #[test]
    fn expansion_branch_agrees_with_summation() {
        for &v in &[0.1, 0.25, 0.45, -0.25, 1.5] {
            for &t in &[1e-4, 5e-4, 9e-4] {
                let expanded = lerch_phi(LerchArgs::from_log(t, v).unwrap());
                let summed = direct_sum(t, v);
                assert!(
                    (expanded - summed).abs() < 1e-10 * summed.abs().max(1.0),
                    "v={v} t={t}: {expanded} vs {summed}"
                );
            }
        }
    }

    #[test]
    fn small_xi_matches_direct_value() {
        let exact = lerch_phi(LerchArgs::from_log(std::f64::consts::PI * 0.01, 0.25).unwrap());
        let series = lerch_small_xi(0.25, 1.0, 0.01, 10).unwrap();
        assert!((exact - series).abs() < 1e-10);
    }

    #[test]
    fn small_xi_antisymmetric_combination() {
        let t = std::f64::consts::PI * 0.02;
        let exact = lerch_phi(LerchArgs::from_log(t, 0.25).unwrap())
            - lerch_phi(LerchArgs::from_log(t, -0.25).unwrap());
        let series = lerch_small_xi(0.25, 1.0, 0.02, 10).unwrap()
            - lerch_small_xi(-0.25, 1.0, 0.02, 10).unwrap();
        assert!((exact - series).abs() < 1e-8);
    }

    #[test]
    fn small_xi_truncation_bound() {
        let (v, s, xi) = (0.3, 1.0, 0.05);
        let t = std::f64::consts::PI * xi / s;
        for order in [2usize, 5, 8] {
            let a = lerch_small_xi(v, s, xi, order).unwrap();
            let b = lerch_small_xi(v, s, xi, order + 2).unwrap();
            assert!((a - b).abs() < t.powi(order as i32 + 1));
        }
    }

    #[test]
    fn second_moment_matches_summation() {
        let (t, v) = (0.05, -0.3);
        let mut s = CompensatedSum::new();
        for m in 0..4000u32 {
            let mf = m as f64;
            s.add(mf * mf * (-t * mf).exp() / (mf + v));
        }
        let got = lerch_second_moment(LerchArgs::from_log(t, v).unwrap());
        assert!(((got - s.value()) / got).abs() < 1e-13);
    }

    #[test]
    fn rejections() {
        assert!(LerchArgs::new(1.0, 0.5).is_err());
        assert!(LerchArgs::new(0.5, 0.0).is_err());
        assert!(LerchArgs::new(0.5, -2.0).is_err());
        assert!(lerch_small_xi(0.2, 1.0, 0.01, 26).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn shift_recurrence(z in 0.01f64..0.995, v in -3.9f64..4.0) {
            prop_assume!((v - v.round()).abs() > 0.05);
            let a = lerch_phi(LerchArgs::new(z, v).unwrap());
            let b = lerch_phi(LerchArgs::new(z, v + 1.0).unwrap());
            prop_assert!((a - 1.0 / v - z * b).abs() < 1e-11 * a.abs().max(1.0));
        }
    }
}
