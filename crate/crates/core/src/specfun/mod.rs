//! Special functions used by the closed forms.

mod bernoulli;
mod digamma;
mod lerch;

use twofloat::TwoFloat;

use crate::error::{domain, Result};
use crate::precise::{div, exp_m1};

pub use bernoulli::bernoulli_poly;
pub use digamma::{digamma, EULER_GAMMA};
pub use lerch::{lerch_phi, lerch_second_moment, lerch_small_xi, LerchArgs};

/// d-th derivative of f(u) = eᵘ cosech u = 1 + coth u.
pub fn exp_cosech_kernel(u: f64, d: u8) -> Result<f64> {
    if d > 2 {
        return Err(domain("exp_cosech_kernel", format!("derivative order {d} > 2")));
    }
    Ok(exp_cosech_derivatives(u)?[d as usize])
}

/// [f, f', f''] at u. With M = 1 − e^{−2u} and E = e^{−2u}:
/// f = 2/M, f' = −4E/M², f'' = 8E(1 + E)/M³, free of cancellation for small u.
pub fn exp_cosech_derivatives(u: f64) -> Result<[f64; 3]> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(domain("exp_cosech_kernel", format!("u = {u} must be positive")));
    }
    let m = -(-2.0 * u).exp_m1();
    let e = (-2.0 * u).exp();
    Ok([2.0 / m, -4.0 * e / (m * m), 8.0 * e * (1.0 + e) / (m * m * m)])
}

/// Double-double version of [`exp_cosech_derivatives`].
pub fn exp_cosech_derivatives_precise(u: TwoFloat) -> Result<[TwoFloat; 3]> {
    if !(u.hi() > 0.0 && u.hi().is_finite()) {
        return Err(domain("exp_cosech_kernel", format!("u = {} must be positive", u.hi())));
    }
    let m = -exp_m1(u * -2.0);
    let e = 1.0 - m;
    let m2 = m * m;
    Ok([
        div(TwoFloat::from(2.0), m),
        div(e * -4.0, m2),
        div(e * (e + 1.0) * 8.0, m2 * m),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precise::to_f64;
    use proptest::prelude::*;

    #[test]
    fn kernel_at_one() {
        let want = 1f64.exp() / 1f64.sinh();
        assert!((exp_cosech_kernel(1.0, 0).unwrap() - want).abs() < 1e-15);
        assert!((exp_cosech_kernel(1.0, 0).unwrap() - 2.313_035_285_5).abs() < 1e-10);
    }

    #[test]
    fn kernel_small_u_leading_term() {
        let u = 1e-6;
        // f ≈ 1/u + 1
        assert!((u * exp_cosech_kernel(u, 0).unwrap() - 1.0).abs() < 2e-6);
        // f' ≈ −1/u², f'' ≈ 2/u³
        assert!((exp_cosech_kernel(u, 1).unwrap() * u * u + 1.0).abs() < 1e-6);
        assert!((exp_cosech_kernel(u, 2).unwrap() * u * u * u / 2.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kernel_finite_differences() {
        let (u, h) = (0.5, 1e-5);
        let f = |x| exp_cosech_kernel(x, 0).unwrap();
        let fd = (f(u + h) - f(u - h)) / (2.0 * h);
        assert!((exp_cosech_kernel(u, 1).unwrap() - fd).abs() < 1e-8);
        let g = |x| exp_cosech_kernel(x, 1).unwrap();
        let h2 = 1e-6;
        let fd2 = (g(u + h2) - g(u - h2)) / (2.0 * h2);
        assert!((exp_cosech_kernel(u, 2).unwrap() - fd2).abs() < 1e-8);
    }

    #[test]
    fn kernel_matches_hyperbolic_form() {
        for &u in &[0.01f64, 0.3, 2.0, 7.0] {
            let c = 1.0 / u.sinh();
            let coth = 1.0 / u.tanh();
            let [f, f1, f2] = exp_cosech_derivatives(u).unwrap();
            assert!((f - (1.0 + coth)).abs() < 1e-14 * f);
            assert!((f1 + c * c).abs() < 1e-13 * f1.abs());
            assert!((f2 - 2.0 * c * c * coth).abs() < 1e-13 * f2.abs());
        }
    }

    #[test]
    fn kernel_rejects_bad_input() {
        assert!(exp_cosech_kernel(0.0, 0).is_err());
        assert!(exp_cosech_kernel(-1.0, 1).is_err());
        assert!(exp_cosech_kernel(1.0, 3).is_err());
    }

    #[test]
    fn precise_kernel_agrees() {
        for &u in &[1e-5, 0.02, 0.8, 5.0] {
            let lo = exp_cosech_derivatives(u).unwrap();
            let hi = exp_cosech_derivatives_precise(TwoFloat::from(u)).unwrap();
            for d in 0..3 {
                assert!(((to_f64(hi[d]) - lo[d]) / lo[d]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn precise_kernel_carries_extra_digits() {
        // f' = 2f − f² and f'' = −2(f − 1) f' from coth' = 1 − coth²
        for &u in &[1e-4, 6.3e-3, 0.4, 3.0] {
            let [f, f1, f2] = exp_cosech_derivatives_precise(TwoFloat::from(u)).unwrap();
            let d1 = to_f64(f1 - (f * 2.0 - f * f)) / to_f64(f1);
            let d2 = to_f64(f2 + (f - 1.0) * f1 * 2.0) / to_f64(f2);
            assert!(d1.abs() < 1e-28 && d2.abs() < 1e-28, "u={u}: {d1:e} {d2:e}");
        }
    }

    proptest! {
        #[test]
        fn digamma_recurrence_and_reflection(x in -6.0f64..6.0) {
            prop_assume!((x - x.round()).abs() > 1e-3);
            let (p0, p1, q) = (digamma(x).unwrap(), digamma(x + 1.0).unwrap(), digamma(1.0 - x).unwrap());
            let scale = p0.abs().max(p1.abs()).max(q.abs()).max(1.0);
            prop_assert!((p1 - p0 - 1.0 / x).abs() < 1e-11 * scale);
            let pi = std::f64::consts::PI;
            prop_assert!((q - p0 - pi / (pi * x).tan()).abs() < 1e-11 * scale);
        }

        #[test]
        fn digamma_pairs(v in 0.001f64..0.5) {
            // ψ(−v) = ψ(v) + 1/v + π cot(πv)
            let pi = std::f64::consts::PI;
            let want = digamma(v).unwrap() + 1.0 / v + pi / (pi * v).tan();
            let got = digamma(-v).unwrap();
            prop_assert!((got - want).abs() < 1e-11 * want.abs().max(1.0));
        }

        #[test]
        fn bernoulli_reflection(n in 0usize..=12, x in -2.0f64..3.0) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let a = bernoulli_poly(n, 1.0 - x).unwrap();
            let b = sign * bernoulli_poly(n, x).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }
}
