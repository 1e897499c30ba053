use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// B_{2k} / (2k), k = 1..7
const ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// ψ(x) = Γ'(x)/Γ(x).
///
/// Shifts upward with ψ(x) = ψ(x + 1) − 1/x until x > 8, then sums the
/// asymptotic series. Negative arguments go through
/// ψ(x) = ψ(1 − x) − π cot(πx).
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("digamma", format!("non-finite argument {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(domain("digamma", format!("pole at x = {x}")));
    }
    if x < 0.0 {
        let reflected = digamma(1.0 - x)?;
        return Ok(reflected - PI / (PI * x).tan());
    }
    let mut shift = 0.0;
    let mut y = x;
    while y <= 8.0 {
        shift -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut series = 0.0;
    let mut power = inv2;
    for c in ASYMPTOTIC {
        series += c * power;
        power *= inv2;
    }
    Ok(shift + y.ln() - 0.5 / y - series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        let half = -EULER_GAMMA - 2.0 * 2f64.ln();
        assert!((digamma(0.5).unwrap() - half).abs() < 1e-14);
        // ψ(−1/2) = ψ(1/2) + 2
        assert!((digamma(-0.5).unwrap() - (half + 2.0)).abs() < 1e-13);
        // ψ(1/4) = −γ − π/2 − 3 ln 2
        let quarter = -EULER_GAMMA - PI / 2.0 - 3.0 * 2f64.ln();
        assert!((digamma(0.25).unwrap() - quarter).abs() < 1e-13);
    }

    #[test]
    fn recurrence_at_037() {
        let x = 0.37;
        let d = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
        assert!((d - 1.0 / x).abs() < 1e-12);
    }

    #[test]
    fn poles_are_rejected() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-3.0).is_err());
        assert!(digamma(f64::INFINITY).is_err());
    }
}
