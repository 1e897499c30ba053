use std::sync::OnceLock;

use crate::error::{domain, Result};

pub const MAX_ORDER: usize = 30;

#[derive(Clone, Copy)]
struct Ratio {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Ratio {
    fn int(n: i128) -> Self {
        Self { num: n, den: 1 }
    }

    fn reduced(num: i128, den: i128) -> Self {
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Self {
            num: s * num / g,
            den: s * den / g,
        }
    }

    fn add(self, o: Self) -> Self {
        let g = gcd(self.den, o.den);
        let l = self.den / g * o.den;
        Self::reduced(self.num * (l / self.den) + o.num * (l / o.den), l)
    }

    fn scale(self, n: i128, d: i128) -> Self {
        let a = Self::reduced(self.num, d);
        let b = Self::reduced(n, a.den);
        Self::reduced(a.num * b.num, b.den * self.den)
    }

    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn binomial(n: usize, k: usize) -> i128 {
    let mut c: i128 = 1;
    for i in 0..k {
        c = c * (n - i) as i128 / (i + 1) as i128;
    }
    c
}

/// Coefficients of B_n(x) in ascending powers, built exactly from
/// Σ_{k=0}^{n} C(n+1, k) B_k(x) = (n + 1) xⁿ.
fn table() -> &'static Vec<Vec<f64>> {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut exact: Vec<Vec<Ratio>> = Vec::with_capacity(MAX_ORDER + 1);
        for n in 0..=MAX_ORDER {
            let mut poly = vec![Ratio::int(0); n + 1];
            poly[n] = Ratio::int(1);
            for (k, prev) in exact.iter().enumerate() {
                let c = binomial(n + 1, k);
                for (j, coeff) in prev.iter().enumerate() {
                    poly[j] = poly[j].add(coeff.scale(-c, (n + 1) as i128));
                }
            }
            exact.push(poly);
        }
        exact
            .into_iter()
            .map(|p| p.into_iter().map(Ratio::to_f64).collect())
            .collect()
    })
}

/// Bernoulli polynomial Bₙ(x) for n ≤ 30.
pub fn bernoulli_poly(n: usize, x: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(domain(
            "bernoulli_poly",
            format!("order {n} exceeds the table limit {MAX_ORDER}"),
        ));
    }
    Ok(table()[n].iter().rev().fold(0.0, |acc, &c| acc * x + c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        assert_eq!(bernoulli_poly(0, 0.3).unwrap(), 1.0);
        assert_eq!(bernoulli_poly(1, 0.0).unwrap(), -0.5);
        assert!((bernoulli_poly(2, 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        // B_3(x) = x^3 − 3x²/2 + x/2
        let x = 0.7;
        let b3 = x * x * x - 1.5 * x * x + 0.5 * x;
        assert!((bernoulli_poly(3, x).unwrap() - b3).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_numbers() {
        // B_12 = −691/2730, B_30 = 8615841276005/14322
        assert!((bernoulli_poly(12, 0.0).unwrap() + 691.0 / 2730.0).abs() < 1e-15);
        let b30 = 8_615_841_276_005.0 / 14_322.0;
        assert!(((bernoulli_poly(30, 0.0).unwrap() - b30) / b30).abs() < 1e-14);
    }

    #[test]
    fn difference_property() {
        let (n, x) = (5, 0.8);
        let d = bernoulli_poly(n, x + 1.0).unwrap() - bernoulli_poly(n, x).unwrap();
        assert!((d - n as f64 * x.powi(n as i32 - 1)).abs() < 1e-13);
    }

    #[test]
    fn order_limit() {
        assert!(bernoulli_poly(31, 0.5).is_err());
    }
}
