//! Double-double helpers on top of `twofloat`.
//!
//! Only exact arithmetic from the crate is used; the exponential needed by
//! the cosech kernel is evaluated here by a Taylor series so that its
//! accuracy is known.

use twofloat::TwoFloat;

/// `e^x - 1` to double-double accuracy.
pub fn exp_m1(x: TwoFloat) -> TwoFloat {
    let hi = x.hi();
    if hi == 0.0 {
        return x;
    }
    if hi < -745.0 {
        return TwoFloat::from(-1.0);
    }
    // halve until |x| <= 1/2, then undo with (1+y)^2 - 1 = y (2 + y)
    let mut halvings = 0;
    let mut r = x;
    while r.hi().abs() > 0.5 {
        r /= 2.0;
        halvings += 1;
    }
    let mut term = r;
    let mut sum = r;
    for n in 2..60 {
        term = term * r / (n as f64);
        sum += term;
        if term.hi().abs() <= 1e-34 * sum.hi().abs() {
            break;
        }
    }
    for _ in 0..halvings {
        sum = sum * (sum + 2.0);
    }
    sum
}

/// `x^p` for an exactly representable `x`, carried in double-double.
pub fn powi(x: f64, p: i32) -> TwoFloat {
    let base = TwoFloat::from(x);
    let mut acc = TwoFloat::from(1.0);
    for _ in 0..p.unsigned_abs() {
        acc *= base;
    }
    if p < 0 {
        recip(acc)
    } else {
        acc
    }
}

/// `a / b` with two correction steps on the long-division quotient.
///
/// The crate's own dd/dd quotient forms its residual without a fused
/// multiply-add and loses about one digit, which matters here.
pub fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

pub fn recip(b: TwoFloat) -> TwoFloat {
    div(TwoFloat::from(1.0), b)
}

pub fn to_f64(x: TwoFloat) -> f64 {
    x.hi() + x.lo()
}
