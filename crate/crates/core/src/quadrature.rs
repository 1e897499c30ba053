//! Globally adaptive Gauss–Kronrod (10/21 point) integration on finite
//! intervals. The subinterval with the largest error estimate is bisected
//! until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{PistonError, Result};
use crate::summation::compensated_sum;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(relative: f64) -> Self {
        Self {
            absolute: 0.0,
            relative,
            max_intervals: 4000,
        }
    }

    pub fn with_absolute(mut self, absolute: f64) -> Self {
        self.absolute = absolute;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    floor: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    res_asc *= half.abs();
    res_abs *= half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let round_off = 50.0 * f64::EPSILON * res_abs;
    if round_off > error {
        error = round_off;
    }
    Segment {
        a,
        b,
        value,
        error,
        floor: round_off,
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(PistonError::Quadrature {
            message: format!("non-finite bounds [{a}, {b}]"),
            trace: Vec::new(),
        });
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(kronrod21(&f, a, b));
    let mut trace = Vec::new();
    loop {
        let value = compensated_sum(heap.iter().map(|s| s.value));
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(PistonError::Quadrature {
                message: "integrand produced a non-finite value".into(),
                trace,
            });
        }
        let target = tol.absolute.max(tol.relative * value.abs());
        // every segment already at its rounding floor: nothing left to refine
        let rounding_limited = heap.iter().all(|s| s.error <= s.floor);
        if error <= target || rounding_limited {
            return Ok(Estimate {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= tol.max_intervals {
            trace.push(format!(
                "stopped at {} intervals: value {value:e}, error {error:e}, target {target:e}",
                heap.len()
            ));
            return Err(PistonError::Quadrature {
                message: format!("error estimate {error:e} above target {target:e}"),
                trace,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            trace.push(format!(
                "cannot bisect [{:e}, {:e}] further (error {:e})",
                worst.a, worst.b, worst.error
            ));
            return Err(PistonError::Quadrature {
                message: "interval collapsed to machine resolution".into(),
                trace,
            });
        }
        if trace.len() < 64 {
            trace.push(format!(
                "split [{:.6e}, {:.6e}] err {:.3e}",
                worst.a, worst.b, worst.error
            ));
        }
        heap.push(kronrod21(&f, worst.a, mid));
        heap.push(kronrod21(&f, mid, worst.b));
    }
}

/// Integrates over consecutive pieces `[p0, p1], [p1, p2], ...`.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    let mut parts = Vec::with_capacity(breakpoints.len());
    let mut error = 0.0;
    let mut intervals = 0;
    for w in breakpoints.windows(2) {
        let e = integrate(&f, w[0], w[1], tol)?;
        parts.push(e.value);
        error += e.error;
        intervals += e.intervals;
    }
    Ok(Estimate {
        value: compensated_sum(parts),
        error,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x.powi(5) - 3.0 * x, 0.0, 2.0, Tolerance::relative(1e-14)).unwrap();
        assert!((e.value - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_integrand() {
        let e = integrate(|x| (40.0 * x).sin().powi(2), 0.0, 1.0, Tolerance::relative(1e-12)).unwrap();
        let exact = 0.5 - (80.0f64).sin() / 160.0;
        assert!((e.value - exact).abs() < 1e-12);
    }

    #[test]
    fn exponential_tail() {
        let e = integrate(|x| x * x * (-3.0 * x).exp(), 0.0, 40.0, Tolerance::relative(1e-13)).unwrap();
        assert!((e.value - 2.0 / 27.0).abs() < 1e-14);
    }

    #[test]
    fn singular_integrand_reports_trace() {
        let tol = Tolerance {
            absolute: 0.0,
            relative: 1e-15,
            max_intervals: 20,
        };
        match integrate(|x| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, tol) {
            Err(PistonError::Quadrature { trace, .. }) => assert!(!trace.is_empty()),
            other => panic!("expected quadrature failure, got {other:?}"),
        }
    }
}
