//! Laurent-structure extraction from sampled small-ξ data.
//!
//! Data are fitted to Σ_p c_p ξ^p + c_log ln ξ by weighted least squares.
//! Samples carry double-double values because the constant term sits
//! twelve orders of magnitude below the ξ⁻⁴ term over the usual window.

mod report;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{PistonError, Result};
use crate::ideal_piston::energy_closed_precise;
use crate::model::PistonGeometry;
use crate::perturbation::denergy_dalpha_closed_precise;
use crate::precise::{powi, to_f64};

pub use report::{
    divergence_report, CoefficientFlag, DivergenceReport, ReportRow, ReportTable, SideLogContent,
};

/// Fits with a larger condition estimate are marked unreliable.
pub const CONDITION_LIMIT: f64 = 1e10;
const REFINEMENT_STEPS: usize = 4;

/// Coefficients of Σ_p c_p ξ^p + log·ln ξ.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LaurentCoefficients {
    pub powers: BTreeMap<i32, f64>,
    pub log: f64,
}

impl LaurentCoefficients {
    pub fn get(&self, power: i32) -> f64 {
        self.powers.get(&power).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, power: i32, value: f64) {
        self.powers.insert(power, value);
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&p, &c) in &other.powers {
            *out.powers.entry(p).or_insert(0.0) += c;
        }
        out.log += other.log;
        out
    }

    pub fn evaluate(&self, xi: f64) -> f64 {
        self.powers.iter().map(|(&p, &c)| c * xi.powi(p)).sum::<f64>() + self.log * xi.ln()
    }

    pub fn evaluate_precise(&self, xi: f64) -> TwoFloat {
        let mut total = TwoFloat::from(self.log * xi.ln());
        for (&p, &c) in &self.powers {
            total += powi(xi, p) * c;
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub xi: f64,
    pub value: TwoFloat,
}

impl Sample {
    pub fn new(xi: f64, value: impl Into<TwoFloat>) -> Self {
        Self {
            xi,
            value: value.into(),
        }
    }
}

/// Fit columns: ξ^p for each power, ln ξ when `include_log`, and
/// ξ^k ln ξ for each entry of `log_powers`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Basis {
    pub powers: Vec<i32>,
    pub include_log: bool,
    pub log_powers: Vec<i32>,
}

impl Default for Basis {
    fn default() -> Self {
        Self {
            powers: vec![-4, -3, -2, -1, 0],
            include_log: true,
            log_powers: Vec::new(),
        }
    }
}

impl Basis {
    pub fn new(powers: Vec<i32>, include_log: bool) -> Result<Self> {
        Self::with_log_powers(powers, include_log, Vec::new())
    }

    pub fn with_log_powers(
        mut powers: Vec<i32>,
        include_log: bool,
        mut log_powers: Vec<i32>,
    ) -> Result<Self> {
        powers.sort_unstable();
        log_powers.sort_unstable();
        if powers.windows(2).any(|w| w[0] == w[1]) {
            return Err(PistonError::Input(format!("repeated power in basis {powers:?}")));
        }
        if log_powers.windows(2).any(|w| w[0] == w[1]) {
            return Err(PistonError::Input(format!("repeated log power in basis {log_powers:?}")));
        }
        if log_powers.contains(&0) {
            return Err(PistonError::Input("write the plain logarithm as 'log'".into()));
        }
        if powers.is_empty() && !include_log && log_powers.is_empty() {
            return Err(PistonError::Input("empty basis".into()));
        }
        Ok(Self {
            powers,
            include_log,
            log_powers,
        })
    }

    /// Parses `"-4,-3,-2,-1,0,log,xi^2*log"`; entries may come in any order.
    pub fn parse(text: &str) -> Result<Self> {
        let mut powers = Vec::new();
        let mut log_powers = Vec::new();
        let mut include_log = false;
        for item in text.split(',').map(str::trim) {
            if item.eq_ignore_ascii_case("log") {
                if include_log {
                    return Err(PistonError::Input("log listed twice".into()));
                }
                include_log = true;
            } else if let Some(k) = item.strip_prefix("xi^").and_then(|r| r.strip_suffix("*log")) {
                let k: i32 = k
                    .parse()
                    .map_err(|_| PistonError::Input(format!("bad basis entry '{item}'")))?;
                log_powers.push(k);
            } else {
                let p: i32 = item
                    .parse()
                    .map_err(|_| PistonError::Input(format!("bad basis entry '{item}'")))?;
                powers.push(p);
            }
        }
        Self::with_log_powers(powers, include_log, log_powers)
    }

    pub fn len(&self) -> usize {
        self.powers.len() + usize::from(self.include_log) + self.log_powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.powers.iter().map(|p| format!("xi^{p}")).collect();
        if self.include_log {
            names.push("log(xi)".into());
        }
        names.extend(self.log_powers.iter().map(|k| format!("xi^{k}*log(xi)")));
        names
    }

    fn column(&self, j: usize, xi: f64) -> TwoFloat {
        if let Some(&p) = self.powers.get(j) {
            return powi(xi, p);
        }
        let j = j - self.powers.len();
        if self.include_log && j == 0 {
            return TwoFloat::from(xi.ln());
        }
        let k = self.log_powers[j - usize::from(self.include_log)];
        powi(xi, k) * xi.ln()
    }

    fn log_index(&self) -> Option<usize> {
        self.include_log.then_some(self.powers.len())
    }

    fn log_power_index(&self, i: usize) -> usize {
        self.powers.len() + usize::from(self.include_log) + i
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut items: Vec<String> = self.powers.iter().map(i32::to_string).collect();
        if self.include_log {
            items.push("log".into());
        }
        items.extend(self.log_powers.iter().map(|k| format!("xi^{k}*log")));
        f.write_str(&items.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaurentFit {
    pub powers: Vec<i32>,
    pub include_log: bool,
    pub coefficients: BTreeMap<i32, f64>,
    pub uncertainties: BTreeMap<i32, f64>,
    pub c_log: f64,
    pub c_log_uncertainty: f64,
    /// Coefficients of ξ^k ln ξ keyed by k.
    pub log_power_coefficients: BTreeMap<i32, f64>,
    pub log_power_uncertainties: BTreeMap<i32, f64>,
    /// Root-mean-square residual over the largest sampled magnitude.
    pub residual_rms: f64,
    pub condition_estimate: f64,
    pub reliable: bool,
    pub samples: usize,
    pub xi_min: f64,
    pub xi_max: f64,
}

impl LaurentFit {
    pub fn coefficient(&self, power: i32) -> Option<f64> {
        self.coefficients.get(&power).copied()
    }

    pub fn uncertainty(&self, power: i32) -> Option<f64> {
        self.uncertainties.get(&power).copied()
    }

    /// The fitted model at `xi`, including any ξ^k ln ξ columns.
    pub fn evaluate(&self, xi: f64) -> f64 {
        let log_terms: f64 = self
            .log_power_coefficients
            .iter()
            .map(|(&k, &c)| c * xi.powi(k) * xi.ln())
            .sum();
        self.as_coefficients().evaluate(xi) + log_terms
    }

    pub fn as_coefficients(&self) -> LaurentCoefficients {
        LaurentCoefficients {
            powers: self.coefficients.clone(),
            log: self.c_log,
        }
    }
}

struct Solved {
    coefficients: Vec<TwoFloat>,
    sigma: Vec<f64>,
    residual_rms: f64,
    condition: f64,
}

fn check_samples(samples: &[Sample], basis: &Basis) -> Result<()> {
    if basis.is_empty() {
        return Err(PistonError::Input("empty basis".into()));
    }
    if samples.len() < basis.len() + 2 {
        return Err(PistonError::Input(format!(
            "{} samples cannot constrain {} basis columns (need at least {})",
            samples.len(),
            basis.len(),
            basis.len() + 2
        )));
    }
    let mut xs: Vec<f64> = samples.iter().map(|s| s.xi).collect();
    if xs.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(PistonError::Input("sample xi values must be positive".into()));
    }
    if samples.iter().any(|s| !s.value.hi().is_finite()) {
        return Err(PistonError::Input("sample values must be finite".into()));
    }
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(PistonError::Input("sample xi values must be distinct".into()));
    }
    if xs[xs.len() - 1] / xs[0] < 10.0 * (1.0 - 1e-9) {
        return Err(PistonError::Input(format!(
            "xi window [{:e}, {:e}] spans less than a decade",
            xs[0],
            xs[xs.len() - 1]
        )));
    }
    Ok(())
}

fn solve(samples: &[Sample], basis: &Basis) -> Result<Solved> {
    let n = samples.len();
    let p = basis.len();
    let weights: Vec<f64> = samples.iter().map(|s| 1.0 / to_f64(s.value).abs().max(f64::MIN_POSITIVE)).collect();
    let columns: Vec<Vec<TwoFloat>> = (0..p)
        .map(|j| samples.iter().map(|s| basis.column(j, s.xi)).collect())
        .collect();
    let scale: Vec<f64> = (0..p)
        .map(|j| {
            let norm = (0..n)
                .map(|i| (to_f64(columns[j][i]) * weights[i]).powi(2))
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                norm
            } else {
                1.0
            }
        })
        .collect();
    let a = DMatrix::from_fn(n, p, |i, j| to_f64(columns[j][i]) * weights[i] / scale[j]);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let v_t = svd.v_t.as_ref().expect("requested V");
    if smin <= 1e-13 * smax {
        let mut names = Vec::new();
        let all = basis.column_names();
        for (k, &s) in sv.iter().enumerate() {
            if s <= 1e-13 * smax {
                for j in 0..p {
                    if v_t[(k, j)].abs() > 0.1 && !names.contains(&all[j]) {
                        names.push(all[j].clone());
                    }
                }
            }
        }
        return Err(PistonError::RankDeficient { columns: names });
    }
    let condition = smax / smin;

    let mut coefficients = vec![TwoFloat::from(0.0); p];
    let residual = |coefficients: &[TwoFloat]| -> Vec<TwoFloat> {
        (0..n)
            .map(|i| {
                let mut model = TwoFloat::from(0.0);
                for j in 0..p {
                    model += columns[j][i] * coefficients[j];
                }
                (samples[i].value - model) * weights[i]
            })
            .collect()
    };
    for _ in 0..REFINEMENT_STEPS {
        let r = residual(&coefficients);
        let rhs = DVector::from_iterator(n, r.iter().map(|x| to_f64(*x)));
        let step = svd.solve(&rhs, 0.0).map_err(|e| PistonError::Input(e.to_string()))?;
        for j in 0..p {
            coefficients[j] += step[j] / scale[j];
        }
    }
    let r = residual(&coefficients);
    let dof = (n - p) as f64;
    let s2 = r.iter().map(|x| to_f64(*x).powi(2)).sum::<f64>() / dof;
    let sigma = (0..p)
        .map(|j| {
            let var: f64 = sv
                .iter()
                .enumerate()
                .map(|(k, &s)| (v_t[(k, j)] / s).powi(2))
                .sum();
            (s2 * var).sqrt() / scale[j]
        })
        .collect();
    let largest = samples.iter().map(|s| to_f64(s.value).abs()).fold(0.0, f64::max);
    let raw_rms = (r
        .iter()
        .zip(&weights)
        .map(|(x, w)| (to_f64(*x) / w).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(Solved {
        coefficients,
        sigma,
        residual_rms: raw_rms / largest,
        condition,
    })
}

/// Weighted least-squares fit of `samples` on `basis`.
///
/// Rows are weighted by 1/|value| and columns scaled to unit norm before
/// an SVD solve; the solution is refined against double-double residuals.
/// Each reported uncertainty combines the residual-scaled standard error,
/// the shift seen when the largest-ξ quarter of the samples is dropped and
/// the shift seen when the next higher power joins the basis, so that
/// truncation of the series shows up in the error bars. It never falls
/// below the f64 rounding of the coefficient.
pub fn laurent_fit(samples: &[Sample], basis: &Basis) -> Result<LaurentFit> {
    check_samples(samples, basis)?;
    let full = solve(samples, basis)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.xi.total_cmp(&b.xi));
    let keep = sorted.len() - sorted.len() / 4;
    let shift: Vec<f64> = if keep >= basis.len() + 2 && keep < sorted.len() {
        let sub = solve(&sorted[..keep], basis)?;
        full.coefficients
            .iter()
            .zip(&sub.coefficients)
            .map(|(a, b)| to_f64(*a - *b).abs())
            .collect()
    } else {
        vec![0.0; basis.len()]
    };
    let truncation = truncation_shift(samples, basis, &full.coefficients);
    let total: Vec<f64> = full
        .sigma
        .iter()
        .zip(&shift)
        .zip(&truncation)
        .zip(&full.coefficients)
        // the f64 rounding of the reported value is part of its uncertainty
        .map(|(((s, d), t), c)| s.hypot(*d).hypot(*t).max(f64::EPSILON * to_f64(*c).abs()))
        .collect();
    let mut coefficients = BTreeMap::new();
    let mut uncertainties = BTreeMap::new();
    for (j, &p) in basis.powers.iter().enumerate() {
        coefficients.insert(p, to_f64(full.coefficients[j]));
        uncertainties.insert(p, total[j]);
    }
    let (c_log, c_log_uncertainty) = match basis.log_index() {
        Some(j) => (to_f64(full.coefficients[j]), total[j]),
        None => (0.0, 0.0),
    };
    let mut log_power_coefficients = BTreeMap::new();
    let mut log_power_uncertainties = BTreeMap::new();
    for (i, &k) in basis.log_powers.iter().enumerate() {
        let j = basis.log_power_index(i);
        log_power_coefficients.insert(k, to_f64(full.coefficients[j]));
        log_power_uncertainties.insert(k, total[j]);
    }
    Ok(LaurentFit {
        powers: basis.powers.clone(),
        include_log: basis.include_log,
        coefficients,
        uncertainties,
        c_log,
        c_log_uncertainty,
        log_power_coefficients,
        log_power_uncertainties,
        residual_rms: full.residual_rms,
        condition_estimate: full.condition,
        reliable: full.condition.is_finite() && full.condition <= CONDITION_LIMIT,
        samples: samples.len(),
        xi_min: sorted[0].xi,
        xi_max: sorted[sorted.len() - 1].xi,
    })
}

/// Coefficient changes when the next higher power joins the basis; zero
/// where that refit is not possible.
fn truncation_shift(samples: &[Sample], basis: &Basis, coefficients: &[TwoFloat]) -> Vec<f64> {
    let next = basis.powers.last().map_or(1, |p| p + 1);
    let mut powers = basis.powers.clone();
    powers.push(next);
    let extended = Basis {
        powers,
        include_log: basis.include_log,
        log_powers: basis.log_powers.clone(),
    };
    if samples.len() < extended.len() + 2 {
        return vec![0.0; basis.len()];
    }
    match solve(samples, &extended) {
        // columns after the powers sit one place later in the extended fit
        Ok(ext) => (0..basis.len())
            .map(|j| {
                let k = if j < basis.powers.len() { j } else { j + 1 };
                to_f64(coefficients[j] - ext.coefficients[k]).abs()
            })
            .collect(),
        Err(_) => vec![0.0; basis.len()],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C0Extraction {
    pub c0: f64,
    pub uncertainty: f64,
    pub c_log: f64,
    pub c_log_uncertainty: f64,
    pub warnings: Vec<String>,
}

/// The constant term of a fit, i.e. the value left after discarding the
/// principal part. Warns when a significant ln ξ term remains, since the
/// prescription then leaves a divergence behind.
pub fn extract_c0(fit: &LaurentFit) -> Result<C0Extraction> {
    if !fit.reliable {
        return Err(PistonError::UnreliableFit {
            condition: fit.condition_estimate,
            detail: format!(
                "condition estimate exceeds {CONDITION_LIMIT:e} over xi in [{:e}, {:e}] with powers {:?}",
                fit.xi_min, fit.xi_max, fit.powers
            ),
        });
    }
    let c0 = fit
        .coefficient(0)
        .ok_or_else(|| PistonError::Input("basis has no constant column".into()))?;
    let mut warnings = Vec::new();
    if fit.include_log && fit.c_log.abs() > 3.0 * fit.c_log_uncertainty {
        warnings.push(format!(
            "log(xi) coefficient {:.6e} exceeds 3x its uncertainty {:.3e}: discarding the \
             principal part still leaves a logarithmic divergence, so c0 is not a \
             cutoff-independent value for this quantity",
            fit.c_log, fit.c_log_uncertainty
        ));
    }
    Ok(C0Extraction {
        c0,
        uncertainty: fit.uncertainty(0).unwrap_or(0.0),
        c_log: fit.c_log,
        c_log_uncertainty: fit.c_log_uncertainty,
        warnings,
    })
}

/// Quantities that can be sampled for a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    IdealEnergy,
    DenergyDalpha,
}

impl Quantity {
    /// Basis suited to the quantity's known small-ξ structure: the empty
    /// piston continues in even powers only, the dielectric response in all
    /// positive powers plus ξ² ln ξ.
    pub fn default_basis(self) -> Basis {
        match self {
            Quantity::IdealEnergy => Basis {
                powers: vec![-4, -3, -2, -1, 0, 2, 4],
                include_log: true,
                log_powers: Vec::new(),
            },
            Quantity::DenergyDalpha => Basis {
                powers: vec![-4, -3, -2, -1, 0, 1, 2, 3],
                include_log: true,
                log_powers: vec![2],
            },
        }
    }

    pub fn evaluate(self, geometry: &PistonGeometry, xi: f64) -> Result<TwoFloat> {
        match self {
            Quantity::IdealEnergy => energy_closed_precise(geometry, xi),
            Quantity::DenergyDalpha => denergy_dalpha_closed_precise(geometry, xi),
        }
    }

    pub fn sample(self, geometry: &PistonGeometry, xis: &[f64]) -> Result<Vec<Sample>> {
        xis.iter()
            .map(|&xi| Ok(Sample::new(xi, self.evaluate(geometry, xi)?)))
            .collect()
    }
}

impl std::str::FromStr for Quantity {
    type Err = PistonError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal-energy" => Ok(Quantity::IdealEnergy),
            "denergy-dalpha" => Ok(Quantity::DenergyDalpha),
            other => Err(PistonError::Input(format!(
                "unknown quantity '{other}' (expected ideal-energy or denergy-dalpha)"
            ))),
        }
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Quantity::IdealEnergy => "ideal-energy",
            Quantity::DenergyDalpha => "denergy-dalpha",
        })
    }
}

/// `count` points spaced evenly in ln ξ over [min, max].
pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && count >= 2) {
        return Err(PistonError::Input(format!(
            "need 0 < min < max and at least two points, got [{min}, {max}] x {count}"
        )));
    }
    let (lo, hi) = (min.ln(), max.ln());
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                max
            } else if i == 0 {
                min
            } else {
                (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn synthetic(f: impl Fn(f64) -> f64, xs: &[f64]) -> Vec<Sample> {
        xs.iter().map(|&x| Sample::new(x, f(x))).collect()
    }

    #[test]
    fn exact_member_of_basis() {
        let xs = log_grid(0.01, 0.1, 20).unwrap();
        let samples = synthetic(|x| 3.0 / (x * x) + 5.0, &xs);
        let fit = laurent_fit(&samples, &Basis::default()).unwrap();
        assert!((fit.coefficient(-2).unwrap() - 3.0).abs() < 1e-8);
        assert!((fit.coefficient(0).unwrap() - 5.0).abs() < 1e-8);
        for p in [-4, -3, -1] {
            assert!(fit.coefficient(p).unwrap().abs() < 1e-8);
        }
        assert!(fit.c_log.abs() < 1e-8);
        assert!(fit.reliable);
    }

    #[test]
    fn pure_constant_has_no_warning() {
        let xs = log_grid(0.001, 0.01, 20).unwrap();
        let samples = synthetic(|_| 2.5, &xs);
        let c = extract_c0(&laurent_fit(&samples, &Basis::default()).unwrap()).unwrap();
        assert!((c.c0 - 2.5).abs() < 1e-8);
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn synthetic_seven_group_recovery() {
        let truth = |x: f64| {
            -0.1 / x.powi(4) + 0.03 / x.powi(3) - 0.04 / (x * x) + 0.2 / x - 0.05 * x.ln() + 0.7
        };
        let xs = log_grid(1e-3, 1e-2, 20).unwrap();
        let samples: Vec<Sample> = xs
            .iter()
            .map(|&x| {
                let mut c = LaurentCoefficients::default();
                c.set(-4, -0.1);
                c.set(-3, 0.03);
                c.set(-2, -0.04);
                c.set(-1, 0.2);
                c.set(0, 0.7);
                c.log = -0.05;
                assert!((to_f64(c.evaluate_precise(x)) / truth(x) - 1.0).abs() < 1e-14);
                Sample::new(x, c.evaluate_precise(x))
            })
            .collect();
        let fit = laurent_fit(&samples, &Basis::default()).unwrap();
        for (p, want) in [(-4, -0.1), (-3, 0.03), (-2, -0.04), (-1, 0.2), (0, 0.7)] {
            let got = fit.coefficient(p).unwrap();
            assert!(((got - want) / want).abs() < 1e-6, "power {p}: {got}");
        }
        assert!(((fit.c_log + 0.05) / 0.05).abs() < 1e-6);
    }

    #[test]
    fn collinear_columns_are_named() {
        let xs = log_grid(0.01, 0.1, 12).unwrap();
        let samples = synthetic(|x| 1.0 + x, &xs);
        let basis = Basis::new(vec![0, 1], false).unwrap();
        let doubled = Basis {
            powers: vec![0, 1, 1],
            include_log: false,
            log_powers: Vec::new(),
        };
        assert!(laurent_fit(&samples, &basis).is_ok());
        match laurent_fit(&samples, &doubled) {
            Err(PistonError::RankDeficient { columns }) => {
                assert_eq!(columns, vec!["xi^1".to_string()]);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn sample_requirements() {
        let narrow = log_grid(0.01, 0.05, 20).unwrap();
        assert!(laurent_fit(&synthetic(|x| x, &narrow), &Basis::default()).is_err());
        let few = log_grid(0.01, 0.1, 7).unwrap();
        assert!(laurent_fit(&synthetic(|x| x, &few), &Basis::default()).is_err());
    }

    #[test]
    fn basis_parsing() {
        let b = Basis::parse("-4, -3,-2,-1,0,log").unwrap();
        assert_eq!(b, Basis::default());
        assert_eq!(b.to_string(), "-4,-3,-2,-1,0,log");
        assert!(Basis::parse("-4,x").is_err());
        assert!(Basis::parse("1,1").is_err());
        assert!(Basis::parse("log,log").is_err());
    }

    #[test]
    fn log_power_columns() {
        let b = Basis::parse("xi^2*log,0,log,-1").unwrap();
        assert_eq!(b.to_string(), "-1,0,log,xi^2*log");
        assert_eq!(b.column_names()[3], "xi^2*log(xi)");
        assert_eq!(Basis::parse(&b.to_string()).unwrap(), b);
        assert!(Basis::parse("xi^0*log").is_err());
        assert!(Basis::parse("xi^2*log,xi^2*log").is_err());

        let xs = log_grid(0.01, 0.1, 16).unwrap();
        let samples = synthetic(|x| 2.0 - 0.5 * x.ln() + 3.0 * x * x * x.ln(), &xs);
        let fit = laurent_fit(&samples, &b).unwrap();
        assert!((fit.coefficient(0).unwrap() - 2.0).abs() < 1e-10);
        assert!((fit.c_log + 0.5).abs() < 1e-10);
        assert!((fit.log_power_coefficients[&2] - 3.0).abs() < 1e-8);
        let x = 0.03f64;
        assert!((fit.evaluate(x) - (2.0 - 0.5 * x.ln() + 3.0 * x * x * x.ln())).abs() < 1e-10);
    }

    #[test]
    fn ideal_energy_constant_term() {
        let g = PistonGeometry::new(1.0, 0.3).unwrap();
        let xs = log_grid(1e-3, 1e-2, 20).unwrap();
        let q = Quantity::IdealEnergy;
        let fit = laurent_fit(&q.sample(&g, &xs).unwrap(), &q.default_basis()).unwrap();
        let c0 = -PI * PI / 720.0 * (0.3f64.powi(-3) + 0.7f64.powi(-3));
        let got = extract_c0(&fit).unwrap();
        assert!(((got.c0 - c0) / c0).abs() < 1e-4, "{} vs {c0}", got.c0);
        assert!(got.warnings.is_empty(), "{:?}", got.warnings);
        assert!(fit.c_log.abs() < 1e-6);
    }

    #[test]
    fn condition_grows_as_window_shrinks() {
        let samples = |lo: f64, hi: f64| {
            synthetic(|x| 1.0 / x.powi(4) + 1.0, &log_grid(lo, hi, 20).unwrap())
        };
        let wide = laurent_fit(&samples(1e-3, 1e-1), &Basis::default()).unwrap();
        let narrow = laurent_fit(&samples(1e-3, 1e-2), &Basis::default()).unwrap();
        assert!(narrow.condition_estimate > wide.condition_estimate);
    }

    #[test]
    fn unreliable_fit_is_refused() {
        let mut fit = laurent_fit(
            &synthetic(|x| x, &log_grid(0.01, 0.1, 20).unwrap()),
            &Basis::default(),
        )
        .unwrap();
        fit.condition_estimate = 1e12;
        fit.reliable = false;
        assert!(matches!(extract_c0(&fit), Err(PistonError::UnreliableFit { .. })));
    }
}
