use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{laurent_fit, Basis, LaurentCoefficients, LaurentFit, Quantity};
use crate::error::{PistonError, Result};
use crate::ideal_piston;
use crate::model::{PistonGeometry, Side};
use crate::perturbation;

/// Coefficient groups compared across piston positions.
pub const GROUPS: [&str; 6] = ["c-4", "c-3", "c-2", "c-1", "c0", "c_log"];

fn group_power(name: &str) -> Option<i32> {
    match name {
        "c-4" => Some(-4),
        "c-3" => Some(-3),
        "c-2" => Some(-2),
        "c-1" => Some(-1),
        "c0" => Some(0),
        _ => None,
    }
}

fn group_value(c: &LaurentCoefficients, name: &str) -> f64 {
    group_power(name).map_or(c.log, |p| c.get(p))
}

fn fit_uncertainty(fit: &LaurentFit, name: &str) -> f64 {
    match group_power(name) {
        Some(p) => fit.uncertainty(p).unwrap_or(0.0),
        None => fit.c_log_uncertainty,
    }
}

/// ln ξ content of one side before the constant ln(π/s) is folded into c₀.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideLogContent {
    pub side: Side,
    pub side_length: f64,
    pub c_log: f64,
    /// c_log·ln(π/s), the part of the logarithm that moves with the piston.
    pub log_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub a: f64,
    pub fitted: BTreeMap<String, f64>,
    pub uncertainty: BTreeMap<String, f64>,
    pub reference: BTreeMap<String, f64>,
    pub condition_estimate: f64,
    pub residual_rms: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub side_log: Vec<SideLogContent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientFlag {
    pub coefficient: String,
    pub varies_with_a: bool,
    pub spread: f64,
    pub max_uncertainty: f64,
    pub expected_to_vary: bool,
}

impl CoefficientFlag {
    pub fn as_expected(&self) -> bool {
        self.varies_with_a == self.expected_to_vary
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportTable {
    pub quantity: Quantity,
    pub basis: String,
    pub rows: Vec<ReportRow>,
    pub flags: Vec<CoefficientFlag>,
}

impl ReportTable {
    pub fn flag(&self, coefficient: &str) -> Option<&CoefficientFlag> {
        self.flags.iter().find(|f| f.coefficient == coefficient)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub length: f64,
    pub xi_grid: Vec<f64>,
    pub inhomogeneous: ReportTable,
    pub ideal: ReportTable,
}

/// One tidy record per (quantity, a, coefficient).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRecord {
    pub quantity: String,
    pub a: f64,
    pub coefficient: String,
    pub fitted: f64,
    pub uncertainty: f64,
    pub reference: f64,
    pub varies_with_a: bool,
}

/// Spread across positions counts as variation when it beats three times
/// the largest uncertainty and a relative floor of 10⁻⁴.
fn flag_for(rows: &[ReportRow], name: &str, expected: bool) -> CoefficientFlag {
    let values: Vec<f64> = rows.iter().map(|r| r.fitted[name]).collect();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if values.is_empty() { 0.0 } else { hi - lo };
    let max_uncertainty = rows.iter().map(|r| r.uncertainty[name]).fold(0.0, f64::max);
    let magnitude = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    CoefficientFlag {
        coefficient: name.to_string(),
        varies_with_a: spread > 3.0 * max_uncertainty && spread > 1e-4 * magnitude,
        spread,
        max_uncertainty,
        expected_to_vary: expected,
    }
}

fn table(
    quantity: Quantity,
    basis: &Basis,
    length: f64,
    a_grid: &[f64],
    xi_grid: &[f64],
) -> Result<ReportTable> {
    let mut rows = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let geometry = PistonGeometry::new(length, a)?;
        let fit = laurent_fit(&quantity.sample(&geometry, xi_grid)?, basis)?;
        let fitted_all = fit.as_coefficients();
        let reference = match quantity {
            Quantity::IdealEnergy => ideal_piston::asymptotic_coefficients(&geometry).to_laurent(),
            Quantity::DenergyDalpha => perturbation::asymptotic_coefficients(&geometry)?,
        };
        let mut fitted = BTreeMap::new();
        let mut uncertainty = BTreeMap::new();
        let mut refs = BTreeMap::new();
        for name in GROUPS {
            fitted.insert(name.to_string(), group_value(&fitted_all, name));
            uncertainty.insert(name.to_string(), fit_uncertainty(&fit, name));
            refs.insert(name.to_string(), group_value(&reference, name));
        }
        let side_log = match quantity {
            Quantity::IdealEnergy => Vec::new(),
            Quantity::DenergyDalpha => Side::BOTH
                .iter()
                .map(|&side| {
                    let c = perturbation::asymptotic_coefficients_side(&geometry, side)?;
                    let s = geometry.side_length(side);
                    Ok(SideLogContent {
                        side,
                        side_length: s,
                        c_log: c.log,
                        log_shift: c.log * (std::f64::consts::PI / s).ln(),
                    })
                })
                .collect::<Result<_>>()?,
        };
        rows.push(ReportRow {
            a,
            fitted,
            uncertainty,
            reference: refs,
            condition_estimate: fit.condition_estimate,
            residual_rms: fit.residual_rms,
            side_log,
        });
    }
    let expected = |name: &str| match quantity {
        Quantity::IdealEnergy => name == "c0",
        Quantity::DenergyDalpha => matches!(name, "c-3" | "c-1" | "c0"),
    };
    let flags = GROUPS.iter().map(|&n| flag_for(&rows, n, expected(n))).collect();
    Ok(ReportTable {
        quantity,
        basis: basis.to_string(),
        rows,
        flags,
    })
}

/// Fits both the dielectric response and the empty-piston energy at each
/// position in `a_grid` and flags which coefficients move with the piston.
pub fn divergence_report(
    length: f64,
    a_grid: &[f64],
    xi_grid: &[f64],
    inhomogeneous_basis: Option<&Basis>,
    ideal_basis: Option<&Basis>,
) -> Result<DivergenceReport> {
    if a_grid.is_empty() {
        return Err(PistonError::Input("empty a grid".into()));
    }
    let inh_default = Quantity::DenergyDalpha.default_basis();
    let ideal_default = Quantity::IdealEnergy.default_basis();
    let inhomogeneous = table(
        Quantity::DenergyDalpha,
        inhomogeneous_basis.unwrap_or(&inh_default),
        length,
        a_grid,
        xi_grid,
    )?;
    let ideal = table(
        Quantity::IdealEnergy,
        ideal_basis.unwrap_or(&ideal_default),
        length,
        a_grid,
        xi_grid,
    )?;
    Ok(DivergenceReport {
        length,
        xi_grid: xi_grid.to_vec(),
        inhomogeneous,
        ideal,
    })
}

impl DivergenceReport {
    pub fn records(&self) -> Vec<ReportRecord> {
        let mut out = Vec::new();
        for t in [&self.inhomogeneous, &self.ideal] {
            for row in &t.rows {
                for name in GROUPS {
                    out.push(ReportRecord {
                        quantity: t.quantity.to_string(),
                        a: row.a,
                        coefficient: name.to_string(),
                        fitted: row.fitted[name],
                        uncertainty: row.uncertainty[name],
                        reference: row.reference[name],
                        varies_with_a: t.flag(name).is_some_and(|f| f.varies_with_a),
                    });
                }
            }
        }
        out
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "L = {}; {} cutoff samples in [{:e}, {:e}]",
            self.length,
            self.xi_grid.len(),
            self.xi_grid.iter().copied().fold(f64::INFINITY, f64::min),
            self.xi_grid.iter().copied().fold(0.0, f64::max)
        );
        for t in [&self.inhomogeneous, &self.ideal] {
            let _ = writeln!(out, "\n{} (basis {})", t.quantity, t.basis);
            let _ = write!(out, "{:>8}", "a");
            for name in GROUPS {
                let _ = write!(out, " {name:>24}");
            }
            let _ = writeln!(out);
            for row in &t.rows {
                let _ = write!(out, "{:>8.4}", row.a);
                for name in GROUPS {
                    let _ = write!(out, " {:>24.16e}", row.fitted[name]);
                }
                let _ = writeln!(out);
            }
            let _ = write!(out, "{:>8}", "varies");
            for name in GROUPS {
                let f = t.flag(name).expect("every group is flagged");
                let mark = match (f.varies_with_a, f.as_expected()) {
                    (true, true) => "yes",
                    (false, true) => "no",
                    (true, false) => "yes (unexpected)",
                    (false, false) => "no (unexpected)",
                };
                let _ = write!(out, " {mark:>24}");
            }
            let _ = writeln!(out);
        }
        out
    }
}
