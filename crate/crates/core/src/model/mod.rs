//! Geometry, cavity modes, dielectric profiles and the cutoff regulator.
//!
//! Units are natural (ħ = c = 1). The transverse directions are taken in the
//! continuum limit, so a mode is labelled by its side of the piston, the
//! longitudinal index `m`, the transverse wavenumber `k_par` and its
//! polarization. The transverse phase `e^{i k_par · x}` is dropped
//! throughout: everything downstream consumes only `|E|^2`, which does not
//! depend on the direction of `k_par`.

mod transfer;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PistonError, Result};

pub use transfer::{transfer_matrix_eigenfrequencies, transfer_matrix_mode_frequency};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = PistonError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(PistonError::Input(format!("unknown side '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawGeometry {
    length: f64,
    position: f64,
}

/// A chamber of length `length` (L) split by a mirror at `position` (a).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry")]
pub struct PistonGeometry {
    length: f64,
    position: f64,
}

impl TryFrom<RawGeometry> for PistonGeometry {
    type Error = PistonError;
    fn try_from(raw: RawGeometry) -> Result<Self> {
        PistonGeometry::new(raw.length, raw.position)
    }
}

impl PistonGeometry {
    pub fn new(length: f64, position: f64) -> Result<Self> {
        if !(length.is_finite() && position.is_finite()) {
            return Err(PistonError::Geometry(format!(
                "non-finite length {length} or position {position}"
            )));
        }
        if !(0.0 < position && position < length) {
            return Err(PistonError::Geometry(format!(
                "need 0 < a < L, got a = {position}, L = {length}"
            )));
        }
        Ok(Self { length, position })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn position(&self) -> f64 {
        self.position
    }

    /// Width of the sub-cavity on `side`: a on the left, L − a on the right.
    pub fn side_length(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.position,
            Side::Right => self.length - self.position,
        }
    }

    /// The interval `[x0, x1]` occupied by `side` in chamber coordinates.
    pub fn side_interval(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Left => (0.0, self.position),
            Side::Right => (self.position, self.length),
        }
    }

    /// Same chamber with the mirror at L − a.
    pub fn mirrored(&self) -> Self {
        Self {
            length: self.length,
            position: self.length - self.position,
        }
    }

    pub fn with_position(&self, position: f64) -> Result<Self> {
        Self::new(self.length, position)
    }

    /// Uniform rescaling of every length.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.length * factor, self.position * factor)
    }
}

/// Polarization label λ. `Te` is λ = 1 (field transverse to x̂),
/// `Tm` is λ = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Te, Polarization::Tm];

    pub fn lambda(self) -> u8 {
        match self {
            Polarization::Te => 1,
            Polarization::Tm => 2,
        }
    }
}

impl From<Polarization> for u8 {
    fn from(p: Polarization) -> u8 {
        p.lambda()
    }
}

impl TryFrom<u8> for Polarization {
    type Error = PistonError;
    fn try_from(lambda: u8) -> Result<Self> {
        match lambda {
            1 => Ok(Polarization::Te),
            2 => Ok(Polarization::Tm),
            other => Err(PistonError::InvalidMode(format!(
                "polarization must be 1 or 2, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawMode {
    side: Side,
    m: u32,
    k_par: f64,
    lambda: Polarization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMode")]
pub struct Mode {
    side: Side,
    m: u32,
    k_par: f64,
    #[serde(rename = "lambda")]
    polarization: Polarization,
}

impl TryFrom<RawMode> for Mode {
    type Error = PistonError;
    fn try_from(raw: RawMode) -> Result<Self> {
        Mode::new(raw.side, raw.m, raw.k_par, raw.lambda)
    }
}

impl Mode {
    /// Rejects the (m = 0, λ = 1) combination, which is not a cavity mode.
    pub fn new(side: Side, m: u32, k_par: f64, polarization: Polarization) -> Result<Self> {
        if !(k_par.is_finite() && k_par >= 0.0) {
            return Err(PistonError::InvalidMode(format!(
                "k_par must be finite and >= 0, got {k_par}"
            )));
        }
        if m == 0 && polarization == Polarization::Te {
            return Err(PistonError::InvalidMode(
                "m = 0 with lambda = 1 is not an allowed cavity mode".into(),
            ));
        }
        Ok(Self {
            side,
            m,
            k_par,
            polarization,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k_par(&self) -> f64 {
        self.k_par
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    pub fn with_k_par(&self, k_par: f64) -> Result<Self> {
        Self::new(self.side, self.m, k_par, self.polarization)
    }

    /// Longitudinal wavenumber mπ/s.
    pub fn k_long(&self, geometry: &PistonGeometry) -> f64 {
        self.m as f64 * PI / geometry.side_length(self.side)
    }
}

/// Unperturbed eigenfrequency √((mπ/s)² + k∥²); independent of λ.
pub fn omega0(geometry: &PistonGeometry, mode: &Mode) -> f64 {
    mode.k_long(geometry).hypot(mode.k_par)
}

/// Unperturbed field of `mode` at chamber coordinate `x`, for unit
/// cross-sectional area.
///
/// Components are in the frame (x̂, k̂∥, x̂ × k̂∥). For m = 0 the λ = 2 mode
/// is the uniform x̂ field with amplitude √(1/s), which is what unit
/// normalization over the side volume requires.
pub fn mode_field(geometry: &PistonGeometry, mode: &Mode, x: f64) -> Result<[Complex64; 3]> {
    let local = local_coordinate(geometry, mode.side, x)?;
    let s = geometry.side_length(mode.side);
    let p = mode.k_long(geometry);
    let zero = Complex64::new(0.0, 0.0);
    match mode.polarization {
        Polarization::Te => {
            let amp = (2.0 / s).sqrt() * (p * local).sin();
            Ok([zero, zero, Complex64::new(amp, 0.0)])
        }
        Polarization::Tm if mode.m == 0 => Ok([Complex64::new((1.0 / s).sqrt(), 0.0), zero, zero]),
        Polarization::Tm => {
            let k = mode.k_par;
            let norm = (2.0 / s / (k * k + p * p)).sqrt();
            Ok([
                Complex64::new(norm * k * (p * local).cos(), 0.0),
                Complex64::new(0.0, -norm * p * (p * local).sin()),
                zero,
            ])
        }
    }
}

/// `|E|²` of [`mode_field`] without building the complex vector.
pub fn mode_intensity(geometry: &PistonGeometry, mode: &Mode, x: f64) -> Result<f64> {
    let local = local_coordinate(geometry, mode.side, x)?;
    Ok(intensity_at(geometry, mode, local))
}

pub(crate) fn intensity_at(geometry: &PistonGeometry, mode: &Mode, local: f64) -> f64 {
    let s = geometry.side_length(mode.side);
    let p = mode.k_long(geometry);
    match mode.polarization {
        Polarization::Te => 2.0 / s * (p * local).sin().powi(2),
        Polarization::Tm if mode.m == 0 => 1.0 / s,
        Polarization::Tm => {
            let k2 = mode.k_par * mode.k_par;
            let p2 = p * p;
            2.0 / s * (k2 * (p * local).cos().powi(2) + p2 * (p * local).sin().powi(2)) / (k2 + p2)
        }
    }
}

fn local_coordinate(geometry: &PistonGeometry, side: Side, x: f64) -> Result<f64> {
    let (x0, x1) = geometry.side_interval(side);
    if !(x >= x0 && x <= x1) {
        return Err(PistonError::Input(format!(
            "x = {x} lies outside the {side} cavity [{x0}, {x1}]"
        )));
    }
    Ok(x - x0)
}

/// Relative permittivity perturbation δε(x), with ε(x) = 1 + δε(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DielectricProfile {
    /// α sin(πx/L).
    Sinusoidal { alpha: f64 },
    /// Piecewise-linear interpolation between `(x, delta_eps)` samples.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl DielectricProfile {
    pub fn sinusoidal(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(PistonError::Profile(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self::Sinusoidal { alpha })
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(PistonError::Profile("need at least two samples".into()));
        }
        for (i, &(x, d)) in samples.iter().enumerate() {
            if !(x.is_finite() && d.is_finite()) {
                return Err(PistonError::Profile(format!("sample {i} is not finite")));
            }
            if i > 0 && x <= samples[i - 1].0 {
                return Err(PistonError::Profile(format!(
                    "sample positions must increase strictly (sample {i} at x = {x})"
                )));
            }
        }
        Ok(Self::Tabulated { samples })
    }

    /// δε ≡ `value` on `[0, length]`.
    pub fn uniform(length: f64, value: f64) -> Result<Self> {
        Self::tabulated(vec![(0.0, value), (length, value)])
    }

    /// Checks that the profile is defined over the whole chamber.
    pub fn validate(&self, geometry: &PistonGeometry) -> Result<()> {
        match self {
            Self::Sinusoidal { alpha } if alpha.is_finite() => Ok(()),
            Self::Sinusoidal { alpha } => Err(PistonError::Profile(format!("alpha = {alpha}"))),
            Self::Tabulated { samples } => {
                let first = samples.first().map(|s| s.0).unwrap_or(f64::NAN);
                let last = samples.last().map(|s| s.0).unwrap_or(f64::NAN);
                if first <= 0.0 && last >= geometry.length() {
                    Ok(())
                } else {
                    Err(PistonError::Profile(format!(
                        "samples span [{first}, {last}] but the chamber is [0, {}]",
                        geometry.length()
                    )))
                }
            }
        }
    }

    pub fn delta_eps(&self, geometry: &PistonGeometry, x: f64) -> f64 {
        match self {
            Self::Sinusoidal { alpha } => alpha * (PI * x / geometry.length()).sin(),
            Self::Tabulated { samples } => {
                let idx = samples.partition_point(|s| s.0 <= x);
                if idx == 0 {
                    return samples[0].1;
                }
                if idx == samples.len() {
                    return samples[samples.len() - 1].1;
                }
                let (x0, y0) = samples[idx - 1];
                let (x1, y1) = samples[idx];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Interior points of `[x0, x1]` where the profile has a kink.
    pub fn breakpoints(&self, x0: f64, x1: f64) -> Vec<f64> {
        let mut pts = vec![x0];
        if let Self::Tabulated { samples } = self {
            pts.extend(samples.iter().map(|s| s.0).filter(|&x| x > x0 && x < x1));
        }
        pts.push(x1);
        pts
    }

    /// Upper bound on |δε| over the chamber.
    pub fn max_abs(&self) -> f64 {
        match self {
            Self::Sinusoidal { alpha } => alpha.abs(),
            Self::Tabulated { samples } => samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max),
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            Self::Sinusoidal { alpha } => alpha.min(0.0),
            Self::Tabulated { samples } => samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawRegulator {
    xi: f64,
}

/// Exponential cutoff e^{−ξω}; ξ is a length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRegulator")]
pub struct Regulator {
    xi: f64,
}

impl TryFrom<RawRegulator> for Regulator {
    type Error = PistonError;
    fn try_from(raw: RawRegulator) -> Result<Self> {
        Regulator::new(raw.xi)
    }
}

impl Regulator {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(PistonError::Input(format!("cutoff xi must be > 0, got {xi}")));
        }
        Ok(Self { xi })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn weight(&self, omega: f64) -> f64 {
        (-self.xi * omega).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};

    fn geom(l: f64, a: f64) -> PistonGeometry {
        PistonGeometry::new(l, a).unwrap()
    }

    #[test]
    fn geometry_rejects_mirror_outside_chamber() {
        assert!(PistonGeometry::new(1.0, 0.0).is_err());
        assert!(PistonGeometry::new(1.0, 1.0).is_err());
        assert!(PistonGeometry::new(1.0, 1.5).is_err());
        assert!(PistonGeometry::new(f64::NAN, 0.5).is_err());
        let g = geom(1.0, 0.3);
        assert_eq!(g.side_length(Side::Left) + g.side_length(Side::Right), 1.0);
    }

    #[test]
    fn te_zero_mode_is_rejected() {
        assert!(matches!(
            Mode::new(Side::Left, 0, 1.0, Polarization::Te),
            Err(PistonError::InvalidMode(_))
        ));
        assert!(Mode::new(Side::Left, 0, 1.0, Polarization::Tm).is_ok());
        assert!(Mode::new(Side::Left, 1, -1.0, Polarization::Tm).is_err());
    }

    #[test]
    fn omega0_examples() {
        let g = geom(1.0, 0.5);
        let m = Mode::new(Side::Left, 1, 0.0, Polarization::Te).unwrap();
        assert!((omega0(&g, &m) - 2.0 * PI).abs() < 1e-14);
        let m = Mode::new(Side::Left, 0, 3.0, Polarization::Tm).unwrap();
        assert_eq!(omega0(&g, &m), 3.0);
        let g = geom(1.0, 0.25);
        let m = Mode::new(Side::Right, 2, 1.0, Polarization::Te).unwrap();
        let want = ((2.0 * PI / 0.75).powi(2) + 1.0).sqrt();
        assert!((omega0(&g, &m) - want).abs() < 1e-13);
    }

    #[test]
    fn omega0_exchange_symmetry() {
        let g = geom(1.0, 0.3);
        let left = Mode::new(Side::Left, 3, 1.7, Polarization::Tm).unwrap();
        let right = Mode::new(Side::Right, 3, 1.7, Polarization::Tm).unwrap();
        let (a, b) = (omega0(&g, &left), omega0(&g.mirrored(), &right));
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn te_field_vanishes_at_wall() {
        let g = geom(1.0, 0.6);
        let m = Mode::new(Side::Left, 2, 0.8, Polarization::Te).unwrap();
        let e = mode_field(&g, &m, 0.0).unwrap();
        assert!(e.iter().all(|c| c.norm() == 0.0));
        assert!(mode_field(&g, &m, 0.7).is_err());
    }

    fn norm_integral(g: &PistonGeometry, m: &Mode) -> f64 {
        let (x0, x1) = g.side_interval(m.side());
        integrate(
            |x| {
                mode_field(g, m, x)
                    .unwrap()
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum::<f64>()
            },
            x0,
            x1,
            Tolerance::relative(1e-13),
        )
        .unwrap()
        .value
    }

    #[test]
    fn zero_mode_and_m3_are_normalized() {
        let g = geom(1.0, 0.7);
        let m0 = Mode::new(Side::Left, 0, 2.0, Polarization::Tm).unwrap();
        assert!((norm_integral(&g, &m0) - 1.0).abs() < 1e-12);
        let m3 = Mode::new(Side::Left, 3, 2.0, Polarization::Tm).unwrap();
        assert!((norm_integral(&g, &m3) - 1.0).abs() < 1e-12);
        let r = Mode::new(Side::Right, 4, 0.3, Polarization::Te).unwrap();
        assert!((norm_integral(&g, &r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intensity_matches_field() {
        let g = geom(1.3, 0.4);
        let m = Mode::new(Side::Right, 2, 1.1, Polarization::Tm).unwrap();
        for &x in &[0.4, 0.55, 0.9, 1.3] {
            let from_field: f64 = mode_field(&g, &m, x).unwrap().iter().map(|c| c.norm_sqr()).sum();
            assert!((from_field - mode_intensity(&g, &m, x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn tabulated_profile_interpolates_and_validates() {
        let p = DielectricProfile::tabulated(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        let g = geom(1.0, 0.3);
        assert!((p.delta_eps(&g, 0.25) - 0.5).abs() < 1e-15);
        assert!(p.validate(&g).is_ok());
        assert!(p.validate(&geom(2.0, 0.3)).is_err());
        assert!(DielectricProfile::tabulated(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(DielectricProfile::tabulated(vec![(0.0, f64::NAN), (1.0, 1.0)]).is_err());
        assert_eq!(p.breakpoints(0.3, 1.0), vec![0.3, 0.5, 1.0]);
    }

    #[test]
    fn regulator_weight_in_unit_interval() {
        let r = Regulator::new(0.2).unwrap();
        assert_eq!(r.weight(0.0), 1.0);
        assert!(r.weight(10.0) > 0.0 && r.weight(10.0) < 1.0);
        assert!(Regulator::new(0.0).is_err());
        assert!(Regulator::new(-1.0).is_err());
    }

    #[test]
    fn serde_round_trip_validates() {
        let g: PistonGeometry = serde_json::from_str(r#"{"length":1.0,"position":0.25}"#).unwrap();
        assert_eq!(g.position(), 0.25);
        assert!(serde_json::from_str::<PistonGeometry>(r#"{"length":1.0,"position":2.0}"#).is_err());
        let m: Mode =
            serde_json::from_str(r#"{"side":"left","m":2,"k_par":1.0,"lambda":2}"#).unwrap();
        assert_eq!(m.polarization(), Polarization::Tm);
        let bad = r#"{"side":"left","m":0,"k_par":1.0,"lambda":1}"#;
        assert!(serde_json::from_str::<Mode>(bad).is_err());
        let json = serde_json::to_string(&DielectricProfile::sinusoidal(0.1).unwrap()).unwrap();
        assert_eq!(json, r#"{"kind":"sinusoidal","alpha":0.1}"#);
    }
}
