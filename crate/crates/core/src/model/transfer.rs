//! Transfer-matrix eigenfrequencies of a layered side cavity.
//!
//! The permittivity is replaced by `n_layers` homogeneous slabs sampled at
//! their midpoints. Within a slab the transverse field obeys
//! `ψ'' + (ω²ε − k∥²) ψ = 0`. For λ = 1 the state is (E, E') with E = 0 on
//! both mirrors; for λ = 2 it is (H, H'/ε) with H'/ε = 0 on both mirrors.
//! Roots of the end-wall condition are bracketed on a frequency grid and
//! bisected to machine precision.

use std::f64::consts::PI;

use super::{omega0, DielectricProfile, Mode, PistonGeometry, Polarization, Side};
use crate::error::{PistonError, Result};

struct Layers {
    eps: Vec<f64>,
    width: f64,
}

impl Layers {
    fn new(geometry: &PistonGeometry, side: Side, profile: &DielectricProfile, n: usize) -> Self {
        let (x0, x1) = geometry.side_interval(side);
        let width = (x1 - x0) / n as f64;
        let eps = (0..n)
            .map(|j| 1.0 + profile.delta_eps(geometry, x0 + (j as f64 + 0.5) * width))
            .collect();
        Self { eps, width }
    }

    /// End-wall boundary functional; zero exactly at an eigenfrequency.
    fn dispersion(&self, omega: f64, k_par: f64, polarization: Polarization) -> f64 {
        let (mut psi, mut phi) = match polarization {
            Polarization::Te => (0.0, 1.0),
            Polarization::Tm => (1.0, 0.0),
        };
        let d = self.width;
        for &eps in &self.eps {
            let q2 = omega * omega * eps - k_par * k_par;
            let (c, s) = propagate(q2, d);
            let w = match polarization {
                Polarization::Te => 1.0,
                Polarization::Tm => eps,
            };
            let next_psi = c * psi + w * s * phi;
            let next_phi = -q2 * s / w * psi + c * phi;
            psi = next_psi;
            phi = next_phi;
            let scale = psi.abs() + phi.abs();
            if scale > 1e100 {
                psi /= scale;
                phi /= scale;
            }
        }
        match polarization {
            Polarization::Te => psi,
            Polarization::Tm => phi,
        }
    }
}

/// (cos qd, sin(qd)/q) continued analytically through q² ≤ 0.
fn propagate(q2: f64, d: f64) -> (f64, f64) {
    if q2 > 0.0 {
        let q = q2.sqrt();
        let x = q * d;
        if x < 1e-4 {
            (x.cos(), d * (1.0 - x * x / 6.0))
        } else {
            (x.cos(), x.sin() / q)
        }
    } else if q2 < 0.0 {
        let kappa = (-q2).sqrt();
        let x = kappa * d;
        if x < 1e-4 {
            (x.cosh(), d * (1.0 + x * x / 6.0))
        } else {
            (x.cosh(), x.sinh() / kappa)
        }
    } else {
        (1.0, d)
    }
}

/// All eigenfrequencies of the layered `side` cavity below `omega_max`,
/// ascending.
pub fn transfer_matrix_eigenfrequencies(
    geometry: &PistonGeometry,
    side: Side,
    profile: &DielectricProfile,
    k_par: f64,
    polarization: Polarization,
    omega_max: f64,
    n_layers: usize,
) -> Result<Vec<f64>> {
    if n_layers == 0 {
        return Err(PistonError::Input("n_layers must be at least 1".into()));
    }
    if !(omega_max.is_finite() && omega_max > 0.0) {
        return Err(PistonError::Input(format!("omega_max must be > 0, got {omega_max}")));
    }
    if !(k_par.is_finite() && k_par >= 0.0) {
        return Err(PistonError::Input(format!("k_par must be >= 0, got {k_par}")));
    }
    profile.validate(geometry)?;
    if 1.0 + profile.min_value() <= 0.0 || profile.min_value().is_nan() {
        return Err(PistonError::Profile(
            "permittivity 1 + δε must stay positive for the transfer-matrix oracle".into(),
        ));
    }
    let layers = Layers::new(geometry, side, profile, n_layers);
    let s = geometry.side_length(side);
    let n_max = (1.0 + profile.max_abs()).sqrt();
    let p1 = PI / (s * n_max);
    // the tightest gap is between the two lowest branches at this k∥
    let gap = ((k_par / n_max).hypot(p1) - k_par / n_max).max(1e-300);
    let step = 0.125 * gap.min(p1);
    let n_steps = (omega_max / step).ceil() as usize;
    if n_steps > 50_000_000 {
        return Err(PistonError::Resource(format!(
            "frequency scan would need {n_steps} grid points"
        )));
    }
    let f = |w: f64| layers.dispersion(w, k_par, polarization);

    let mut grid = Vec::with_capacity(n_steps + 1);
    let start = step / 64.0;
    for i in 0..=n_steps {
        let w = if i == 0 { start } else { (i as f64 * step).min(omega_max) };
        grid.push((w, f(w)));
        if w >= omega_max {
            break;
        }
    }

    let peak = grid.iter().map(|g| g.1.abs()).fold(0.0, f64::max);
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (w0, f0) = grid[i];
        let (w1, f1) = grid[i + 1];
        if f0 == 0.0 {
            roots.push(w0);
            continue;
        }
        if f0.signum() != f1.signum() && f1 != 0.0 {
            roots.push(bisect(&f, w0, f0, w1));
        }
        // a touching minimum without a sign change means two roots share a cell
        if i > 0 {
            let fm = grid[i - 1].1;
            if f0.abs() < fm.abs()
                && f0.abs() < f1.abs()
                && fm.signum() == f0.signum()
                && f1.signum() == f0.signum()
                && f0.abs() < 1e-9 * peak
            {
                return Err(PistonError::Bracket {
                    message: format!("unresolved root pair near omega = {w0}"),
                    grid,
                });
            }
        }
    }
    if let Some(&(w, fw)) = grid.last() {
        if fw == 0.0 {
            roots.push(w);
        }
    }
    Ok(roots)
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut f_lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The layered-cavity frequency on the branch labelled by `mode`
/// (same side, `m`, k∥ and polarization).
pub fn transfer_matrix_mode_frequency(
    geometry: &PistonGeometry,
    mode: &Mode,
    profile: &DielectricProfile,
    n_layers: usize,
) -> Result<f64> {
    let index = match mode.polarization() {
        Polarization::Te => mode.m() as usize - 1,
        Polarization::Tm if mode.k_par() > 0.0 => mode.m() as usize,
        Polarization::Tm if mode.m() == 0 => {
            return Err(PistonError::InvalidMode(
                "the m = 0, k_par = 0 mode has zero frequency".into(),
            ))
        }
        Polarization::Tm => mode.m() as usize - 1,
    };
    let next = Mode::new(mode.side(), mode.m() + 1, mode.k_par(), mode.polarization())?;
    let upper = omega0(geometry, &next) / (1.0 - profile.max_abs().min(0.5)).sqrt();
    let roots = transfer_matrix_eigenfrequencies(
        geometry,
        mode.side(),
        profile,
        mode.k_par(),
        mode.polarization(),
        upper,
        n_layers,
    )?;
    roots.get(index).copied().ok_or_else(|| {
        PistonError::Input(format!(
            "found only {} roots below {upper}; branch {index} missing",
            roots.len()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cavity_dirichlet_spectrum() {
        let g = PistonGeometry::new(1.0, 0.4).unwrap();
        let vacuum = DielectricProfile::sinusoidal(0.0).unwrap();
        for pol in Polarization::BOTH {
            let roots = transfer_matrix_eigenfrequencies(&g, Side::Left, &vacuum, 0.0, pol, 80.0, 16)
                .unwrap();
            assert_eq!(roots.len(), 10, "{pol:?}: {roots:?}");
            for (i, w) in roots.iter().enumerate() {
                let want = (i + 1) as f64 * PI / 0.4;
                assert!(((w - want) / want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tm_zero_mode_appears_at_k_par() {
        let g = PistonGeometry::new(1.0, 0.4).unwrap();
        let vacuum = DielectricProfile::sinusoidal(0.0).unwrap();
        let roots =
            transfer_matrix_eigenfrequencies(&g, Side::Right, &vacuum, 2.5, Polarization::Tm, 12.0, 8)
                .unwrap();
        assert!((roots[0] - 2.5).abs() < 1e-12, "{roots:?}");
        let te =
            transfer_matrix_eigenfrequencies(&g, Side::Right, &vacuum, 2.5, Polarization::Te, 12.0, 8)
                .unwrap();
        assert!((te[0] - (PI / 0.6).hypot(2.5)).abs() < 1e-12);
    }

    #[test]
    fn uniform_medium_scales_frequencies() {
        let g = PistonGeometry::new(1.0, 0.5).unwrap();
        let uniform = DielectricProfile::uniform(1.0, 0.21).unwrap();
        let mode = Mode::new(Side::Left, 2, 0.0, Polarization::Te).unwrap();
        let w = transfer_matrix_mode_frequency(&g, &mode, &uniform, 4).unwrap();
        assert!((w - omega0(&g, &mode) / 1.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = PistonGeometry::new(1.0, 0.5).unwrap();
        let p = DielectricProfile::sinusoidal(0.0).unwrap();
        assert!(transfer_matrix_eigenfrequencies(&g, Side::Left, &p, 0.0, Polarization::Te, 10.0, 0).is_err());
        assert!(transfer_matrix_eigenfrequencies(&g, Side::Left, &p, 0.0, Polarization::Te, -1.0, 4).is_err());
        let strong = DielectricProfile::sinusoidal(-2.0).unwrap();
        assert!(transfer_matrix_eigenfrequencies(&g, Side::Left, &strong, 0.0, Polarization::Te, 10.0, 4).is_err());
    }
}
