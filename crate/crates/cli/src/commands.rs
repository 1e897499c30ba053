use std::path::Path;
use std::str::FromStr;

use casimir_piston::acceptance::{self, Outcome, DEFAULT_SEED};
use casimir_piston::asymptotics::{
    divergence_report, extract_c0, laurent_fit, log_grid, Basis, LaurentCoefficients, Quantity,
};
use casimir_piston::ideal_piston::{self, SumOptions, DEFAULT_MAX_TERMS};
use casimir_piston::model::{
    omega0, transfer_matrix_mode_frequency, DielectricProfile, Mode, PistonGeometry, Polarization,
    Regulator, Side,
};
use casimir_piston::perturbation;
use casimir_piston::precise::to_f64;
use casimir_piston::{Method, PistonError};
use clap::ValueEnum;
use serde_json::json;

use crate::config::{self, pick, require, FileConfig, Section};
use crate::output::{write_to, Context, Dim, Format, PlotRow, Record, Report, Units};
use crate::{
    CliError, Cli, Command, DenergyArgs, DenergyMethod, FitArgs, GeometryArgs, IdealCommand,
    IdealEnergyArgs, IdealMethod, IntegralArgs, LaurentCommand, ModeArgs, OracleArgs,
    PerturbCommand, ProfileArgs, ReportArgs, ShiftArgs, ShiftMethod, WindowArgs,
};

const DEFAULT_XI_MIN: f64 = 1e-3;
const DEFAULT_XI_MAX: f64 = 1e-2;
const DEFAULT_POINTS: usize = 20;
const DEFAULT_LAYERS: usize = 256;
const DEFAULT_ORACLE_ALPHA: f64 = 1e-4;

fn usage(e: PistonError) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(path) => config::load(path)?,
        None => FileConfig::default(),
    };
    let format = pick(cli.global.format, &file.format).unwrap_or(Format::Json);
    let output = pick(cli.global.output.clone(), &file.output);
    let plot_path = pick(cli.global.emit_plot_data.clone(), &file.emit_plot_data);
    let seed = pick(cli.global.seed, &file.seed).unwrap_or(DEFAULT_SEED);
    let hbar_c = pick(cli.global.si, &file.si);
    if let Some(h) = hbar_c {
        if !(h.is_finite() && h > 0.0) {
            return Err(CliError::Usage(format!("--si needs a positive value of hbar*c, got {h}")));
        }
    }
    let units = Units { hbar_c };

    let (report, passed) = match cli.command {
        Command::Ideal(IdealCommand::Energy(args)) => (ideal_energy(args, &file.ideal, units)?, true),
        Command::Ideal(IdealCommand::Force(args)) => (ideal_force(args, &file.ideal, units)?, true),
        Command::Perturb(PerturbCommand::Shift(args)) => (shift(args, &file.perturb, units)?, true),
        Command::Perturb(PerturbCommand::Integral(args)) => {
            (integral(args, &file.perturb, units)?, true)
        }
        Command::Perturb(PerturbCommand::Denergy(args)) => {
            (denergy(args, &file.perturb, units)?, true)
        }
        Command::Perturb(PerturbCommand::Oracle(args)) => (oracle(args, &file.perturb, units)?, true),
        Command::Laurent(LaurentCommand::Fit(args)) => (fit(args, &file.laurent, units)?, true),
        Command::Laurent(LaurentCommand::Report(args)) => {
            (report(args, &file.laurent, units)?, true)
        }
        Command::Reproduce(args) => reproduce(&args.name, seed, units)?,
    };

    if plot_path.is_some() && report.plot.is_empty() {
        return Err(CliError::Usage(format!(
            "`{}` has no cutoff-dependent data for --emit-plot-data",
            report.command
        )));
    }
    write_to(output.as_deref(), &report.render(format)?)?;
    if let Some(p) = plot_path {
        write_to(Some(&p), &report.plot_csv()?)?;
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

fn geometry(args: &GeometryArgs, sec: &Section) -> Result<PistonGeometry, CliError> {
    let l = require(pick(args.length, &sec.length), "L")?;
    let a = require(pick(args.a, &sec.a), "a")?;
    PistonGeometry::new(l, a).map_err(usage)
}

fn regulator(xi: Option<f64>, sec: &Section) -> Result<Regulator, CliError> {
    Regulator::new(require(pick(xi, &sec.xi), "xi")?).map_err(usage)
}

fn method<T: ValueEnum>(flag: Option<T>, file: &Option<String>, default: T) -> Result<T, CliError> {
    match (flag, file) {
        (Some(m), _) => Ok(m),
        (None, Some(s)) => T::from_str(s, true)
            .map_err(|_| CliError::Usage(format!("unknown method '{s}' in config"))),
        (None, None) => Ok(default),
    }
}

fn mode(args: &ModeArgs, k_par: f64, sec: &Section) -> Result<Mode, CliError> {
    let side = match pick(args.side.clone(), &sec.side) {
        Some(s) => Side::from_str(&s).map_err(usage)?,
        None => Side::Left,
    };
    let m = require(pick(args.m, &sec.m), "m")?;
    let polarization = polarization(require(pick(args.lambda, &sec.lambda), "lambda")?)?;
    Mode::new(side, m, k_par, polarization).map_err(usage)
}

fn polarization(lambda: u8) -> Result<Polarization, CliError> {
    match lambda {
        1 => Ok(Polarization::Te),
        2 => Ok(Polarization::Tm),
        other => Err(CliError::Usage(format!("--lambda must be 1 or 2, got {other}"))),
    }
}

fn profile(
    args: &ProfileArgs,
    sec: &Section,
    default_alpha: f64,
    geometry: &PistonGeometry,
) -> Result<DielectricProfile, CliError> {
    let choice = pick(args.profile.clone(), &sec.profile).unwrap_or_else(|| "sin".into());
    let alpha = pick(args.alpha, &sec.alpha);
    let profile = if choice == "sin" {
        DielectricProfile::sinusoidal(alpha.unwrap_or(default_alpha)).map_err(usage)?
    } else if let Some(path) = choice.strip_prefix("file:") {
        if alpha.is_some() {
            return Err(CliError::Usage("--alpha applies only to --profile sin".into()));
        }
        read_profile(Path::new(path))?
    } else {
        return Err(CliError::Usage(format!(
            "unknown profile '{choice}' (expected sin or file:PATH)"
        )));
    };
    profile.validate(geometry).map_err(usage)?;
    Ok(profile)
}

/// Two columns, x and delta_eps; an optional header row is skipped.
fn read_profile(path: &Path) -> Result<DielectricProfile, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read profile {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if row.len() != 2 {
            return Err(CliError::Usage(format!(
                "{}: row {} has {} columns, expected x,delta_eps",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        match (row[0].parse::<f64>(), row[1].parse::<f64>()) {
            (Ok(x), Ok(d)) => samples.push((x, d)),
            _ if i == 0 => continue,
            _ => {
                return Err(CliError::Usage(format!(
                    "{}: row {} is not numeric",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    DielectricProfile::tabulated(samples).map_err(usage)
}

fn window(args: &WindowArgs, sec: &Section) -> Result<Vec<f64>, CliError> {
    let lo = pick(args.xi_min, &sec.xi_min).unwrap_or(DEFAULT_XI_MIN);
    let hi = pick(args.xi_max, &sec.xi_max).unwrap_or(DEFAULT_XI_MAX);
    let n = pick(args.points, &sec.points).unwrap_or(DEFAULT_POINTS);
    log_grid(lo, hi, n).map_err(usage)
}

fn parse_basis(text: Option<String>) -> Result<Option<Basis>, CliError> {
    text.map(|t| Basis::parse(&t).map_err(|e| CliError::Usage(format!("malformed basis: {e}"))))
        .transpose()
}

/// `start:stop:count`, inclusive, evenly spaced.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("malformed grid '{text}', expected start:stop:count"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() || (count == 1 && start != stop) {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { stop } else { start + i as f64 * step })
        .collect())
}

fn deltas(report: &mut Report, quantity: &str, values: &[(String, f64)], dim: Dim, ctx: Context) {
    for (i, (ma, va)) in values.iter().enumerate() {
        for (mb, vb) in &values[i + 1..] {
            let method = format!("{ma}-{mb}");
            report.push(ctx.apply(Record::new(format!("{quantity}_delta"), &method, va - vb, dim)));
            report.push(ctx.apply(Record::new(
                format!("{quantity}_relative_delta"),
                &method,
                (va - vb) / vb.abs(),
                Dim::Dimensionless,
            )));
        }
    }
}

fn ideal_energy(args: IdealEnergyArgs, sec: &Section, units: Units) -> Result<Report, CliError> {
    let g = geometry(&args.geometry, sec)?;
    let r = regulator(args.xi, sec)?;
    let which = method(args.method, &sec.method, IdealMethod::Closed)?;
    let options = SumOptions {
        max_terms: pick(args.max_terms, &sec.max_terms).unwrap_or(DEFAULT_MAX_TERMS),
        zero_mode_weight: pick(args.zero_mode_weight, &sec.zero_mode_weight).unwrap_or(1.0),
    };
    let mut report = Report::new("ideal energy", units);
    report.param("L", g.length(), Dim::Length);
    report.param("a", g.position(), Dim::Length);
    report.param("xi", r.xi(), Dim::Length);
    let ctx = Context {
        a: Some(g.position()),
        xi: Some(r.xi()),
        ..Context::default()
    };
    let mut results = Vec::new();
    if matches!(which, IdealMethod::Numeric | IdealMethod::All) {
        results.push(ideal_piston::energy_numeric(&g, &r, options)?);
    }
    if matches!(which, IdealMethod::Closed | IdealMethod::All) {
        results.push(ideal_piston::energy_closed(&g, &r)?);
    }
    if matches!(which, IdealMethod::Asymptotic | IdealMethod::All) {
        results.push(ideal_piston::energy_asymptotic(&g, &r));
    }
    let mut values = Vec::new();
    for e in results {
        report.push(ctx.apply(Record::new("energy_per_area", e.method, e.value, Dim::Energy(-3))));
        report.plot.push(PlotRow {
            quantity: "energy_per_area".into(),
            a: g.position(),
            xi: r.xi(),
            method: e.method.to_string(),
            value: e.value,
            dim: Dim::Energy(-3),
        });
        report.warnings.extend(e.warning);
        values.push((e.method.to_string(), e.value));
    }
    deltas(&mut report, "energy_per_area", &values, Dim::Energy(-3), ctx);
    Ok(report)
}

fn ideal_force(args: GeometryArgs, sec: &Section, units: Units) -> Result<Report, CliError> {
    let g = geometry(&args, sec)?;
    let mut report = Report::new("ideal force", units);
    report.param("L", g.length(), Dim::Length);
    report.param("a", g.position(), Dim::Length);
    let mut r = Record::new(
        "force_per_area",
        Method::Closed,
        ideal_piston::force_per_area(&g),
        Dim::Energy(-4),
    );
    r.a = Some(g.position());
    report.push(r);
    Ok(report)
}

fn mode_context(m: &Mode) -> Context {
    Context {
        side: Some(m.side()),
        m: Some(m.m()),
        lambda: Some(m.polarization().lambda()),
        k_par: Some(m.k_par()),
        ..Context::default()
    }
}

fn mode_params(report: &mut Report, g: &PistonGeometry, m: &Mode) {
    report.param("L", g.length(), Dim::Length);
    report.param("a", g.position(), Dim::Length);
    report.param_label("side", m.side());
    report.param("m", f64::from(m.m()), Dim::Index);
    report.param("lambda", f64::from(m.polarization().lambda()), Dim::Index);
    report.param("k_par", m.k_par(), Dim::Frequency);
}

fn profile_params(report: &mut Report, profile: &DielectricProfile) {
    match profile {
        DielectricProfile::Sinusoidal { alpha } => {
            report.param_label("profile", "sin");
            report.param("alpha", *alpha, Dim::Dimensionless);
        }
        DielectricProfile::Tabulated { samples } => {
            report.param_label("profile", "tabulated");
            report.param("profile_samples", samples.len() as f64, Dim::Index);
        }
    }
}

fn shift(args: ShiftArgs, sec: &Section, units: Units) -> Result<Report, CliError> {
    let g = geometry(&args.geometry, sec)?;
    let k = pick(args.kpar, &sec.kpar).unwrap_or(0.0);
    let md = mode(&args.mode, k, sec)?;
    let prof = profile(&args.profile, sec, 1.0, &g)?;
    let which = method(args.method, &sec.method, ShiftMethod::All)?;
    let mut report = Report::new("perturb shift", units);
    mode_params(&mut report, &g, &md);
    profile_params(&mut report, &prof);
    let ctx = mode_context(&md);
    let w0 = omega0(&g, &md);
    report.push(ctx.apply(Record::new("omega0", Method::Closed, w0, Dim::Frequency)));

    let mut values = Vec::new();
    if matches!(which, ShiftMethod::Quadrature | ShiftMethod::All) {
        let s = perturbation::first_order_shift_quadrature(&g, &md, &prof)?;
        values.push((s.method.to_string(), s.omega1));
    }
    if matches!(which, ShiftMethod::Closed | ShiftMethod::All) {
        match prof {
            DielectricProfile::Sinusoidal { alpha } => {
                let s = perturbation::first_order_shift_closed(&g, &md, alpha);
                values.push((s.method.to_string(), s.omega1));
            }
            _ if which == ShiftMethod::Closed => {
                return Err(CliError::Usage(
                    "the closed form needs --profile sin; use --method quadrature".into(),
                ))
            }
            _ => report
                .warnings
                .push("closed form skipped: it exists only for the sinusoidal profile".into()),
        }
    }
    for (m, v) in &values {
        report.push(ctx.apply(Record::new("omega1", m, *v, Dim::Frequency)));
        report.push(ctx.apply(Record::new("omega1_over_omega0", m, v / w0, Dim::Dimensionless)));
    }
    deltas(&mut report, "omega1", &values, Dim::Frequency, ctx);
    Ok(report)
}

fn integral(args: IntegralArgs, sec: &Section, units: Units) -> Result<Report, CliError> {
    let g = geometry(&args.geometry, sec)?;
    let r = regulator(args.xi, sec)?;
    let md = mode(&args.mode, 0.0, sec)?;
    let which = method(args.method, &sec.method, ShiftMethod::All)?;
    let (side, m, pol) = (md.side(), md.m(), md.polarization());
    let mut report = Report::new("perturb integral", units);
    report.param("L", g.length(), Dim::Length);
    report.param("a", g.position(), Dim::Length);
    report.param_label("side", side);
    report.param("m", f64::from(m), Dim::Index);
    report.param("lambda", f64::from(pol.lambda()), Dim::Index);
    report.param("xi", r.xi(), Dim::Length);
    let ctx = Context {
        side: Some(side),
        m: Some(m),
        lambda: Some(pol.lambda()),
        a: Some(g.position()),
        xi: Some(r.xi()),
        ..Context::default()
    };
    let mut results = Vec::new();
    if matches!(which, ShiftMethod::Quadrature | ShiftMethod::All) {
        results.push(perturbation::appendix_integral_quadrature(&g, side, m, pol, &r)?);
    }
    if matches!(which, ShiftMethod::Closed | ShiftMethod::All) {
        results.push(perturbation::appendix_integral_closed(&g, side, m, pol, &r)?);
    }
    let mut values = Vec::new();
    for i in results {
        report.push(ctx.apply(Record::new("shift_integral", i.method, i.value, Dim::Energy(-3))));
        report.plot.push(PlotRow {
            quantity: "shift_integral".into(),
            a: g.position(),
            xi: r.xi(),
            method: i.method.to_string(),
            value: i.value,
            dim: Dim::Energy(-3),
        });
        values.push((i.method.to_string(), i.value));
    }
    deltas(&mut report, "shift_integral", &values, Dim::Energy(-3), ctx);
    Ok(report)
}

fn denergy(args: DenergyArgs, sec: &Section, units: Units) -> Result<Report, CliError> {
    let g = geometry(&args.geometry, sec)?;
    let r = regulator(args.xi, sec)?;
    let which = method(args.method, &sec.method, DenergyMethod::Closed)?;
    let options = SumOptions {
        max_terms: pick(args.max_terms, &sec.max_terms).unwrap_or(DEFAULT_MAX_TERMS),
        ..SumOptions::default()
    };
    let zero_mode = pick(args.zero_mode.then_some(true), &sec.zero_mode).unwrap_or(false);
    let mut report = Report::new("perturb denergy", units);
    report.param("L", g.length(), Dim::Length);
    report.param("a", g.position(), Dim::Length);
    report.param("xi", r.xi(), Dim::Length);
    let ctx = Context {
        a: Some(g.position()),
        xi: Some(r.xi()),
        ..Context::default()
    };
    let mut results = Vec::new();
    if matches!(which, DenergyMethod::Sum | DenergyMethod::All) {
        results.push(perturbation::denergy_dalpha_sum(&g, &r, options)?);
    }
    if matches!(which, DenergyMethod::Closed | DenergyMethod::All) {
        results.push(perturbation::denergy_dalpha_closed(&g, &r)?);
    }
    if matches!(which, DenergyMethod::Asymptotic | DenergyMethod::All) {
        results.push(perturbation::denergy_dalpha_asymptotic(&g, &r)?);
    }
    let mut values = Vec::new();
    for e in results {
        report.push(ctx.apply(Record::new("denergy_dalpha", e.method, e.value, Dim::Energy(-3))));
        report.plot.push(PlotRow {
            quantity: "denergy_dalpha".into(),
            a: g.position(),
            xi: r.xi(),
            method: e.method.to_string(),
            value: e.value,
            dim: Dim::Energy(-3),
        });
        report.warnings.extend(e.warning);
        values.push((e.method.to_string(), e.value));
    }
    deltas(&mut report, "denergy_dalpha", &values, Dim::Energy(-3), ctx);

    if zero_mode {
        let z = perturbation::zero_mode_report(&g, &r)?;
        for s in &z.sides {
            let side_ctx = Context {
                side: Some(s.side),
                m: Some(0),
                lambda: Some(2),
                ..ctx
            };
            for (q, method, v, dim) in [
                ("zero_mode_shift_ratio", "literal", s.shift_literal_over_omega0, Dim::Dimensionless),
                (
                    "zero_mode_shift_ratio",
                    "normalized",
                    s.shift_normalized_over_omega0,
                    Dim::Dimensionless,
                ),
                ("zero_mode_energy", "literal", s.energy_literal, Dim::Energy(-3)),
                ("zero_mode_energy", "normalized", s.energy_normalized, Dim::Energy(-3)),
            ] {
                report.push(side_ctx.apply(Record::new(q, method, v, dim)));
            }
        }
        report.push(ctx.apply(Record::new(
            "zero_mode_energy_delta",
            "literal-normalized",
            z.energy_difference,
            Dim::Energy(-3),
        )));
        report.push(ctx.apply(Record::new(
            "zero_mode_inverse_cubic_delta",
            "literal-normalized",
            z.inverse_cubic_difference,
            Dim::Energy(0),
        )));
    }
    Ok(report)
}

fn oracle(args: OracleArgs, sec: &Section, units: Units) -> Result<Report, CliError> {
    let g = geometry(&args.geometry, sec)?;
    let k = pick(args.kpar, &sec.kpar).unwrap_or(0.0);
    let md = mode(&args.mode, k, sec)?;
    let prof = profile(&args.profile, sec, DEFAULT_ORACLE_ALPHA, &g)?;
    let layers = pick(args.layers, &sec.layers).unwrap_or(DEFAULT_LAYERS);
    if layers == 0 {
        return Err(CliError::Usage("--layers must be at least 1".into()));
    }
    let mut report = Report::new("perturb oracle", units);
    mode_params(&mut report, &g, &md);
    profile_params(&mut report, &prof);
    report.param("layers", layers as f64, Dim::Index);
    let ctx = mode_context(&md);

    let w0 = omega0(&g, &md);
    let vacuum = DielectricProfile::sinusoidal(0.0)?;
    let base = if md.polarization() == Polarization::Tm && md.m() == 0 {
        w0
    } else {
        transfer_matrix_mode_frequency(&g, &md, &vacuum, layers)?
    };
    let perturbed = transfer_matrix_mode_frequency(&g, &md, &prof, layers)?;
    report.push(ctx.apply(Record::new("omega0", Method::Closed, w0, Dim::Frequency)));
    report.push(ctx.apply(Record::new("omega0", Method::TransferMatrix, base, Dim::Frequency)));

    let mut values = vec![(Method::TransferMatrix.to_string(), perturbed - base)];
    let q = perturbation::first_order_shift_quadrature(&g, &md, &prof)?;
    values.push((q.method.to_string(), q.omega1));
    if let DielectricProfile::Sinusoidal { alpha } = prof {
        let c = perturbation::first_order_shift_closed(&g, &md, alpha);
        values.push((c.method.to_string(), c.omega1));
    }
    for (m, v) in &values {
        report.push(ctx.apply(Record::new("omega_shift", m, *v, Dim::Frequency)));
    }
    deltas(&mut report, "omega_shift", &values, Dim::Frequency, ctx);
    Ok(report)
}

fn coefficient_dim(power: i32) -> Dim {
    Dim::Energy(-3 - power)
}

fn reference_for(q: Quantity, g: &PistonGeometry) -> Result<LaurentCoefficients, CliError> {
    Ok(match q {
        Quantity::IdealEnergy => ideal_piston::asymptotic_coefficients(g).to_laurent(),
        Quantity::DenergyDalpha => perturbation::asymptotic_coefficients(g)?,
    })
}

fn fit(args: FitArgs, sec: &Section, units: Units) -> Result<Report, CliError> {
    let quantity_name = require(pick(args.quantity.clone(), &sec.quantity), "quantity")?;
    let q = Quantity::from_str(&quantity_name).map_err(usage)?;
    let g = geometry(&args.geometry, sec)?;
    let xs = window(&args.window, sec)?;
    let basis = parse_basis(pick(args.basis, &sec.basis))?.unwrap_or_else(|| q.default_basis());
    let samples = q.sample(&g, &xs)?;
    let fit = laurent_fit(&samples, &basis)?;
    let reference = reference_for(q, &g)?;
    let c0 = extract_c0(&fit)?;

    let mut report = Report::new("laurent fit", units);
    report.param_label("quantity", q);
    report.param("L", g.length(), Dim::Length);
    report.param("a", g.position(), Dim::Length);
    report.param("xi_min", fit.xi_min, Dim::Length);
    report.param("xi_max", fit.xi_max, Dim::Length);
    report.param("points", fit.samples as f64, Dim::Index);
    report.param_label("basis", &basis);
    let ctx = Context {
        a: Some(g.position()),
        ..Context::default()
    };
    let names = basis.column_names();
    let mut push = |name: &str, value: f64, unc: f64, reference: Option<f64>, dim: Dim| {
        let mut r = Record::new("coefficient", Method::Fit, value, dim);
        r.coefficient = Some(name.to_string());
        r.uncertainty = Some(unc);
        r.reference = reference;
        report.push(ctx.apply(r));
    };
    for (j, &p) in basis.powers.iter().enumerate() {
        let reference = (p <= 0).then(|| reference.get(p));
        push(&names[j], fit.coefficients[&p], fit.uncertainties[&p], reference, coefficient_dim(p));
    }
    if basis.include_log {
        push("log(xi)", fit.c_log, fit.c_log_uncertainty, Some(reference.log), Dim::Energy(-3));
    }
    for &k in &basis.log_powers {
        push(
            &format!("xi^{k}*log(xi)"),
            fit.log_power_coefficients[&k],
            fit.log_power_uncertainties[&k],
            None,
            coefficient_dim(k),
        );
    }
    let mut r = Record::new("c0", Method::Fit, c0.c0, Dim::Energy(-3));
    r.uncertainty = Some(c0.uncertainty);
    r.reference = Some(reference.get(0));
    report.push(ctx.apply(r));
    report.push(ctx.apply(Record::new(
        "condition_estimate",
        Method::Fit,
        fit.condition_estimate,
        Dim::Dimensionless,
    )));
    report.push(ctx.apply(Record::new(
        "residual_rms",
        Method::Fit,
        fit.residual_rms,
        Dim::Dimensionless,
    )));
    report.warnings.extend(c0.warnings);

    for s in &samples {
        for (method, value) in [("closed", to_f64(s.value)), ("fit", fit.evaluate(s.xi))] {
            report.plot.push(PlotRow {
                quantity: q.to_string(),
                a: g.position(),
                xi: s.xi,
                method: method.into(),
                value,
                dim: Dim::Energy(-3),
            });
        }
    }
    Ok(report)
}

fn group_dim(name: &str) -> Dim {
    match name {
        "c-4" => coefficient_dim(-4),
        "c-3" => coefficient_dim(-3),
        "c-2" => coefficient_dim(-2),
        "c-1" => coefficient_dim(-1),
        _ => coefficient_dim(0),
    }
}

fn report(args: ReportArgs, sec: &Section, units: Units) -> Result<Report, CliError> {
    let length = require(pick(args.length, &sec.length), "L")?;
    if !(length.is_finite() && length > 0.0) {
        return Err(CliError::Usage(format!("--L must be positive, got {length}")));
    }
    let a_grid = match pick(args.a_grid, &sec.a_grid) {
        Some(text) => parse_grid(&text)?,
        None => parse_grid(&format!("{}:{}:7", 0.2 * length, 0.8 * length))?,
    };
    let geometries = a_grid
        .iter()
        .map(|&a| PistonGeometry::new(length, a).map_err(usage))
        .collect::<Result<Vec<_>, _>>()?;
    let xs = window(&args.window, sec)?;
    let basis = parse_basis(pick(args.basis, &sec.basis))?;
    let ideal_basis = parse_basis(pick(args.ideal_basis, &sec.ideal_basis))?;
    let result = divergence_report(length, &a_grid, &xs, basis.as_ref(), ideal_basis.as_ref())?;

    let mut report = Report::new("laurent report", units);
    report.param("L", length, Dim::Length);
    report.param("xi_min", xs[0], Dim::Length);
    report.param("xi_max", xs[xs.len() - 1], Dim::Length);
    report.param("points", xs.len() as f64, Dim::Index);
    report.param_label("basis", &result.inhomogeneous.basis);
    report.param_label("ideal_basis", &result.ideal.basis);
    for rec in result.records() {
        let mut r = Record::new(&rec.quantity, Method::Fit, rec.fitted, group_dim(&rec.coefficient));
        r.a = Some(rec.a);
        r.coefficient = Some(rec.coefficient);
        r.uncertainty = Some(rec.uncertainty);
        r.reference = Some(rec.reference);
        r.flag = Some(rec.varies_with_a);
        report.push(r);
    }
    for table in [&result.inhomogeneous, &result.ideal] {
        for f in &table.flags {
            let mut r = Record::new(
                format!("{}_spread", table.quantity),
                Method::Fit,
                f.spread,
                group_dim(&f.coefficient),
            );
            r.coefficient = Some(f.coefficient.clone());
            r.uncertainty = Some(f.max_uncertainty);
            r.label = Some(if f.expected_to_vary { "expected to vary" } else { "expected constant" }.into());
            r.flag = Some(f.varies_with_a);
            report.push(r);
            if !f.as_expected() {
                report.warnings.push(format!(
                    "{} {}: varies_with_a = {} but expected {}",
                    table.quantity, f.coefficient, f.varies_with_a, f.expected_to_vary
                ));
            }
        }
    }
    report.text = Some(result.to_text());

    for g in &geometries {
        for q in [Quantity::DenergyDalpha, Quantity::IdealEnergy] {
            let reference = reference_for(q, g)?;
            for &xi in &xs {
                let closed = to_f64(q.evaluate(g, xi)?);
                for (method, value) in [("closed", closed), ("asymptotic", reference.evaluate(xi))] {
                    report.plot.push(PlotRow {
                        quantity: q.to_string(),
                        a: g.position(),
                        xi,
                        method: method.into(),
                        value,
                        dim: Dim::Energy(-3),
                    });
                }
            }
        }
    }
    Ok(report)
}

fn reproduce(name: &str, seed: u64, units: Units) -> Result<(Report, bool), CliError> {
    let outcomes: Vec<Outcome> = if name == "all" {
        acceptance::run_all(seed)
    } else {
        vec![acceptance::run(name, seed).map_err(usage)?]
    };
    let passed = outcomes.iter().all(|o| o.passed);
    let mut report = Report::new(format!("reproduce {name}"), units);
    report.param("seed", seed as f64, Dim::Index);

    let mut text = String::new();
    let mut criteria = Vec::new();
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        text.push_str(&format!("[{status}] {:<24} {}\n", o.name, o.summary));
        if let Some(f) = &o.failure {
            text.push_str(&format!("    error: {f}\n"));
        }
        if !o.runtime_within_limit {
            text.push_str("    runtime limit exceeded\n");
        }
        let mut checks = Vec::new();
        for c in &o.checks {
            if !c.passed {
                text.push_str(&format!(
                    "    failed: {} observed {:e} expected {:e} tolerance {:e}\n",
                    c.label, c.observed, c.expected, c.tolerance
                ));
            }
            let mut r = Record::new(o.name, "check", c.observed, Dim::Natural);
            r.label = Some(c.label.clone());
            r.reference = Some(c.expected);
            r.tolerance = Some(c.tolerance);
            r.flag = Some(c.passed);
            report.push(r);
            checks.push(json!({
                "label": c.label,
                "observed": c.observed,
                "expected": c.expected,
                "tolerance": c.tolerance,
                "comparison": c.comparison,
                "units": "natural",
                "method": "check",
                "passed": c.passed,
            }));
        }
        let limit = o
            .runtime_limit_seconds
            .map(|l| json!({"value": l, "units": "s", "method": "input"}));
        let mut entry = json!({
            "name": o.name,
            "summary": o.summary,
            "passed": o.passed,
            "runtime_limit": limit,
            "runtime_within_limit": o.runtime_within_limit,
            "checks": checks,
        });
        if let Some(f) = &o.failure {
            entry["failure"] = json!(f);
        }
        criteria.push(entry);
    }
    text.push_str(&format!(
        "{} of {} passed\n",
        outcomes.iter().filter(|o| o.passed).count(),
        outcomes.len()
    ));
    report.json = Some(json!({
        "command": report.command,
        "seed": {"value": seed, "units": "index", "method": "input"},
        "passed": passed,
        "criteria": criteria,
    }));
    report.text = Some(text);
    Ok((report, passed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.2:0.8:7").unwrap().len(), 7);
        assert_eq!(parse_grid("0.2:0.8:7").unwrap()[6], 0.8);
        assert_eq!(parse_grid("0.5:0.5:1").unwrap(), vec![0.5]);
        for bad in ["0.2:0.8", "a:b:c", "0.2:0.8:0", "0.2:0.8:1"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }
}
