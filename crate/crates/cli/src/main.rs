use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qdlab_core::dispersion::{bogoliubov_c, regime_classify, BogoliubovParams, DispersionParams};
use qdlab_core::experiments::{
    self, emit, identity_residuals, Campaign, ExperimentConfig, OutputFormat, Report,
};
use qdlab_core::norms::{
    alpha_exponents, prop_b_exponent, solve_admissible, to_f64, Convention, Exponent, Given,
    MuKind, Rational,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "qdlab", version, about = "Dispersive numerics for the linearized quantum-hydrodynamic system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign from a TOML config; exit 0 pass, 1 fail, 2 inconclusive.
    Run(RunArgs),
    /// Tabulate the dispersion relation and its derivatives.
    Dispersion(DispersionArgs),
    /// Residuals of the exact-evolution identities as JSON.
    Boussinesq(BoussinesqArgs),
    /// Pointwise decay of the frequency-localized kernel.
    Decay(DecayArgs),
    /// Complete an admissible pair.
    Admissible(AdmissibleArgs),
    /// Gross-Pitaevskii dispersion measurement.
    Gpe(GpeArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DispersionArgs {
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    kappa: f64,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 1e-2)]
    xi_min: f64,
    #[arg(long, default_value_t = 1e2)]
    xi_max: f64,
    #[arg(long, default_value_t = 41)]
    points: usize,
    /// Bogoliubov parameters `g,n,m`; adds a `bogoliubov_c` column.
    #[arg(long, value_delimiter = ',')]
    bogoliubov: Option<Vec<f64>>,
}

#[derive(Args)]
struct BoussinesqArgs {
    /// Run the identity suite.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DecayArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    block: f64,
    #[arg(long, default_value_t = 1e2)]
    t_min: f64,
    #[arg(long, default_value_t = 1e4)]
    t_max: f64,
    #[arg(long, default_value_t = 12)]
    t_points: usize,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Write the JSON summary here instead of stderr.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct AdmissibleArgs {
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// `schroedinger`, `wave` or `theta:T`.
    #[arg(long, default_value = "schroedinger")]
    mu_kind: MuKind,
    #[arg(long, conflicts_with = "r", required_unless_present = "r")]
    q: Option<Exponent>,
    #[arg(long)]
    r: Option<Exponent>,
    /// Second Lebesgue exponent of the inhomogeneous estimate; defaults to `r`.
    #[arg(long)]
    r1: Option<Exponent>,
    #[arg(long, default_value = "classical")]
    convention: Convention,
}

#[derive(Args)]
struct GpeArgs {
    /// Probed `|xi|` values.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<f64>>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Run(a) => run(a),
        Command::Dispersion(a) => dispersion(a).map(|_| 0),
        Command::Boussinesq(a) => boussinesq(a),
        Command::Decay(a) => decay(a),
        Command::Admissible(a) => admissible(a).map(|_| 0),
        Command::Gpe(a) => gpe(a),
    }
}

fn run(a: RunArgs) -> Result<u8> {
    let mut cfg = ExperimentConfig::from_path(&a.config)?;
    if let Some(out) = a.out {
        cfg.output = out;
    }
    if let Some(format) = a.format {
        cfg.format = format;
    }
    if let Some(seed) = a.seed {
        cfg.rng_seed = seed;
    }
    let report = experiments::run(&cfg)?;
    for path in emit(&report, &cfg.output, cfg.format)? {
        eprintln!("wrote {}", path.display());
    }
    for a in &report.assertions {
        eprintln!("{:<12} {}: {}", a.verdict.as_str(), a.name, a.detail);
    }
    Ok(report.exit_code() as u8)
}

fn sweep(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || lo.is_nan() || hi.is_nan() || lo > hi {
        bail!("need points >= 1 and xi_min <= xi_max");
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let step = |i: usize| i as f64 / (points - 1) as f64;
    Ok(if lo > 0.0 {
        (0..points).map(|i| lo * (hi / lo).powf(step(i))).collect()
    } else {
        (0..points).map(|i| lo + (hi - lo) * step(i)).collect()
    })
}

fn dispersion(a: DispersionArgs) -> Result<()> {
    let params = DispersionParams::new(a.eps, a.kappa)?;
    let bp = match a.bogoliubov.as_deref() {
        Some(&[g, n, m]) => Some(BogoliubovParams::new(g, n, m)?),
        Some(_) => bail!("--bogoliubov takes g,n,m"),
        None => None,
    };
    let mut out = std::io::stdout().lock();
    let mut header = "xi,omega,phi1,phi2,h,h_inv_sqrt,regime".to_string();
    if bp.is_some() {
        header.push_str(",bogoliubov_c");
    }
    writeln!(out, "{header}")?;
    for xi in sweep(a.xi_min, a.xi_max, a.points)? {
        let h = params.hessian_det_eps(xi, a.dim)?;
        let mut fields = vec![
            emit::format_float(xi),
            emit::format_float(params.phi_eps(xi)),
            emit::format_float(params.group_velocity(xi)),
            emit::format_float(params.phi_eps_second(xi)),
            emit::format_float(h),
            emit::format_float(h.powf(-0.5)),
            regime_classify(xi, &params)?.as_str().to_string(),
        ];
        if let Some(bp) = &bp {
            fields.push(emit::format_float(bogoliubov_c(xi, bp)?));
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

fn boussinesq(a: BoussinesqArgs) -> Result<u8> {
    if !a.check {
        bail!("nothing to do; pass --check");
    }
    let mut cfg = ExperimentConfig::for_campaign(Campaign::BoussinesqCheck);
    cfg.dim = a.dim.unwrap_or(cfg.dim);
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.eps = a.eps.unwrap_or(cfg.eps);
    cfg.rng_seed = a.seed.unwrap_or(cfg.rng_seed);
    cfg.validate()?;
    let residuals = identity_residuals(&cfg)?;
    let passed = residuals.iter().all(|r| r.passed());
    let identity = |prefix: &str| {
        residuals
            .iter()
            .filter(|r| r.name.starts_with(prefix))
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    };
    let value = json!({
        "passed": passed,
        "max_evolution_residual": residuals
            .iter()
            .filter(|r| !r.name.starts_with("helmholtz"))
            .map(|r| r.residual)
            .fold(0.0, f64::max),
        "max_projection_residual": identity("helmholtz"),
        "residuals": residuals,
    });
    println!("{}", emit::to_json_string(&value));
    Ok(if passed { 0 } else { 1 })
}

fn write_summary(report: &Report, path: Option<PathBuf>) -> Result<()> {
    let mut text = emit::to_json_string(&emit::summary_value(report, false));
    text.push('\n');
    match path {
        Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => eprint!("{text}"),
    }
    Ok(())
}

fn decay(a: DecayArgs) -> Result<u8> {
    let mut cfg = ExperimentConfig::for_campaign(Campaign::Decay);
    cfg.dim = a.dim;
    cfg.kappa = a.kappa;
    cfg.eps = a.eps;
    cfg.r_values = vec![a.block];
    cfg.t_min = a.t_min;
    cfg.t_max = a.t_max;
    cfg.t_points = a.t_points;
    cfg.delta = a.delta;
    let report = experiments::run(&cfg)?;
    print!("{}", emit::to_csv(&report)?);
    write_summary(&report, a.summary)?;
    Ok(report.exit_code() as u8)
}

fn rational(r: Rational) -> Value {
    json!({"exact": r.to_string(), "value": to_f64(r)})
}

fn admissible(a: AdmissibleArgs) -> Result<()> {
    let given = match (a.q, a.r) {
        (Some(q), None) => Given::Q(q),
        (None, Some(r)) => Given::R(r),
        _ => bail!("pass exactly one of --q and --r"),
    };
    let pair = solve_admissible(a.dim, a.mu_kind, given, a.convention)?;
    let (alpha0, alpha1) = alpha_exponents(a.dim, pair.r, a.r1.unwrap_or(pair.r))?;
    let s = match a.mu_kind {
        MuKind::Theta(theta) => rational(prop_b_exponent(theta, pair.r)?),
        _ => Value::Null,
    };
    let value = json!({
        "pair": pair,
        "beta": rational(pair.beta()),
        "alpha0": rational(alpha0),
        "alpha1": rational(alpha1),
        "s": s,
    });
    println!("{}", emit::to_json_string(&value));
    Ok(())
}

fn gpe(a: GpeArgs) -> Result<u8> {
    let mut cfg = ExperimentConfig::for_campaign(Campaign::GpeDispersion);
    if let Some(modes) = a.modes {
        cfg.modes = modes;
    }
    cfg.amplitude = a.amplitude.unwrap_or(cfg.amplitude);
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.horizon = a.horizon.or(cfg.horizon);
    cfg.dt = a.dt.or(cfg.dt);
    let report = experiments::run(&cfg)?;
    print!("{}", emit::to_csv(&report)?);
    write_summary(&report, a.summary)?;
    Ok(report.exit_code() as u8)
}
