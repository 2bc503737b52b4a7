//! Mixed-norm campaigns: the eps-gain sweep, the two-dimensional
//! interpolation and the forced end-to-end check.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::DecayFit;
use crate::grid::{Domain, Field};
use crate::norms::{
    alpha_exponents, besov_norm, beta, lebesgue_norm, prop_b_exponent, solve_admissible,
    sobolev_norm, time_norm, to_f64, AdmissiblePair, Exponent, Given, MixedNormSpec, MuKind,
    Rational,
};
use crate::par;
use crate::propagator::{
    duhamel, evolve_homogeneous, uniform_times, ForcingTerm, SymAcousticState,
};

use super::config::{Campaign, ExperimentConfig};
use super::data::{block_centre, block_data, block_plan, evolved_norm, BlockPlan};
use super::report::{Assertion, Report, Verdict};

fn eps_alpha(cfg: &ExperimentConfig, d: usize) -> Result<(AdmissiblePair, f64)> {
    let pair = AdmissiblePair::new(cfg.q, cfg.r, MuKind::Schroedinger.mu(d)?, cfg.convention)?;
    let (a0, a1) = alpha_exponents(d, cfg.r, cfg.r1)?;
    let cap = if cfg.campaign == Campaign::Cor3d { a0.min(a1) } else { a0 };
    let alpha = cfg.alpha.map_or(cap, |a| a.0);
    if alpha < Rational::from_integer(0) || alpha > cap {
        return Err(Error::Config(format!("`alpha` must lie in [0, {cap}], got {alpha}")));
    }
    Ok((pair, to_f64(alpha)))
}

/// Upper-bound check of `values[i] <= factor * values[ref]`.
fn calibrated(values: &[f64], reference: usize, factor: f64) -> (bool, f64) {
    let worst = values
        .iter()
        .map(|v| v / values[reference])
        .fold(0.0, f64::max);
    (worst <= factor, worst)
}

fn largest_eps(eps: &[f64]) -> usize {
    eps.iter()
        .enumerate()
        .fold(0, |best, (i, &e)| if e > eps[best] { i } else { best })
}

/// `N(eps) = ||e^{itH_eps} f||_{L^q L^r}` for block data normalized in
/// `H^alpha`, fitted against `eps`.
pub fn run_eps_gain(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.dim != 3 {
        return Err(Error::Config(format!(
            "eps_gain needs dim = 3, got {}; the two-dimensional gain is measured by `two_d_interp`",
            cfg.dim
        )));
    }
    let (pair, alpha) = eps_alpha(cfg, 3)?;
    let points = par::map_range(cfg.eps_values.len(), |j| -> Result<(BlockPlan, f64)> {
        let eps = cfg.eps_values[j];
        let plan = block_plan(cfg, eps, block_centre(cfg, eps))?;
        let f = block_data(plan.grid, &plan.cutoff, cfg.data_profile, cfg.rng_seed);
        let norm = sobolev_norm(&f, alpha)?;
        let n = evolved_norm(&f, &plan.params, pair.q, pair.r, plan.horizon, cfg.time_samples)?;
        Ok((plan, n / norm))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut report = Report::new(
        Campaign::EpsGain,
        &["eps", "block", "box_length", "horizon", "norm", "norm_over_eps_alpha"],
    );
    for (eps, (plan, n)) in cfg.eps_values.iter().zip(&points) {
        report.push_row(vec![
            (*eps).into(),
            plan.cutoff.center().into(),
            plan.grid.box_length().into(),
            plan.horizon.into(),
            (*n).into(),
            (n / eps.powf(alpha)).into(),
        ])?;
    }
    let norms: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = DecayFit::from_loglog(&cfg.eps_values, &norms)?;
    let top = largest_eps(&cfg.eps_values);
    let c_fit = cfg.safety_factor * norms[top] / cfg.eps_values[top].powf(alpha);
    let bounded = cfg
        .eps_values
        .iter()
        .zip(&norms)
        .all(|(e, n)| *n <= c_fit * e.powf(alpha));
    report.note("pair", pair);
    report.note("alpha", alpha);
    report.note("fit", fit);
    report.note("c_fit", c_fit);
    report.check(Assertion::on_fit(
        "slope",
        &fit,
        cfg.min_r_squared,
        fit.slope >= alpha - cfg.slope_tolerance,
        format!("slope {:.6} against {alpha:.6} - {}", fit.slope, cfg.slope_tolerance),
    ));
    report.check(Assertion::new(
        "bound",
        Verdict::from_bool(bounded),
        format!("N(eps) <= {c_fit:.6e} eps^{alpha:.6}"),
    ));
    report.note("config", cfg);
    Ok(report)
}

struct InterpPoint {
    plan: BlockPlan,
    n: f64,
    sobolev: f64,
    l2: f64,
}

fn interp_point(
    cfg: &ExperimentConfig,
    eps: f64,
    centre: f64,
    q: Exponent,
    s: f64,
) -> Result<InterpPoint> {
    let plan = block_plan(cfg, eps, centre)?;
    let f = block_data(plan.grid, &plan.cutoff, cfg.data_profile, cfg.rng_seed);
    let n = evolved_norm(&f, &plan.params, q, cfg.r, plan.horizon, cfg.time_samples)?;
    Ok(InterpPoint {
        plan,
        n,
        sobolev: sobolev_norm(&f, s)?,
        l2: sobolev_norm(&f, 0.0)?,
    })
}

/// Two-dimensional estimates with `mu = (2 - theta)/2`, data normalized in
/// `H^{3 beta theta}`, plus the low- and high-frequency branches.
pub fn run_two_d_interp(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.dim != 2 {
        return Err(Error::Config(format!("two_d_interp needs dim = 2, got {}", cfg.dim)));
    }
    let mut report = Report::new(
        Campaign::TwoDInterp,
        &[
            "theta", "q", "r", "branch", "eps", "block", "horizon", "norm", "ratio",
            "chain_factor",
        ],
    );
    let top = largest_eps(&cfg.eps_values);
    let mut pairs = Vec::new();
    for theta in cfg.theta_values.iter().map(|t| t.0) {
        let s_exp = prop_b_exponent(theta, cfg.r)?;
        let pair = solve_admissible(2, MuKind::Theta(theta), Given::R(cfg.r), cfg.convention)?;
        let b = to_f64(beta(cfg.r)?);
        let bt = b * to_f64(theta);
        let s = to_f64(s_exp);
        let low = par::map_range(cfg.eps_values.len(), |j| {
            let eps = cfg.eps_values[j];
            interp_point(cfg, eps, block_centre(cfg, eps), pair.q, s)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let high = par::map_range(cfg.eps_values.len(), |j| {
            let eps = cfg.eps_values[j];
            interp_point(cfg, eps, cfg.high_block_product / eps, pair.q, s)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let mut measured = Vec::new();
        let mut low_ratio = Vec::new();
        let mut high_ratio = Vec::new();
        let mut chain_ok = true;
        let mut high_block_ok = true;
        for (j, &eps) in cfg.eps_values.iter().enumerate() {
            let (p, h) = (&low[j], &high[j]);
            let (rl, rh) = (p.plan.cutoff.center(), h.plan.cutoff.center());
            let norm = p.n / p.sobolev;
            let ratio = p.n / (eps.powf(bt) * rl.powf(3.0 * bt) * p.l2);
            measured.push(norm);
            low_ratio.push(ratio);
            let first = rh.powf(bt) * h.l2;
            let second = eps.powf(2.0 * bt) * rh.powf(3.0 * bt) * h.l2;
            chain_ok &= first <= second * (1.0 + 1e-12);
            high_block_ok &= eps * rh > 1.0;
            high_ratio.push(h.n / first);
            for (branch, pt, r_block, ratio) in
                [("low", p, rl, ratio), ("high", h, rh, h.n / first)]
            {
                report.push_row(vec![
                    to_f64(theta).into(),
                    pair.q.to_string().into(),
                    pair.r.to_string().into(),
                    branch.into(),
                    eps.into(),
                    r_block.into(),
                    pt.plan.horizon.into(),
                    (pt.n / pt.sobolev).into(),
                    ratio.into(),
                    (eps * r_block).powf(2.0 * bt).into(),
                ])?;
            }
        }
        let tag = format!("theta={theta}");
        let fit = DecayFit::from_loglog(&cfg.eps_values, &measured)?;
        report.check(Assertion::on_fit(
            format!("slope {tag}"),
            &fit,
            cfg.min_r_squared,
            fit.slope >= bt - cfg.slope_tolerance,
            format!("slope {:.6} against beta theta = {bt:.6} - {}", fit.slope, cfg.slope_tolerance),
        ));
        let low_blocks_ok = low
            .iter()
            .zip(&cfg.eps_values)
            .all(|(p, e)| e * p.plan.cutoff.center() <= 1.0);
        let (low_ok, low_worst) = calibrated(&low_ratio, top, cfg.safety_factor);
        report.check(Assertion::new(
            format!("low branch {tag}"),
            Verdict::from_bool(low_ok && low_blocks_ok),
            format!("max ratio / ratio(eps_max) = {low_worst:.6}; blocks below 1/eps: {low_blocks_ok}"),
        ));
        let (high_ok, high_worst) = calibrated(&high_ratio, top, cfg.safety_factor);
        report.check(Assertion::new(
            format!("high branch {tag}"),
            Verdict::from_bool(high_ok && high_block_ok),
            format!("max ratio / ratio(eps_max) = {high_worst:.6}; blocks above 1/eps: {high_block_ok}"),
        ));
        report.check(Assertion::new(
            format!("high chain {tag}"),
            Verdict::from_bool(chain_ok),
            "R^{beta theta} <= eps^{2 beta theta} R^{3 beta theta} on every high block",
        ));
        pairs.push(serde_json::json!({
            "theta": to_f64(theta),
            "q": pair.q,
            "r": pair.r,
            "beta_theta": bt,
            "s": s,
            "fit": fit,
        }));
    }
    report.note("thetas", pairs);
    report.note("config", cfg);
    Ok(report)
}

/// `sin^2(pi t / tau)` on `[0, tau]`, zero afterwards.
fn pulse(t: f64, tau: f64) -> f64 {
    if (0.0..=tau).contains(&t) {
        (PI * t / tau).sin().powi(2)
    } else {
        0.0
    }
}

/// Pointwise Euclidean `L^r` norm of the pair `(a, b)`.
fn pair_norm(a: &Field, b: &Field, r: Exponent) -> Result<f64> {
    let a = a.to_domain(Domain::Space);
    let b = b.to_domain(Domain::Space);
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| Complex64::new((x.norm_sqr() + y.norm_sqr()).sqrt(), 0.0))
        .collect();
    lebesgue_norm(&Field::from_values(*a.grid(), values, Domain::Space)?, r)
}

struct Cor3dPoint {
    plan: BlockPlan,
    lhs: f64,
    data: f64,
    forcing: f64,
    substeps: usize,
}

fn cor3d_point(cfg: &ExperimentConfig, eps: f64, tau: f64, alpha: f64) -> Result<Cor3dPoint> {
    let plan = block_plan(cfg, eps, block_centre(cfg, eps))?;
    let spec = MixedNormSpec::new(cfg.q, cfg.r, plan.horizon, cfg.time_samples)?;
    let (grid, chi) = (plan.grid, plan.cutoff);
    let unit = |seed: u64, scale: f64| -> Result<Field> {
        let mut f = block_data(grid, &chi, cfg.data_profile, seed);
        let n = sobolev_norm(&f, alpha)?;
        f.scale(scale / n);
        Ok(f)
    };
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let s0 = SymAcousticState::new(
        unit(cfg.rng_seed, half)?,
        unit(cfg.rng_seed + 1, half)?,
        plan.params,
    )?;
    let g_field = unit(cfg.rng_seed + 2, 1.0)?;
    let mut g_scaled = g_field.clone();
    g_scaled.scale(cfg.forcing_amplitude);

    let times = uniform_times(plan.horizon, cfg.time_samples)?;
    let dt = times[1] - times[0];
    let phase = dt * plan.params.phi_eps(chi.support().1);
    let substeps = ((phase / cfg.max_substep_phase).ceil() as usize).max(2);
    let mut state = s0;
    let mut inner = vec![pair_norm(&state.sigma_tilde, &state.j_tilde, spec.r)?];
    for &t0 in &times[..times.len() - 1] {
        state = if cfg.forcing_amplitude == 0.0 {
            evolve_homogeneous(&state, dt)?
        } else {
            let local = uniform_times(dt, substeps + 1)?;
            let samples = local
                .iter()
                .map(|&s| {
                    let mut f = g_scaled.clone();
                    f.scale(pulse(t0 + s, tau));
                    f
                })
                .collect();
            duhamel(&state, &ForcingTerm::from_tilde(local, samples)?, dt, substeps)?
        };
        inner.push(pair_norm(&state.sigma_tilde, &state.j_tilde, spec.r)?);
    }
    let lhs = time_norm(&inner, spec.q, spec.t_end)?;

    let fine: Vec<f64> = uniform_times(plan.horizon, 4097)?
        .into_iter()
        .map(|t| pulse(t, tau))
        .collect();
    let g_time = time_norm(&fine, cfg.q1.conjugate()?, plan.horizon)?;
    let besov = besov_norm(&g_field, alpha, cfg.r1.conjugate()?, cfg.cutoff)?.value;
    Ok(Cor3dPoint {
        plan,
        lhs,
        data: 1.0,
        forcing: cfg.forcing_amplitude * g_time * besov,
        substeps,
    })
}

/// Forced symmetrized system: `||(sigma~, J~)||_{L^q L^r}` against
/// `eps^alpha (||(sigma~0, J~0)||_{H^alpha} + ||F~||_{L^{q1'} B^alpha_{r1',2}})`.
pub fn run_cor3d(cfg: &ExperimentConfig) -> Result<Report> {
    if !(2..=3).contains(&cfg.dim) {
        return Err(Error::Config(format!("cor3d needs dim 2 or 3, got {}", cfg.dim)));
    }
    let (pair, alpha) = eps_alpha(cfg, cfg.dim)?;
    AdmissiblePair::new(cfg.q1, cfg.r1, MuKind::Schroedinger.mu(cfg.dim)?, cfg.convention)?;
    let horizons = cfg
        .eps_values
        .iter()
        .map(|&e| block_plan(cfg, e, block_centre(cfg, e)).map(|p| p.horizon))
        .collect::<Result<Vec<_>>>()?;
    let tau = horizons.iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
    let points = cfg
        .eps_values
        .iter()
        .map(|&e| cor3d_point(cfg, e, tau, alpha))
        .collect::<Result<Vec<_>>>()?;

    let mut report = Report::new(
        Campaign::Cor3d,
        &[
            "eps", "block", "horizon", "substeps", "state_norm", "data_norm", "forcing_norm",
            "constant",
        ],
    );
    let mut constants = Vec::new();
    for (eps, p) in cfg.eps_values.iter().zip(&points) {
        let c = p.lhs / (eps.powf(alpha) * (p.data + p.forcing));
        constants.push(c);
        report.push_row(vec![
            (*eps).into(),
            p.plan.cutoff.center().into(),
            p.plan.horizon.into(),
            p.substeps.into(),
            p.lhs.into(),
            p.data.into(),
            p.forcing.into(),
            c.into(),
        ])?;
    }
    let top = largest_eps(&cfg.eps_values);
    let (ok, worst) = calibrated(&constants, top, cfg.stability_factor);
    let lhs: Vec<f64> = points.iter().map(|p| p.lhs).collect();
    report.note("pair", pair);
    report.note("alpha", alpha);
    report.note("pulse_width", tau);
    report.note("c_calibrated", constants[top]);
    if let Ok(fit) = DecayFit::from_loglog(&cfg.eps_values, &lhs) {
        report.note("fit", fit);
    }
    report.check(Assertion::new(
        "constant stability",
        Verdict::from_bool(ok),
        format!("max C(eps) / C(eps_max) = {worst:.6} against {}", cfg.stability_factor),
    ));
    report.note("config", cfg);
    Ok(report)
}
