//! Pointwise decay of the frequency-localized kernel and the bounds on its
//! constants.

use crate::cutoff::DyadicCutoff;
use crate::dispersion::{h_bound_ratio, DispersionParams};
use crate::error::{Error, Result};
use crate::oscillatory::{asymptotic_onset, decay_fit, eps_weight, sup_over_x, SupResult};
use crate::par;

use super::config::{Campaign, ExperimentConfig};
use super::report::{Assertion, Report, Verdict};

fn check_delta(d: usize, delta: f64) -> Result<()> {
    let max = (d as f64 - 2.0) / 2.0;
    if (0.0..=max).contains(&delta) {
        Ok(())
    } else {
        Err(Error::Config(format!("`delta` must lie in [0, {max}] for dim {d}, got {delta}")))
    }
}

/// `sup_x |I(t, x, R)|` over the configured time grid, one fit per block.
pub fn run_decay(cfg: &ExperimentConfig) -> Result<Report> {
    check_delta(cfg.dim, cfg.delta)?;
    let params = cfg.params()?;
    let d = cfg.dim;
    let times = cfg.t_grid();
    let mut report = Report::new(
        Campaign::Decay,
        &["block", "t", "sup", "argmax_x", "normalized_ratio"],
    );
    let mut fits = Vec::new();
    for &r in &cfg.r_values {
        let cutoff = DyadicCutoff::new(r, cfg.cutoff)?;
        let sups = par::map_range(times.len(), |j| {
            sup_over_x(d, times[j], &cutoff, &params, cfg.n_x)
        })
        .into_iter()
        .collect::<Result<Vec<SupResult>>>()?;
        let weight = eps_weight(&params, r, cfg.delta);
        let half_d = d as f64 / 2.0;
        for (t, s) in times.iter().zip(&sups) {
            let ratio = s.sup * t.powf(half_d) * params.kappa().powf(half_d) / weight;
            report.push_row(vec![
                r.into(),
                (*t).into(),
                s.sup.into(),
                s.argmax_x.into(),
                ratio.into(),
            ])?;
        }
        let samples: Vec<(f64, f64)> = times.iter().copied().zip(sups.iter().map(|s| s.sup)).collect();
        let fit = decay_fit(&samples)?;
        let onset = asymptotic_onset(&cutoff, &params);
        report.check(Assertion::on_fit(
            format!("slope R={r}"),
            &fit,
            cfg.min_r_squared,
            (fit.slope + half_d).abs() <= cfg.slope_tolerance,
            format!("slope {:.6} against {} +- {}", fit.slope, -half_d, cfg.slope_tolerance),
        ));
        fits.push(serde_json::json!({
            "block": r,
            "fit": fit,
            "asymptotic_onset": onset,
            "pre_asymptotic_points": times.iter().filter(|&&t| t < onset).count(),
        }));
    }
    report.note("fits", fits);
    report.note("config", cfg);
    Ok(report)
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Two-sided sweep of `h^(-1/2)` against its envelope and the eps-weighted
/// dispersive ratio over `(t, eps, R)`.
pub fn run_bound_check(cfg: &ExperimentConfig) -> Result<Report> {
    check_delta(cfg.dim, cfg.delta)?;
    let mut report = Report::new(
        Campaign::BoundCheck,
        &["kind", "dim", "delta", "t", "eps", "r", "value"],
    );
    let rs = log_grid(cfg.h_r_min, cfg.h_r_max, cfg.h_points);
    let mut h_summary = Vec::new();
    for d in [2usize, 3] {
        let values = rs
            .iter()
            .map(|&r| h_bound_ratio(r, cfg.kappa, d))
            .collect::<Result<Vec<_>>>()?;
        for (r, v) in rs.iter().zip(&values) {
            report.push_row(vec![
                "h".into(),
                d.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                (*r).into(),
                (*v).into(),
            ])?;
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let c = max.max(1.0 / min);
        report.check(Assertion::new(
            format!("h envelope d={d}"),
            Verdict::from_bool(c.is_finite() && c <= cfg.bound_limit),
            format!("ratio within [1/C, C] with C = {c:.6} against {}", cfg.bound_limit),
        ));
        h_summary.push(serde_json::json!({"dim": d, "min": min, "max": max, "c": c}));
    }
    report.note("h_bound", h_summary);

    let d = cfg.dim;
    let times = cfg.t_grid();
    let half_d = d as f64 / 2.0;
    let mut grid = Vec::new();
    for &t in &times {
        for &eps in &cfg.eps_values {
            for &r in &cfg.r_values {
                grid.push((t, eps, r));
            }
        }
    }
    let sups = par::map_range(grid.len(), |j| -> Result<f64> {
        let (t, eps, r) = grid[j];
        let params = DispersionParams::new(eps, cfg.kappa)?;
        let cutoff = DyadicCutoff::new(r, cfg.cutoff)?;
        Ok(sup_over_x(d, t, &cutoff, &params, cfg.n_x)?.sup * (t * cfg.kappa).powf(half_d))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut deltas = vec![0.0];
    if cfg.delta > 0.0 {
        deltas.push(cfg.delta);
    }
    let top = cfg.eps_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for &delta in &deltas {
        let mut values = Vec::new();
        let mut at_top = Vec::new();
        for (&(t, eps, r), s) in grid.iter().zip(&sups) {
            let params = DispersionParams::new(eps, cfg.kappa)?;
            let v = s / eps_weight(&params, r, delta);
            values.push(v);
            if eps == top {
                at_top.push(v);
            }
            report.push_row(vec![
                "eps".into(),
                d.into(),
                delta.into(),
                t.into(),
                eps.into(),
                r.into(),
                v.into(),
            ])?;
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if delta == 0.0 {
            let reference = at_top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let worst = max / reference;
            report.check(Assertion::new(
                "eps ratio delta=0",
                Verdict::from_bool(worst <= cfg.bound_limit),
                format!("max ratio / max ratio at eps_max = {worst:.6} against {}", cfg.bound_limit),
            ));
        } else {
            let spread = max / min;
            report.check(Assertion::new(
                format!("eps ratio delta={delta}"),
                Verdict::from_bool(spread <= cfg.bound_limit),
                format!("max / min = {spread:.6} against {}", cfg.bound_limit),
            ));
        }
    }
    report.note("config", cfg);
    Ok(report)
}
