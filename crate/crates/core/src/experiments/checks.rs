//! Exact-evolution identities and the Gross-Pitaevskii dispersion sweep.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpe::{extrapolated_dispersion, GpeRunSpec};
use crate::grid::{Domain, Field, Grid, VectorField};
use crate::par;
use crate::propagator::{
    boussinesq_evolve, desymmetrize, evolve_homogeneous, semigroup_apply, symmetrize,
    AcousticState,
};
use crate::spectral::{divergence, helmholtz_p, helmholtz_q, map_spectrum};

use super::config::{Campaign, ExperimentConfig};
use super::report::{Assertion, Report, Verdict};

/// One identity with its relative residual and tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn passed(&self) -> bool {
        self.residual < self.tolerance
    }
}

/// Real, mean-free random data without Nyquist content.
fn random_field(grid: Grid, rng: &mut ChaCha8Rng) -> Field {
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    let f = Field::from_values(grid, values, Domain::Space).expect("length matches grid");
    map_spectrum(&f, |i| {
        if i == 0 || grid.is_nyquist(i) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

fn random_vector(grid: Grid, rng: &mut ChaCha8Rng) -> Result<VectorField> {
    VectorField::new((0..grid.dim()).map(|_| random_field(grid, rng)).collect())
}

fn vector_sum(a: &VectorField, b: &VectorField, sb: f64) -> Result<VectorField> {
    let comps = a
        .components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| {
            let mut z = x.clone();
            z.axpy(Complex64::new(sb, 0.0), y)?;
            Ok(z)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// Residuals of unitarity, the group law, the complex form of the flow, the
/// symmetrization round trip, the second-order equation and the Helmholtz
/// projections on seeded data.
pub fn identity_residuals(cfg: &ExperimentConfig) -> Result<Vec<Residual>> {
    let l = cfg
        .box_length
        .ok_or_else(|| Error::Config("boussinesq_check needs `box_length`".into()))?;
    let grid = Grid::new(cfg.dim, cfg.n, l)?;
    let params = cfg.params()?;
    let t = cfg.t_max;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let state = AcousticState::new(random_field(grid, &mut rng), random_vector(grid, &mut rng)?, params)?;
    let tol = cfg.identity_tolerance;
    let ptol = cfg.projection_tolerance;
    let mut out = Vec::new();

    let s0 = symmetrize(&state)?;
    let scale = s0.energy().sqrt();
    let st = evolve_homogeneous(&s0, t)?;
    out.push(Residual {
        name: "unitarity",
        residual: (st.energy().sqrt() - scale).abs() / scale,
        tolerance: tol,
    });

    let split = evolve_homogeneous(&evolve_homogeneous(&s0, 0.3 * t)?, 0.7 * t)?;
    let group = (st.sigma_tilde.l2_distance(&split.sigma_tilde)?.powi(2)
        + st.j_tilde.l2_distance(&split.j_tilde)?.powi(2))
    .sqrt();
    out.push(Residual {
        name: "group_property",
        residual: group / scale,
        tolerance: tol,
    });

    let z0 = s0.complexified()?;
    let zt = semigroup_apply(&z0, t, &params);
    out.push(Residual {
        name: "complex_form",
        residual: st.complexified()?.l2_distance(&zt)? / z0.l2(),
        tolerance: tol,
    });

    let back = desymmetrize(&s0)?;
    let qj = helmholtz_q(&state.j)?;
    out.push(Residual {
        name: "round_trip_sigma",
        residual: back.sigma.l2_distance(&state.sigma)? / state.sigma.l2(),
        tolerance: tol,
    });
    out.push(Residual {
        name: "round_trip_j",
        residual: back.j.l2_distance(&qj)? / qj.l2(),
        tolerance: tol,
    });

    let first = desymmetrize(&st)?.sigma;
    let second = boussinesq_evolve(&state.sigma, &state.sigma_dot()?, t, &params)?;
    out.push(Residual {
        name: "boussinesq",
        residual: first.l2_distance(&second)? / state.sigma.l2(),
        tolerance: tol,
    });

    let v = &state.j;
    let q = helmholtz_q(v)?;
    let p = helmholtz_p(v)?;
    let vn = v.l2();
    out.push(Residual {
        name: "helmholtz_sum",
        residual: vector_sum(&q, &p, 1.0)?.l2_distance(v)? / vn,
        tolerance: ptol,
    });
    out.push(Residual {
        name: "helmholtz_q_idempotent",
        residual: helmholtz_q(&q)?.l2_distance(&q)? / vn,
        tolerance: ptol,
    });
    out.push(Residual {
        name: "helmholtz_p_idempotent",
        residual: helmholtz_p(&p)?.l2_distance(&p)? / vn,
        tolerance: ptol,
    });
    out.push(Residual {
        name: "helmholtz_p_divergence_free",
        residual: divergence(&p)?.l2() / (grid.xi_radial_max() * vn),
        tolerance: ptol,
    });
    Ok(out)
}

pub fn run_boussinesq_check(cfg: &ExperimentConfig) -> Result<Report> {
    let residuals = identity_residuals(cfg)?;
    let mut report = Report::new(
        Campaign::BoussinesqCheck,
        &["identity", "residual", "tolerance", "passed"],
    );
    for r in &residuals {
        report.push_row(vec![
            r.name.into(),
            r.residual.into(),
            r.tolerance.into(),
            r.passed().into(),
        ])?;
        report.check(Assertion::new(
            r.name,
            Verdict::from_bool(r.passed()),
            format!("residual {:.3e} against {:.0e}", r.residual, r.tolerance),
        ));
    }
    report.note("config", cfg);
    Ok(report)
}

/// Integer wavenumber of `|xi|` along the first axis.
fn lattice_mode(grid: &Grid, xi: f64) -> Result<Vec<i64>> {
    let k = xi * grid.box_length() / (2.0 * std::f64::consts::PI);
    let kr = k.round();
    if (k - kr).abs() > 1e-9 * k.abs().max(1.0) || kr < 1.0 || kr >= (grid.n() / 2) as f64 {
        return Err(Error::Config(format!(
            "|xi| = {xi} is not a resolved lattice frequency of a box of length {}",
            grid.box_length()
        )));
    }
    let mut mode = vec![0; grid.dim()];
    mode[0] = kr as i64;
    Ok(mode)
}

/// Amplitude-extrapolated frequencies of single modes of the
/// Gross-Pitaevskii flow around the constant state.
pub fn run_gpe_dispersion(cfg: &ExperimentConfig) -> Result<Report> {
    let l = cfg
        .box_length
        .ok_or_else(|| Error::Config("gpe_dispersion needs `box_length`".into()))?;
    let grid = Grid::new(cfg.dim, cfg.n, l)?;
    let specs = cfg
        .modes
        .iter()
        .map(|&xi| {
            let mut spec = GpeRunSpec::auto(
                grid,
                lattice_mode(&grid, xi)?,
                cfg.amplitude,
                cfg.periods,
                cfg.dt_scale,
                cfg.scheme,
            )?;
            if let Some(dt) = cfg.dt {
                spec.dt = dt;
            }
            if let Some(t) = cfg.horizon {
                spec.horizon = t;
            }
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let results = par::map_range(specs.len(), |j| extrapolated_dispersion(&specs[j]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut report = Report::new(
        Campaign::GpeDispersion,
        &[
            "xi_abs", "omega_measured", "omega_predicted", "rel_error", "omega_a", "omega_half_a",
            "mass_drift", "energy_drift", "steps",
        ],
    );
    let mut mass = 0f64;
    let mut energy = 0f64;
    for r in &results {
        let (a, h) = (&r.at_amplitude, &r.at_half_amplitude);
        let md = a.mass_drift.max(h.mass_drift);
        let ed = a.energy_drift.max(h.energy_drift);
        mass = mass.max(md);
        energy = energy.max(ed);
        report.push_row(vec![
            r.xi_abs.into(),
            r.omega.into(),
            r.omega_predicted.into(),
            r.rel_error.into(),
            a.omega.into(),
            h.omega.into(),
            md.into(),
            ed.into(),
            (a.steps + h.steps).into(),
        ])?;
        report.check(Assertion::new(
            format!("omega |xi|={}", r.xi_abs),
            Verdict::from_bool(r.rel_error <= cfg.rel_tolerance),
            format!("relative error {:.3e} against {}", r.rel_error, cfg.rel_tolerance),
        ));
    }
    report.check(Assertion::new(
        "mass drift",
        Verdict::from_bool(mass < cfg.mass_tolerance),
        format!("{mass:.3e} against {:.0e}", cfg.mass_tolerance),
    ));
    report.check(Assertion::new(
        "energy drift",
        Verdict::from_bool(energy < cfg.energy_tolerance),
        format!("{energy:.3e} against {:.0e}", cfg.energy_tolerance),
    ));
    report.note("mass_drift", mass);
    report.note("energy_drift", energy);
    report.note("runs", &results);
    report.note("config", cfg);
    Ok(report)
}
