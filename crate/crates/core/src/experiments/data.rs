//! Block-localized test data and the lattices that carry them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutoff::DyadicCutoff;
use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::grid::{Domain, Field, Grid};
use crate::norms::{lebesgue_norm, time_norm, Exponent, MixedNormSpec};
use crate::propagator::{phi_table, uniform_times};
use crate::spectral::map_spectrum;

use super::config::{BlockScaling, DataProfile, ExperimentConfig};

/// Lattice, parameters and time horizon of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockPlan {
    pub grid: Grid,
    pub params: DispersionParams,
    pub cutoff: DyadicCutoff,
    /// Anti-wraparound limit of the block.
    pub t_limit: f64,
    pub horizon: f64,
}

/// `L / (2 max phi_eps')` over the block support.
///
/// `phi_eps'` is increasing, so the maximum sits at the outer support edge.
pub fn wraparound_limit(grid: &Grid, cutoff: &DyadicCutoff, params: &DispersionParams) -> f64 {
    grid.box_length() / (2.0 * params.group_velocity(cutoff.support().1))
}

/// Block centre of `cfg` at `eps`.
pub fn block_centre(cfg: &ExperimentConfig, eps: f64) -> f64 {
    match cfg.block_scaling {
        BlockScaling::Fixed => cfg.r_values[0],
        BlockScaling::Tied => cfg.block_product / eps,
    }
}

pub fn block_plan(cfg: &ExperimentConfig, eps: f64, centre: f64) -> Result<BlockPlan> {
    let params = DispersionParams::new(eps, cfg.kappa)?;
    let cutoff = DyadicCutoff::new(centre, cfg.cutoff)?;
    let (lo, hi) = cutoff.support();
    let box_length = cfg
        .box_length
        .unwrap_or(cfg.box_wavelengths * 2.0 * PI / lo);
    let grid = Grid::new(cfg.dim, cfg.n, box_length)?;
    if grid.xi_axis_max() < hi {
        return Err(Error::Config(format!(
            "n = {} on a box of length {box_length} resolves |xi| <= {}, block R = {centre} reaches {hi}",
            cfg.n,
            grid.xi_axis_max()
        )));
    }
    let t_limit = wraparound_limit(&grid, &cutoff, &params);
    let horizon = match cfg.horizon {
        Some(t) if t > t_limit => return Err(Error::Wraparound { t, limit: t_limit }),
        Some(t) => t,
        None => t_limit,
    };
    Ok(BlockPlan {
        grid,
        params,
        cutoff,
        t_limit,
        horizon,
    })
}

/// Frequency-domain data `chi(|xi|) e^{i theta(xi)}` on the block.
///
/// Coherent data use `theta = theta0 - xi . x0` with a seeded global phase
/// and a seeded centre `x0` given in box fractions; random-phase data draw
/// `theta` independently per mode in flat order.
pub fn block_data(grid: Grid, cutoff: &DyadicCutoff, profile: DataProfile, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match profile {
        DataProfile::Coherent => {
            let theta0 = rng.random_range(0.0..2.0 * PI);
            let l = grid.box_length();
            let x0: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..1.0) * l);
            let chi = *cutoff;
            Field::from_spectrum_fn(grid, move |i| {
                let xi = grid.xi(i);
                let phase = theta0 - (xi[0] * x0[0] + xi[1] * x0[1] + xi[2] * x0[2]);
                Complex64::from_polar(chi.eval(grid.xi_abs(i)), phase)
            })
        }
        DataProfile::RandomPhase => {
            let phases: Vec<f64> = (0..grid.len())
                .map(|_| rng.random_range(0.0..2.0 * PI))
                .collect();
            let chi = *cutoff;
            Field::from_spectrum_fn(grid, move |i| {
                Complex64::from_polar(chi.eval(grid.xi_abs(i)), phases[i])
            })
        }
    }
}

/// `||e^{itH_eps} f||_{L^q(0, T; L^r)}` sampled at `samples` uniform times.
pub fn evolved_norm(
    f: &Field,
    params: &DispersionParams,
    q: Exponent,
    r: Exponent,
    horizon: f64,
    samples: usize,
) -> Result<f64> {
    let spec = MixedNormSpec::new(q, r, horizon, samples)?;
    let fh = f.to_domain(Domain::Frequency);
    let grid = *fh.grid();
    let phi = phi_table(&grid, params);
    let inner = uniform_times(horizon, samples)?
        .into_iter()
        .map(|t| {
            let u = map_spectrum(&fh, |i| Complex64::from_polar(1.0, t * phi[i])).into_space();
            lebesgue_norm(&u, spec.r)
        })
        .collect::<Result<Vec<_>>>()?;
    time_norm(&inner, spec.q, spec.t_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Campaign;
    use crate::norms::sobolev_norm;

    #[test]
    fn auto_box_resolves_block_and_horizon_is_limit() {
        let mut cfg = ExperimentConfig::for_campaign(Campaign::EpsGain);
        cfg.n = 32;
        cfg.box_wavelengths = 2.0;
        let plan = block_plan(&cfg, 0.5, 1.0).unwrap();
        assert!((plan.grid.box_length() - 8.0 * PI).abs() < 1e-12);
        assert!(plan.grid.xi_axis_max() >= 2.0);
        assert_eq!(plan.horizon, plan.t_limit);
        cfg.horizon = Some(2.0 * plan.t_limit);
        assert!(matches!(
            block_plan(&cfg, 0.5, 1.0),
            Err(Error::Wraparound { .. })
        ));
        cfg.horizon = None;
        cfg.n = 4;
        assert!(block_plan(&cfg, 0.5, 1.0).is_err());
    }

    #[test]
    fn data_is_seeded_and_band_limited() {
        let grid = Grid::new(2, 32, 32.0 * PI).unwrap();
        let chi = DyadicCutoff::smooth(1.0).unwrap();
        for profile in [DataProfile::Coherent, DataProfile::RandomPhase] {
            let a = block_data(grid, &chi, profile, 3);
            assert_eq!(a, block_data(grid, &chi, profile, 3));
            assert_ne!(a, block_data(grid, &chi, profile, 4));
            for (i, v) in a.values().iter().enumerate() {
                let r = grid.xi_abs(i);
                if !(0.5..=2.0).contains(&r) {
                    assert_eq!(v.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn l2_trajectory_norm_is_conserved() {
        let grid = Grid::new(2, 32, 32.0 * PI).unwrap();
        let chi = DyadicCutoff::smooth(1.0).unwrap();
        let f = block_data(grid, &chi, DataProfile::Coherent, 1);
        let params = DispersionParams::new(0.5, 1.0).unwrap();
        let two = Exponent::int(2);
        let n = evolved_norm(&f, &params, two, two, 3.0, 17).unwrap();
        let l2 = sobolev_norm(&f, 0.0).unwrap();
        assert!((n - l2 * 3f64.sqrt()).abs() < 1e-10 * n);
    }
}
