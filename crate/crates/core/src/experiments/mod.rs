//! Config-driven verification campaigns.
//!
//! A campaign is a pure function of its [`ExperimentConfig`]; sweep points
//! run in parallel and are merged in configured order, and [`emit`] writes
//! the resulting [`Report`] byte-deterministically.

mod checks;
pub mod config;
pub mod data;
mod decay;
pub mod emit;
pub mod report;
mod strichartz;

pub use checks::{identity_residuals, run_boussinesq_check, run_gpe_dispersion, Residual};
pub use config::{BlockScaling, Campaign, DataProfile, ExperimentConfig, Frac, OutputFormat};
pub use decay::{run_bound_check, run_decay};
pub use emit::emit;
pub use report::{Assertion, Cell, Report, Verdict};
pub use strichartz::{run_cor3d, run_eps_gain, run_two_d_interp};

use crate::error::Result;

/// Run the campaign named by `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    match cfg.campaign {
        Campaign::Decay => run_decay(cfg),
        Campaign::EpsGain => run_eps_gain(cfg),
        Campaign::TwoDInterp => run_two_d_interp(cfg),
        Campaign::Cor3d => run_cor3d(cfg),
        Campaign::GpeDispersion => run_gpe_dispersion(cfg),
        Campaign::BoussinesqCheck => run_boussinesq_check(cfg),
        Campaign::BoundCheck => run_bound_check(cfg),
    }
}
