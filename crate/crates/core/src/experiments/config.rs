//! Flat key-value configuration of a campaign.
//!
//! A file names its `campaign`; every other key falls back to the defaults
//! of that campaign, so the smallest valid file is one line.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cutoff::CutoffKind;
use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::gpe::Scheme;
use crate::norms::{parse_rational, Convention, Exponent, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Campaign {
    Decay,
    EpsGain,
    TwoDInterp,
    Cor3d,
    GpeDispersion,
    BoussinesqCheck,
    BoundCheck,
}

impl Campaign {
    pub const ALL: [Campaign; 7] = [
        Campaign::Decay,
        Campaign::EpsGain,
        Campaign::TwoDInterp,
        Campaign::Cor3d,
        Campaign::GpeDispersion,
        Campaign::BoussinesqCheck,
        Campaign::BoundCheck,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Campaign::Decay => "decay",
            Campaign::EpsGain => "eps_gain",
            Campaign::TwoDInterp => "two_d_interp",
            Campaign::Cor3d => "cor3d",
            Campaign::GpeDispersion => "gpe_dispersion",
            Campaign::BoussinesqCheck => "boussinesq_check",
            Campaign::BoundCheck => "bound_check",
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Campaign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Campaign::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown campaign `{s}`")))
    }
}

/// Spectrum of the block-localized test data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataProfile {
    /// Cutoff profile times a seeded plane-wave phase: a packet centred at a
    /// seeded point of the box.
    #[default]
    Coherent,
    /// Cutoff profile times independent seeded phases per mode.
    RandomPhase,
}

/// How the block frequency follows `eps` in sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockScaling {
    /// The block sits at the first entry of `r_values` for every `eps`.
    #[default]
    Fixed,
    /// The block sits at `block_product / eps`.
    Tied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// An exact rational read from `"1/2"`, `0.9` or `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac(pub Rational);

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r = self.0;
        if r.is_integer() {
            s.serialize_str(&r.numer().to_string())
        } else {
            s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
        }
    }
}

impl<'de> Deserialize<'de> for Frac {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Int(v) => v.to_string(),
            Raw::Float(v) => v.to_string(),
            Raw::Text(v) => v,
        };
        parse_rational(&text).map(Frac).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub campaign: Campaign,
    pub dim: usize,
    /// Lattice points per axis.
    pub n: usize,
    /// Explicit box length; when absent each sweep point uses
    /// `box_wavelengths` wavelengths of the lowest frequency of its block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_length: Option<f64>,
    pub box_wavelengths: f64,
    pub eps: f64,
    pub kappa: f64,
    pub eps_values: Vec<f64>,
    /// Block centres `R`.
    pub r_values: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub theta_values: Vec<Frac>,
    pub delta: f64,
    /// Regularity index of the estimate; defaults to the largest allowed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Frac>,
    pub q: Exponent,
    pub r: Exponent,
    pub q1: Exponent,
    pub r1: Exponent,
    pub convention: Convention,
    /// Norming horizon; when absent each trajectory runs to its
    /// anti-wraparound limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub time_samples: usize,
    pub cutoff: CutoffKind,
    pub block_scaling: BlockScaling,
    pub block_product: f64,
    pub high_block_product: f64,
    pub data_profile: DataProfile,
    pub forcing_amplitude: f64,
    /// Largest phase advance of one Duhamel substep.
    pub max_substep_phase: f64,
    pub rng_seed: u64,
    /// Coarse samples of `|x|` in sup searches.
    pub n_x: usize,
    pub slope_tolerance: f64,
    /// Coefficient of determination a fit needs to pass.
    pub min_r_squared: f64,
    pub safety_factor: f64,
    pub stability_factor: f64,
    /// Largest admissible max/min spread of a ratio that should be bounded.
    pub bound_limit: f64,
    pub h_r_min: f64,
    pub h_r_max: f64,
    pub h_points: usize,
    /// Probed wavenumbers `|xi|` of the Gross-Pitaevskii campaign.
    pub modes: Vec<f64>,
    pub amplitude: f64,
    pub periods: f64,
    pub dt_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub scheme: Scheme,
    pub identity_tolerance: f64,
    pub projection_tolerance: f64,
    pub rel_tolerance: f64,
    pub mass_tolerance: f64,
    pub energy_tolerance: f64,
    pub output: PathBuf,
    pub format: OutputFormat,
}

fn eps_ladder() -> Vec<f64> {
    vec![1.0, 0.5, 0.25, 0.125]
}

impl ExperimentConfig {
    /// Defaults of `campaign`.
    pub fn for_campaign(campaign: Campaign) -> Self {
        let base = Self {
            campaign,
            dim: 3,
            n: 64,
            box_length: None,
            box_wavelengths: 8.0,
            eps: 1.0,
            kappa: 1.0,
            eps_values: eps_ladder(),
            r_values: vec![1.0],
            t_min: 1e2,
            t_max: 1e4,
            t_points: 12,
            theta_values: vec![Frac(Rational::from_integer(0))],
            delta: 0.0,
            alpha: None,
            q: Exponent::int(2),
            r: Exponent::int(6),
            q1: Exponent::int(2),
            r1: Exponent::int(6),
            convention: Convention::ClassicalSharp,
            horizon: None,
            time_samples: 33,
            cutoff: CutoffKind::Smooth,
            block_scaling: BlockScaling::Fixed,
            block_product: 0.125,
            high_block_product: 8.0,
            data_profile: DataProfile::Coherent,
            forcing_amplitude: 1.0,
            max_substep_phase: 0.25,
            rng_seed: 7,
            n_x: 96,
            slope_tolerance: 0.05,
            min_r_squared: 0.95,
            safety_factor: 2.0,
            stability_factor: 4.0,
            bound_limit: 10.0,
            h_r_min: 1e-3,
            h_r_max: 1e3,
            h_points: 241,
            modes: vec![0.5, 1.0, 2.0, 4.0],
            amplitude: 1e-3,
            periods: 6.0,
            dt_scale: 0.015,
            dt: None,
            scheme: Scheme::Yoshida4,
            identity_tolerance: 1e-10,
            projection_tolerance: 1e-12,
            rel_tolerance: 0.01,
            mass_tolerance: 1e-10,
            energy_tolerance: 1e-8,
            output: PathBuf::from("out"),
            format: OutputFormat::Csv,
        };
        match campaign {
            Campaign::Decay => Self {
                dim: 2,
                slope_tolerance: 0.1,
                min_r_squared: 0.99,
                ..base
            },
            Campaign::EpsGain => Self { n: 128, ..base },
            Campaign::TwoDInterp => Self {
                dim: 2,
                n: 128,
                theta_values: vec![
                    Frac(Rational::from_integer(0)),
                    Frac(Rational::new(1, 2)),
                    Frac(Rational::new(9, 10)),
                ],
                q: Exponent::int(4),
                r: Exponent::int(4),
                block_scaling: BlockScaling::Tied,
                ..base
            },
            Campaign::Cor3d => Self {
                time_samples: 17,
                ..base
            },
            Campaign::GpeDispersion => Self {
                dim: 2,
                n: 256,
                box_length: Some(32.0 * PI),
                ..base
            },
            Campaign::BoussinesqCheck => Self {
                n: 16,
                box_length: Some(4.0 * PI),
                eps: 0.5,
                kappa: 0.5,
                t_min: 1.0,
                t_max: 10.0,
                ..base
            },
            Campaign::BoundCheck => Self {
                t_min: 500.0,
                t_max: 2000.0,
                t_points: 3,
                delta: 0.5,
                ..base
            },
        }
    }

    /// Parse a TOML document, filling absent keys from the campaign defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let campaign: Campaign = table
            .get("campaign")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Config("missing string key `campaign`".into()))?
            .parse()?;
        let mut merged = toml::Table::try_from(Self::for_campaign(campaign))
            .map_err(|e| Error::Config(e.to_string()))?;
        for (k, v) in table {
            merged.insert(k, v);
        }
        let cfg: Self = merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<DispersionParams> {
        DispersionParams::new(self.eps, self.kappa)
    }

    /// `t_points` log-spaced times on `[t_min, t_max]`.
    pub fn t_grid(&self) -> Vec<f64> {
        if self.t_points == 1 {
            return vec![self.t_min];
        }
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..self.t_points)
            .map(|i| (a + (b - a) * i as f64 / (self.t_points - 1) as f64).exp())
            .collect()
    }

    /// Static checks; geometric limits are checked per sweep point.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be positive, got {v}")))
            }
        };
        if !(1..=3).contains(&self.dim) {
            return bad(format!("`dim` must be 1, 2 or 3, got {}", self.dim));
        }
        if self.n < 2 || !self.n.is_power_of_two() {
            return bad(format!("`n` must be a power of two, got {}", self.n));
        }
        if let Some(l) = self.box_length {
            positive("box_length", l)?;
        }
        if let Some(t) = self.horizon {
            positive("horizon", t)?;
        }
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        for (name, v) in [
            ("box_wavelengths", self.box_wavelengths),
            ("eps", self.eps),
            ("kappa", self.kappa),
            ("t_min", self.t_min),
            ("t_max", self.t_max),
            ("block_product", self.block_product),
            ("high_block_product", self.high_block_product),
            ("max_substep_phase", self.max_substep_phase),
            ("safety_factor", self.safety_factor),
            ("stability_factor", self.stability_factor),
            ("bound_limit", self.bound_limit),
            ("h_r_min", self.h_r_min),
            ("h_r_max", self.h_r_max),
            ("amplitude", self.amplitude),
            ("periods", self.periods),
            ("dt_scale", self.dt_scale),
        ] {
            positive(name, v)?;
        }
        if self.t_min > self.t_max || self.h_r_min >= self.h_r_max {
            return bad("sweep bounds must be increasing".into());
        }
        if !(self.delta >= 0.0) || !(self.forcing_amplitude >= 0.0) {
            return bad("`delta` and `forcing_amplitude` must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.min_r_squared) {
            return bad(format!("`min_r_squared` must lie in [0, 1], got {}", self.min_r_squared));
        }
        let lists: [(&str, &[f64]); 3] = [
            ("eps_values", &self.eps_values),
            ("r_values", &self.r_values),
            ("modes", &self.modes),
        ];
        for (name, list) in lists {
            if list.is_empty() {
                return bad(format!("`{name}` must not be empty"));
            }
            for &v in list {
                positive(name, v)?;
            }
        }
        if self.theta_values.is_empty() {
            return bad("`theta_values` must not be empty".into());
        }
        if self.t_points == 0 || self.h_points < 2 || self.time_samples < 16 || self.n_x < 64 {
            return bad("need t_points >= 1, h_points >= 2, time_samples >= 16, n_x >= 64".into());
        }
        Ok(())
    }
}
