//! Least-squares lines, mostly in log-log coordinates.

use serde::Serialize;

use crate::error::{Error, Result};

/// Coefficient of determination above which a fit counts as clean.
pub const CLEAN_R2: f64 = 0.99;
/// Below this, assertions resting on a fit are inconclusive.
pub const CONCLUSIVE_R2: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::param(
            "samples",
            format!("{} abscissae for {} ordinates", xs.len(), ys.len()),
        ));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { need: 3, got: n });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fit samples"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("samples", "abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    // Scatter at the rounding floor of the ordinates is a flat, exact line.
    let ymax = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let floor = nf * (16.0 * f64::EPSILON * ymax).powi(2);
    let r_squared = if syy <= floor {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        samples: n,
    })
}

/// Fit `log y = slope * log x + intercept`; all values must be positive.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::param("samples", "log-log fit needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Power-law fit with the abscissa window it was taken over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// `r_squared >= CLEAN_R2`.
    pub clean: bool,
}

impl DecayFit {
    pub fn from_loglog(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let line = loglog_fit(xs, ys)?;
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            slope: line.slope,
            intercept: line.intercept,
            r_squared: line.r_squared,
            window: (lo, hi),
            samples: line.samples,
            clean: line.r_squared >= CLEAN_R2,
        })
    }

    pub fn conclusive(&self) -> bool {
        self.r_squared >= CONCLUSIVE_R2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let ts: Vec<f64> = (0..10).map(|i| 10f64.powf(2.0 + i as f64 / 4.0)).collect();
        let ys: Vec<f64> = ts.iter().map(|t| t.powf(-1.5)).collect();
        let f = DecayFit::from_loglog(&ts, &ys).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12 && f.clean);
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 / t).collect();
        let f = DecayFit::from_loglog(&ts, &ys).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert_eq!(f.window, (ts[0], ts[9]));
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(loglog_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(linear_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn noisy_fit_loses_r_squared() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| if (*x as i32) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!(f.r_squared < 0.5);
    }

    #[test]
    fn rounding_scatter_is_a_flat_exact_line() {
        let xs = [0.1f64, 0.2, 0.4, 0.8].map(f64::ln);
        let ys = [-0.3, -0.3 + 5e-17, -0.3 - 5e-17, -0.3];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!(f.slope.abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);
    }
}
