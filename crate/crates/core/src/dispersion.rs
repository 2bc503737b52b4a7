//! Radial dispersion symbols of the symmetrized acoustic system.
//!
//! The base symbol is `phi(r) = r * sqrt(1 + kappa^2 r^2)`; the scaled
//! symbol is `phi_eps(|xi|) = eps^-2 * phi(eps |xi|)`, which for
//! `kappa = 1/2` is the quantum-hydrodynamic dispersion relation
//! `omega = (|xi|/eps) * sqrt(1 + (eps |xi| / 2)^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Healing length / Mach number `eps` and capillarity coefficient `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionParams {
    eps: f64,
    kappa: f64,
}

impl DispersionParams {
    pub fn new(eps: f64, kappa: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::param("eps", format!("must be positive, got {eps}")));
        }
        // kappa -> 0 is the pure wave equation; the estimates degenerate there.
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::param(
                "kappa",
                format!("must be positive, got {kappa}"),
            ));
        }
        Ok(Self { eps, kappa })
    }

    /// Quantum-hydrodynamic specialization `kappa = 1/2`.
    pub fn qhd(eps: f64) -> Result<Self> {
        Self::new(eps, 0.5)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(eps, self.kappa)
    }

    /// `phi_eps(|xi|)`, the symbol of `H_eps`.
    #[inline]
    pub fn phi_eps(&self, xi_abs: f64) -> f64 {
        let ek = self.eps * self.kappa * xi_abs;
        xi_abs / self.eps * (1.0 + ek * ek).sqrt()
    }

    /// Group velocity `phi_eps'(|xi|) = eps^-1 phi'(eps |xi|)`.
    #[inline]
    pub fn group_velocity(&self, xi_abs: f64) -> f64 {
        phi_prime_unchecked(self.eps * xi_abs, self.kappa) / self.eps
    }

    /// `phi_eps''(|xi|) = phi''(eps |xi|)`.
    #[inline]
    pub fn phi_eps_second(&self, xi_abs: f64) -> f64 {
        phi_second_unchecked(self.eps * xi_abs, self.kappa)
    }

    /// Hessian determinant of `xi -> phi_eps(|xi|)`; equals `h(eps r)`.
    pub fn hessian_det_eps(&self, xi_abs: f64, d: usize) -> Result<f64> {
        hessian_det(self.eps * xi_abs, self.kappa, d)
    }
}

/// Interaction strength `g`, density `n` and particle mass `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovParams {
    pub g: f64,
    pub n: f64,
    pub m: f64,
}

impl BogoliubovParams {
    pub fn new(g: f64, n: f64, m: f64) -> Result<Self> {
        for (name, v) in [("g", g), ("n", n), ("m", m)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self { g, n, m })
    }

    /// Parameters whose excitation energy coincides with `phi_eps`:
    /// `g n / m = eps^-2` and `1 / 2m = kappa`, taking `n = 1`.
    pub fn matching(params: &DispersionParams) -> Self {
        let m = 1.0 / (2.0 * params.kappa());
        Self {
            g: m / (params.eps() * params.eps()),
            n: 1.0,
            m,
        }
    }

    /// Sound speed `sqrt(g n / m)` of the phonon branch.
    pub fn sound_speed(&self) -> f64 {
        (self.g * self.n / self.m).sqrt()
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            "kappa",
            format!("must be positive, got {kappa}"),
        ))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if (2..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::param("d", format!("dimension must be 2 or 3, got {d}")))
    }
}

/// `phi(r) = r sqrt(1 + kappa^2 r^2)`.
pub fn phi(r: f64, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if !(r >= 0.0) {
        return Err(Error::param("r", format!("must be non-negative, got {r}")));
    }
    let kr = kappa * r;
    Ok(r * (1.0 + kr * kr).sqrt())
}

/// `phi_eps(|xi|)` as a free function.
pub fn phi_eps(xi_abs: f64, params: &DispersionParams) -> Result<f64> {
    if !(xi_abs >= 0.0) {
        return Err(Error::param(
            "xi_abs",
            format!("must be non-negative, got {xi_abs}"),
        ));
    }
    Ok(params.phi_eps(xi_abs))
}

#[inline]
fn phi_prime_unchecked(r: f64, kappa: f64) -> f64 {
    let a = kappa * kappa * r * r;
    (1.0 + 2.0 * a) / (1.0 + a).sqrt()
}

#[inline]
fn phi_second_unchecked(r: f64, kappa: f64) -> f64 {
    let k2 = kappa * kappa;
    let a = k2 * r * r;
    k2 * r * (3.0 + 2.0 * a) / ((1.0 + a) * (1.0 + a).sqrt())
}

/// Closed-form `(phi'(r), phi''(r))` for `r > 0`.
pub fn phi_derivatives(r: f64, kappa: f64) -> Result<(f64, f64)> {
    check_kappa(kappa)?;
    // phi''(0) = 0, which is outside the open half-line where both are positive.
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("must be positive, got {r}")));
    }
    Ok((phi_prime_unchecked(r, kappa), phi_second_unchecked(r, kappa)))
}

/// Hessian determinant of the radial phase, `(phi'(r)/r)^(d-1) phi''(r)`.
pub fn hessian_det(r: f64, kappa: f64, d: usize) -> Result<f64> {
    check_dim(d)?;
    let (p1, p2) = phi_derivatives(r, kappa)?;
    Ok((p1 / r).powi(d as i32 - 1) * p2)
}

/// `h(r)^(-1/2)` divided by its upper envelope
/// `kappa^(-d/2) (kappa r / sqrt(1 + (kappa r)^2))^((d-2)/2)`.
pub fn h_bound_ratio(r: f64, kappa: f64, d: usize) -> Result<f64> {
    let h = hessian_det(r, kappa, d)?;
    let kr = kappa * r;
    let weight = kr / (1.0 + kr * kr).sqrt();
    let envelope = kappa.powf(-(d as f64) / 2.0) * weight.powf((d as f64 - 2.0) / 2.0);
    Ok(h.powf(-0.5) / envelope)
}

/// Bogoliubov excitation energy `sqrt((g n/m) p^2 + (p^2 / 2m)^2)`.
pub fn bogoliubov_c(p: f64, bp: &BogoliubovParams) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(Error::param("p", format!("must be non-negative, got {p}")));
    }
    let c2 = bp.g * bp.n / bp.m;
    // p * sqrt(c2 + (p/2m)^2) avoids overflow of p^4 at large momenta.
    let half = p / (2.0 * bp.m);
    Ok(p * (c2 + half * half).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    WaveLike,
    Transition,
    SchroedingerLike,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::WaveLike => "wave",
            Regime::Transition => "transition",
            Regime::SchroedingerLike => "schroedinger",
        }
    }
}

/// Thresholds on `eps * kappa * |xi|` separating the asymptotic regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub wave_max: f64,
    pub schroedinger_min: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            wave_max: 0.1,
            schroedinger_min: 10.0,
        }
    }
}

pub fn regime_classify(xi_abs: f64, params: &DispersionParams) -> Result<Regime> {
    regime_classify_with(xi_abs, params, RegimeThresholds::default())
}

pub fn regime_classify_with(
    xi_abs: f64,
    params: &DispersionParams,
    thresholds: RegimeThresholds,
) -> Result<Regime> {
    if !(xi_abs >= 0.0) {
        return Err(Error::param(
            "xi_abs",
            format!("must be non-negative, got {xi_abs}"),
        ));
    }
    let s = params.eps() * params.kappa() * xi_abs;
    Ok(if s <= thresholds.wave_max {
        Regime::WaveLike
    } else if s >= thresholds.schroedinger_min {
        Regime::SchroedingerLike
    } else {
        Regime::Transition
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0, 1.0).unwrap(), 0.0);
        assert!((phi(1.0, 1.0).unwrap() - SQRT_2).abs() < 1e-15);
        let r = 1e-6;
        assert!((phi(r, 1.0).unwrap() / r - 1.0).abs() < 1e-12);
        assert!(phi(-1.0, 1.0).is_err());
    }

    #[test]
    fn params_reject_nonpositive() {
        assert!(DispersionParams::new(1.0, 0.0).is_err());
        assert!(DispersionParams::new(0.0, 1.0).is_err());
        assert!(DispersionParams::new(1.0, -0.5).is_err());
        assert!(DispersionParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn phi_eps_matches_dispersion_relation() {
        let p = DispersionParams::qhd(1.0).unwrap();
        assert!((phi_eps(2.0, &p).unwrap() - 2.0 * SQRT_2).abs() < 1e-14);
        assert_eq!(phi_eps(0.0, &p).unwrap(), 0.0);
        for &(x, eps) in &[(0.3, 0.01), (5.0, 0.7), (40.0, 2.0)] {
            let p = DispersionParams::qhd(eps).unwrap();
            let omega = x / eps * (1.0 + (eps * x / 2.0).powi(2)).sqrt();
            assert!((p.phi_eps(x) - omega).abs() <= 1e-14 * omega);
        }
    }

    #[test]
    fn second_derivative_at_one() {
        let (_, p2) = phi_derivatives(1.0, 1.0).unwrap();
        assert!((p2 - 5.0 / (2.0 * SQRT_2)).abs() < 1e-14);
        assert!(phi_derivatives(0.0, 1.0).is_err());
    }

    #[test]
    fn phonon_limit_slope() {
        let (p1, _) = phi_derivatives(1e-8, 1.0).unwrap();
        assert!((p1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_small_r_limits() {
        let r = 1e-6;
        let h2 = hessian_det(r, 1.0, 2).unwrap();
        assert!((h2.powf(-0.5) - 1.0 / 3f64.sqrt()).abs() < 1e-4);
        let h3 = hessian_det(r, 1.0, 3).unwrap();
        assert!((h3.powf(-0.5) / (r / 3.0).sqrt() - 1.0).abs() < 1e-3);
        assert!(hessian_det(0.0, 1.0, 2).is_err());
        assert!(hessian_det(1.0, 1.0, 4).is_err());
    }

    #[test]
    fn bound_ratio_two_dims_is_kappa_scaled() {
        for &k in &[0.5, 1.0, 2.0] {
            for &r in &[1e-3, 0.3, 7.0] {
                let ratio = h_bound_ratio(r, k, 2).unwrap();
                let direct = k * hessian_det(r, k, 2).unwrap().powf(-0.5);
                assert!((ratio - direct).abs() < 1e-12 * direct);
            }
        }
    }

    #[test]
    fn bound_ratio_three_dims_large_r() {
        // phi'/r -> 2 kappa and phi'' -> 2 kappa, so the ratio tends to 8^(-1/2).
        let ratio = h_bound_ratio(1e6, 1.0, 3).unwrap();
        assert!((ratio - 8f64.powf(-0.5)).abs() < 1e-6);
    }

    #[test]
    fn bogoliubov_limits() {
        let bp = BogoliubovParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(bogoliubov_c(0.0, &bp).unwrap(), 0.0);
        let p = 1e-4;
        assert!((bogoliubov_c(p, &bp).unwrap() / (p * bp.sound_speed()) - 1.0).abs() < 1e-6);
        let p = 1e4;
        assert!((bogoliubov_c(p, &bp).unwrap() / (p * p / 2.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn matched_bogoliubov_is_phi_eps() {
        for (eps, kappa) in [(1.0, 0.5), (0.125, 1.0), (2.0, 3.0)] {
            let params = DispersionParams::new(eps, kappa).unwrap();
            let bp = BogoliubovParams::matching(&params);
            for p in [1e-4, 0.3, 1.0, 7.0, 1e4] {
                let c = bogoliubov_c(p, &bp).unwrap();
                assert!((c / params.phi_eps(p) - 1.0).abs() < 8.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn regimes() {
        let p = DispersionParams::qhd(1e-2).unwrap();
        assert_eq!(regime_classify(1.0, &p).unwrap(), Regime::WaveLike);
        let p = DispersionParams::qhd(1.0).unwrap();
        assert_eq!(regime_classify(100.0, &p).unwrap(), Regime::SchroedingerLike);
        assert_eq!(regime_classify(2.0, &p).unwrap(), Regime::Transition);
        let custom = RegimeThresholds {
            wave_max: 1.5,
            schroedinger_min: 3.0,
        };
        assert_eq!(
            regime_classify_with(2.0, &p, custom).unwrap(),
            Regime::WaveLike
        );
    }
}
