//! Dyadic frequency cutoffs.
//!
//! The smooth profile is built from the mollifier `f(x) = exp(-1/x)`:
//! `s(x) = f(x) / (f(x) + f(1 - x))` is a smooth step from 0 to 1 on
//! `[0, 1]`, `eta(r) = 1 - s(r - 1)` equals 1 below 1 and 0 above 2, and the
//! unit block is `psi(r) = eta(r) - eta(2r)`, supported in `[1/2, 2]` with
//! `psi(1) = 1`. The ladder `sum_k psi(2^-k r)` telescopes to 1 for `r > 0`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order tracked by the jets (`chi^(k+1)` for `k <= 4`).
const JET: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    #[default]
    Smooth,
    /// Indicator of `[R / sqrt 2, R sqrt 2)`; a partition of unity with
    /// disjoint neighbours, used for Besov norms.
    Sharp,
}

/// Block `chi(r) = psi(r / R)` around the scale `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicCutoff {
    center: f64,
    kind: CutoffKind,
}

impl DyadicCutoff {
    pub fn new(center: f64, kind: CutoffKind) -> Result<Self> {
        if !(center.is_finite() && center > 0.0) {
            return Err(Error::param(
                "R",
                format!("block scale must be positive, got {center}"),
            ));
        }
        Ok(Self { center, kind })
    }

    pub fn smooth(center: f64) -> Result<Self> {
        Self::new(center, CutoffKind::Smooth)
    }

    /// Block at `R = 2^k`.
    pub fn dyadic(k: i32, kind: CutoffKind) -> Self {
        Self {
            center: 2f64.powi(k),
            kind,
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    /// Closed support `[R/2, 2R]` (the sharp block sits strictly inside).
    pub fn support(&self) -> (f64, f64) {
        (self.center / 2.0, 2.0 * self.center)
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let u = r / self.center;
        match self.kind {
            CutoffKind::Smooth => psi(u),
            CutoffKind::Sharp => {
                if (std::f64::consts::FRAC_1_SQRT_2..std::f64::consts::SQRT_2).contains(&u) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `chi^(m)(r)` for `m <= 5`, exact up to rounding.
    pub fn derivative(&self, r: f64, m: usize) -> Result<f64> {
        if self.kind != CutoffKind::Smooth {
            return Err(Error::param("kind", "sharp cutoffs are not differentiable"));
        }
        if m >= JET {
            return Err(Error::param("m", format!("order must be below {JET}, got {m}")));
        }
        let jet = psi_jet(r / self.center);
        Ok(jet.derivative(m) * self.center.powi(-(m as i32)))
    }

    /// Constants `C(k) = sup_r |chi^(k+1)(r)| R^k` for `k = 0..=4`.
    pub fn derivative_constants(&self) -> Option<[f64; 5]> {
        if self.kind != CutoffKind::Smooth {
            return None;
        }
        let unit = unit_derivative_sups();
        let mut c = [0.0; 5];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = unit[k + 1] / self.center;
        }
        Some(c)
    }
}

#[inline]
fn mollifier(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

#[inline]
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = mollifier(x);
        a / (a + mollifier(1.0 - x))
    }
}

#[inline]
fn eta(r: f64) -> f64 {
    1.0 - smooth_step(r - 1.0)
}

/// Unit dyadic block `eta(r) - eta(2r)`.
#[inline]
pub fn psi(r: f64) -> f64 {
    eta(r) - eta(2.0 * r)
}

/// Truncated Taylor series `sum c_j h^j`, `c_j = f^(j) / j!`.
#[derive(Debug, Clone, Copy)]
struct Jet([f64; JET]);

impl Jet {
    fn constant(v: f64) -> Self {
        let mut c = [0.0; JET];
        c[0] = v;
        Jet(c)
    }

    /// The identity function at `x`, scaled by `slope`.
    fn variable(x: f64, slope: f64) -> Self {
        let mut c = [0.0; JET];
        c[0] = x;
        c[1] = slope;
        Jet(c)
    }

    fn derivative(&self, m: usize) -> f64 {
        let fact: f64 = (1..=m).map(|i| i as f64).product();
        self.0[m] * fact
    }

    fn add(&self, o: &Jet) -> Jet {
        let mut c = self.0;
        c.iter_mut().zip(o.0).for_each(|(a, b)| *a += b);
        Jet(c)
    }

    fn sub(&self, o: &Jet) -> Jet {
        let mut c = self.0;
        c.iter_mut().zip(o.0).for_each(|(a, b)| *a -= b);
        Jet(c)
    }

    fn div(&self, o: &Jet) -> Jet {
        let mut q = [0.0; JET];
        for k in 0..JET {
            let acc: f64 = (1..=k).map(|i| o.0[i] * q[k - i]).sum();
            q[k] = (self.0[k] - acc) / o.0[0];
        }
        Jet(q)
    }

    fn exp(&self) -> Jet {
        let mut e = [0.0; JET];
        e[0] = self.0[0].exp();
        for k in 1..JET {
            let acc: f64 = (1..=k).map(|j| j as f64 * self.0[j] * e[k - j]).sum();
            e[k] = acc / k as f64;
        }
        Jet(e)
    }
}

fn mollifier_jet(x: &Jet) -> Jet {
    if x.0[0] > 0.0 {
        Jet::constant(-1.0).div(x).exp()
    } else {
        Jet::constant(0.0)
    }
}

fn smooth_step_jet(x: &Jet) -> Jet {
    let v = x.0[0];
    if v <= 0.0 {
        Jet::constant(0.0)
    } else if v >= 1.0 {
        Jet::constant(1.0)
    } else {
        let a = mollifier_jet(x);
        let b = mollifier_jet(&Jet::constant(1.0).sub(x));
        a.div(&a.add(&b))
    }
}

fn psi_jet(r: f64) -> Jet {
    let one = Jet::constant(1.0);
    let eta1 = one.sub(&smooth_step_jet(&Jet::variable(r - 1.0, 1.0)));
    let eta2 = one.sub(&smooth_step_jet(&Jet::variable(2.0 * r - 1.0, 2.0)));
    eta1.sub(&eta2)
}

/// `sup |psi^(m)|` over `[1/2, 2]` for `m < JET`, on a fine uniform scan.
fn unit_derivative_sups() -> &'static [f64; JET] {
    static SUPS: OnceLock<[f64; JET]> = OnceLock::new();
    SUPS.get_or_init(|| {
        const SAMPLES: usize = 60_000;
        let mut sups = [0.0f64; JET];
        for i in 0..=SAMPLES {
            let r = 0.5 + 1.5 * i as f64 / SAMPLES as f64;
            let jet = psi_jet(r);
            for (m, s) in sups.iter_mut().enumerate() {
                *s = s.max(jet.derivative(m).abs());
            }
        }
        sups
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_shape() {
        let c = DyadicCutoff::smooth(1.0).unwrap();
        assert_eq!(c.eval(1.0), 1.0);
        assert_eq!(c.eval(0.5), 0.0);
        assert_eq!(c.eval(2.0), 0.0);
        assert_eq!(c.eval(0.4), 0.0);
        assert_eq!(c.eval(3.0), 0.0);
        assert!(c.eval(0.75) > 0.0 && c.eval(1.5) > 0.0);
        let c4 = DyadicCutoff::smooth(4.0).unwrap();
        assert_eq!(c4.eval(4.0), 1.0);
        assert_eq!(c4.support(), (2.0, 8.0));
        assert!(DyadicCutoff::smooth(0.0).is_err());
    }

    #[test]
    fn ladder_is_partition_of_unity() {
        for i in 0..2000 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 1999.0);
            for kind in [CutoffKind::Smooth, CutoffKind::Sharp] {
                let s: f64 = (-15..=15)
                    .map(|k| DyadicCutoff::dyadic(k, kind).eval(r))
                    .sum();
                assert!((s - 1.0).abs() < 1e-12, "r={r}, {kind:?}: {s}");
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let c = DyadicCutoff::smooth(1.0).unwrap();
        let h = 1e-4;
        for &r in &[0.6, 0.8, 1.3, 1.7] {
            let fd1 = (c.eval(r + h) - c.eval(r - h)) / (2.0 * h);
            let fd2 = (c.eval(r + h) - 2.0 * c.eval(r) + c.eval(r - h)) / (h * h);
            assert!((c.derivative(r, 1).unwrap() - fd1).abs() < 1e-5);
            assert!((c.derivative(r, 2).unwrap() - fd2).abs() < 1e-3);
        }
        // Higher orders through a difference of the jet's own lower derivative.
        for m in 2..JET {
            for &r in &[0.7, 1.2, 1.6] {
                let h = 1e-5;
                let fd = (c.derivative(r + h, m - 1).unwrap() - c.derivative(r - h, m - 1).unwrap())
                    / (2.0 * h);
                let exact = c.derivative(r, m).unwrap();
                assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "m={m} r={r}");
            }
        }
    }

    #[test]
    fn derivative_bounds_hold_on_fine_grid() {
        for &big_r in &[0.25, 1.0, 8.0] {
            let c = DyadicCutoff::smooth(big_r).unwrap();
            let consts = c.derivative_constants().unwrap();
            let h = 1e-3 * big_r;
            for (k, &ck) in consts.iter().take(2).enumerate() {
                let m = k + 1;
                let bound = ck * big_r.powi(-(k as i32));
                for i in 1..1500 {
                    let r = big_r * (0.5 + 1.5 * i as f64 / 1500.0);
                    let fd = if m == 1 {
                        (c.eval(r + h) - c.eval(r - h)) / (2.0 * h)
                    } else {
                        (c.eval(r + h) - 2.0 * c.eval(r) + c.eval(r - h)) / (h * h)
                    };
                    assert!(fd.abs() <= bound * 1.01, "k={k} r={r}");
                }
            }
            assert!(consts.iter().all(|v| v.is_finite() && *v > 0.0));
        }
        assert!(DyadicCutoff::new(1.0, CutoffKind::Sharp)
            .unwrap()
            .derivative_constants()
            .is_none());
    }

    #[test]
    fn unit_first_derivative_sup() {
        // psi' peaks at |d/dr eta(2r)| = 2 * s'(1/2) = 4 at r = 3/4.
        let c = DyadicCutoff::smooth(1.0).unwrap().derivative_constants().unwrap();
        assert!((c[0] - 4.0).abs() < 1e-6);
    }
}
