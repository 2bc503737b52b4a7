//! Radial quadrature of the frequency-localized kernel
//!
//! ```text
//! I(t, x, R) = int_{R^d} exp(i t phi_eps(|xi|) + i x . xi) chi_R(|xi|) dxi
//! ```
//!
//! reduced to one dimension: `2 pi int J0(|x| r) e^{i t phi} chi r dr` for
//! `d = 2` and `4 pi int sinc(|x| r) e^{i t phi} chi r^2 dr` for `d = 3`,
//! integrated with composite Gauss-Legendre panels over the block support.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::cutoff::DyadicCutoff;
use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::fit::DecayFit;
use crate::par;

/// Nodes per Gauss-Legendre panel.
pub const PANEL_ORDER: usize = 8;

/// Phase excursion across the block below which fits are pre-asymptotic.
pub const ASYMPTOTIC_PHASE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscIntegralSpec {
    pub d: usize,
    pub t: f64,
    pub x_abs: f64,
    pub cutoff: DyadicCutoff,
    pub params: DispersionParams,
    /// Total quadrature nodes over the support.
    pub quad_points: usize,
}

impl OscIntegralSpec {
    /// Integral with the smallest node count allowed by [`required_points`].
    pub fn resolved(
        d: usize,
        t: f64,
        x_abs: f64,
        cutoff: DyadicCutoff,
        params: DispersionParams,
    ) -> Self {
        let quad_points = required_points(t, x_abs, &cutoff, &params);
        Self {
            d,
            t,
            x_abs,
            cutoff,
            params,
            quad_points,
        }
    }
}

/// Resolution rule `8 (t max phi' + |x|) R`, rounded up to whole panels.
pub fn required_points(t: f64, x_abs: f64, cutoff: &DyadicCutoff, params: &DispersionParams) -> usize {
    let r = cutoff.center();
    let vmax = params.group_velocity(2.0 * r);
    let raw = (8.0 * (t.abs() * vmax + x_abs) * r).ceil().max(PANEL_ORDER as f64) as usize;
    raw.div_ceil(PANEL_ORDER) * PANEL_ORDER
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

#[inline]
fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Radial kernel `K(x r)` of the reduction.
#[inline]
fn kernel(d: usize, z: f64) -> f64 {
    if d == 2 {
        libm::j0(z)
    } else {
        sinc(z)
    }
}

/// The x-independent part of the radial integrand, tabulated on the nodes:
/// `w_j * surface * chi(r_j) r_j^{d-1} e^{i t phi(r_j)}`.
struct RadialTable {
    d: usize,
    r: Vec<f64>,
    a: Vec<Complex64>,
}

impl RadialTable {
    fn new(d: usize, t: f64, cutoff: &DyadicCutoff, params: &DispersionParams, points: usize) -> Self {
        let (gx, gw) = panel_rule();
        let (lo, hi) = cutoff.support();
        let panels = points.div_ceil(PANEL_ORDER);
        let width = (hi - lo) / panels as f64;
        let surface = if d == 2 { 2.0 * PI } else { 4.0 * PI };
        let total = panels * PANEL_ORDER;
        let nodes: Vec<(f64, Complex64)> = par::map_range(total, |j| {
            let (p, q) = (j / PANEL_ORDER, j % PANEL_ORDER);
            let r = lo + width * (p as f64 + 0.5 * (gx[q] + 1.0));
            let w = 0.5 * width * gw[q] * surface * cutoff.eval(r) * r.powi(d as i32 - 1);
            (r, Complex64::from_polar(w, t * params.phi_eps(r)))
        });
        let (r, a) = nodes.into_iter().unzip();
        Self { d, r, a }
    }

    fn eval(&self, x_abs: f64) -> Complex64 {
        let d = self.d;
        par::ordered_sum_complex(self.r.len(), |j| self.a[j] * kernel(d, x_abs * self.r[j]))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::param("d", format!("dimension must be 2 or 3, got {d}")))
    }
}

/// Evaluate `I(t, x, R)`; refuses under-resolved specs.
pub fn osc_integral(spec: &OscIntegralSpec) -> Result<Complex64> {
    check_dim(spec.d)?;
    if !(spec.t.is_finite() && spec.x_abs.is_finite() && spec.x_abs >= 0.0) {
        return Err(Error::param("spec", "t and |x| must be finite, |x| >= 0"));
    }
    let required = required_points(spec.t, spec.x_abs, &spec.cutoff, &spec.params);
    if spec.quad_points < required {
        return Err(Error::UnderResolved {
            points: spec.quad_points,
            required,
        });
    }
    let table = RadialTable::new(spec.d, spec.t, &spec.cutoff, &spec.params, spec.quad_points);
    Ok(table.eval(spec.x_abs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupResult {
    pub sup: f64,
    pub argmax_x: f64,
}

/// `sup_x |I(t, x, R)|` by a coarse scan of `|x|` over
/// `[0, 2 t phi'(2R)]` followed by golden-section refinement.
pub fn sup_over_x(
    d: usize,
    t: f64,
    cutoff: &DyadicCutoff,
    params: &DispersionParams,
    n_x: usize,
) -> Result<SupResult> {
    check_dim(d)?;
    if n_x < 64 {
        return Err(Error::param("n_x", format!("need at least 64 samples, got {n_x}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("must be non-negative, got {t}")));
    }
    let x_max = 2.0 * t * params.group_velocity(2.0 * cutoff.center());
    let points = required_points(t, x_max, cutoff, params);
    let table = RadialTable::new(d, t, cutoff, params, points);
    if x_max == 0.0 {
        return Ok(SupResult {
            sup: table.eval(0.0).norm(),
            argmax_x: 0.0,
        });
    }
    let step = x_max / (n_x - 1) as f64;
    let coarse: Vec<f64> = (0..n_x).map(|i| table.eval(step * i as f64).norm()).collect();
    let (best, _) = coarse
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let lo = step * best.saturating_sub(1) as f64;
    let hi = (step * (best + 1) as f64).min(x_max);
    let f = |x: f64| table.eval(x).norm();
    let (x_star, v_star) = golden_max(&f, lo, hi, 1e-9 * x_max.max(1.0));
    if v_star >= coarse[best] {
        Ok(SupResult {
            sup: v_star,
            argmax_x: x_star,
        })
    } else {
        Ok(SupResult {
            sup: coarse[best],
            argmax_x: step * best as f64,
        })
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Earliest time whose phase excursion `t phi_eps''(R) (R/2)^2` reaches
/// [`ASYMPTOTIC_PHASE`].
pub fn asymptotic_onset(cutoff: &DyadicCutoff, params: &DispersionParams) -> f64 {
    let r = cutoff.center();
    ASYMPTOTIC_PHASE / (params.phi_eps_second(r) * (r / 2.0).powi(2))
}

/// Log-log decay fit of `(t, sup)` samples.
pub fn decay_fit(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.len() < 8 {
        return Err(Error::InsufficientSamples {
            need: 8,
            got: samples.len(),
        });
    }
    if samples.iter().any(|&(t, s)| !(t > 0.0 && s > 0.0)) {
        return Err(Error::param("samples", "times and values must be positive"));
    }
    let (ts, ss): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let lo = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi < 10.0 * lo * (1.0 - 1e-12) {
        return Err(Error::param(
            "samples",
            format!("times must span a decade, got [{lo}, {hi}]"),
        ));
    }
    DecayFit::from_loglog(&ts, &ss)
}

/// Weight `(kappa eps R / sqrt(1 + (eps kappa R)^2))^delta`.
pub fn eps_weight(params: &DispersionParams, r: f64, delta: f64) -> f64 {
    let s = params.kappa() * params.eps() * r;
    (s / (1.0 + s * s).sqrt()).powf(delta)
}

/// `sup_x |I| t^{d/2} kappa^{d/2}` divided by the eps-weight of order `delta`.
pub fn eps_dispersive_check(
    d: usize,
    t: f64,
    cutoff: &DyadicCutoff,
    params: &DispersionParams,
    delta: f64,
    n_x: usize,
) -> Result<f64> {
    check_dim(d)?;
    let max_delta = (d as f64 - 2.0) / 2.0;
    if !(0.0..=max_delta).contains(&delta) {
        return Err(Error::param(
            "delta",
            format!("must lie in [0, {max_delta}], got {delta}"),
        ));
    }
    let sup = sup_over_x(d, t, cutoff, params, n_x)?.sup;
    let half_d = d as f64 / 2.0;
    Ok(sup * t.powf(half_d) * params.kappa().powf(half_d) / eps_weight(params, cutoff.center(), delta))
}
