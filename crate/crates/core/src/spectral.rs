//! Fourier multipliers on lattice fields.
//!
//! Every operator here returns its result in the domain of its input.
//! Odd symbols (gradient, divergence, Riesz-type operators) and the
//! fractional powers drop the Nyquist bin, which has no partner of
//! opposite sign on the lattice; even integer-power symbols keep it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoff::{CutoffKind, DyadicCutoff};
use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::grid::{Domain, Field, Grid, VectorField};
use crate::par;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Multiply the spectrum of `f` by `symbol(flat_index)`, keeping `f`'s domain.
pub fn map_spectrum<S>(f: &Field, symbol: S) -> Field
where
    S: Fn(usize) -> Complex64 + Sync + Send,
{
    let domain = f.domain();
    let mut g = f.clone().into_frequency();
    par::for_each_indexed(g.values_mut(), |i, v| *v *= symbol(i));
    match domain {
        Domain::Space => g.into_space(),
        Domain::Frequency => g,
    }
}

fn check_finite_symbol<M>(grid: &Grid, m: &M) -> Result<()>
where
    M: Fn(f64) -> f64 + Sync + Send,
{
    let bad = par::ordered_sum(grid.len(), |i| {
        if m(grid.xi_abs(i)).is_finite() {
            0.0
        } else {
            1.0
        }
    });
    if bad > 0.0 {
        Err(Error::NonFinite("radial multiplier"))
    } else {
        Ok(())
    }
}

/// Multiply by the radial symbol `m(|xi|)`.
pub fn apply_radial_multiplier<M>(f: &Field, m: M) -> Result<Field>
where
    M: Fn(f64) -> f64 + Sync + Send,
{
    let grid = *f.grid();
    check_finite_symbol(&grid, &m)?;
    Ok(map_spectrum(f, |i| Complex64::new(m(grid.xi_abs(i)), 0.0)))
}

/// Radial symbol with the Nyquist bin set to zero.
fn apply_fractional<M>(f: &Field, m: M) -> Result<Field>
where
    M: Fn(f64) -> f64 + Sync + Send,
{
    let grid = *f.grid();
    check_finite_symbol(&grid, &m)?;
    Ok(map_spectrum(f, |i| {
        if grid.is_nyquist(i) {
            ZERO
        } else {
            Complex64::new(m(grid.xi_abs(i)), 0.0)
        }
    }))
}

/// Spectral gradient `i xi f^`.
pub fn gradient(f: &Field) -> Result<VectorField> {
    let grid = *f.grid();
    let comps = (0..grid.dim())
        .map(|a| {
            map_spectrum(f, |i| {
                if grid.is_nyquist(i) {
                    ZERO
                } else {
                    I * grid.xi(i)[a]
                }
            })
        })
        .collect();
    VectorField::new(comps)
}

/// Spectral divergence `i xi . v^`.
pub fn divergence(v: &VectorField) -> Result<Field> {
    let grid = *v.grid();
    let domain = v.domain();
    let vh = v.clone().into_frequency();
    let comps = vh.components();
    let mut out = Field::zeros(grid, Domain::Frequency);
    par::for_each_indexed(out.values_mut(), |i, o| {
        if grid.is_nyquist(i) {
            return;
        }
        let xi = grid.xi(i);
        let s: Complex64 = comps
            .iter()
            .enumerate()
            .map(|(a, c)| c.values()[i] * xi[a])
            .sum();
        *o = I * s;
    });
    Ok(out.to_domain(domain))
}

/// Curl-free part `xi (xi . v^) / |xi|^2`, with the zero mode sent to 0.
pub fn helmholtz_q(v: &VectorField) -> Result<VectorField> {
    let grid = *v.grid();
    let d = grid.dim();
    let domain = v.domain();
    let vh = v.clone().into_frequency();
    let mut out: Vec<Field> = (0..d).map(|_| Field::zeros(grid, Domain::Frequency)).collect();
    let src = vh.components();
    // dot = (xi . v^) / |xi|^2 on each mode
    let mut dot = Field::zeros(grid, Domain::Frequency);
    par::for_each_indexed(dot.values_mut(), |i, o| {
        let xi = grid.xi(i);
        let xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if xi2 == 0.0 {
            return;
        }
        let s: Complex64 = src.iter().enumerate().map(|(a, c)| c.values()[i] * xi[a]).sum();
        *o = s / xi2;
    });
    for (a, comp) in out.iter_mut().enumerate() {
        let dv = dot.values();
        par::for_each_indexed(comp.values_mut(), |i, o| *o = dv[i] * grid.xi(i)[a]);
    }
    let q = VectorField::new(out)?;
    Ok(match domain {
        Domain::Space => q.into_space(),
        Domain::Frequency => q,
    })
}

/// Divergence-free part `v - Q v`.
pub fn helmholtz_p(v: &VectorField) -> Result<VectorField> {
    let q = helmholtz_q(v)?;
    let comps = v
        .components()
        .iter()
        .zip(q.components())
        .map(|(vc, qc)| {
            let mut p = vc.clone();
            p.axpy(Complex64::new(-1.0, 0.0), qc)?;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// `(-Delta)^{-1/2} div v`, symbol `i xi . v^ / |xi|`.
pub fn reduced_divergence(v: &VectorField) -> Result<Field> {
    let grid = *v.grid();
    let div = divergence(v)?;
    Ok(map_spectrum(&div, |i| {
        let r = grid.xi_abs(i);
        if r == 0.0 {
            ZERO
        } else {
            Complex64::new(1.0 / r, 0.0)
        }
    }))
}

/// `-(-Delta)^{-1/2} grad f`, symbol `-i xi / |xi|`; the left inverse of
/// [`reduced_divergence`] on curl-free, mean-free fields.
pub fn reduced_gradient(f: &Field) -> Result<VectorField> {
    let grid = *f.grid();
    let comps = (0..grid.dim())
        .map(|a| {
            map_spectrum(f, |i| {
                let r = grid.xi_abs(i);
                if r == 0.0 || grid.is_nyquist(i) {
                    ZERO
                } else {
                    -I * (grid.xi(i)[a] / r)
                }
            })
        })
        .collect();
    VectorField::new(comps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SqrtKind {
    /// `|xi|`
    MinusLaplacian,
    /// `sqrt(1 + eps^2 kappa^2 |xi|^2)`
    OnePlusEps2Kappa2MinusLaplacian,
    /// `(eps |xi| / sqrt(1 + eps^2 |xi|^2))^alpha`
    UepsAlpha(f64),
}

/// Symbol of `U_eps^alpha` at `|xi|`.
#[inline]
pub fn u_eps_symbol(xi_abs: f64, eps: f64, alpha: f64) -> f64 {
    let e = eps * xi_abs;
    (e / (1.0 + e * e).sqrt()).powf(alpha)
}

pub fn sqrt_op(f: &Field, kind: SqrtKind, params: &DispersionParams) -> Result<Field> {
    let eps = params.eps();
    let ek = eps * params.kappa();
    match kind {
        SqrtKind::MinusLaplacian => apply_fractional(f, |r| r),
        SqrtKind::OnePlusEps2Kappa2MinusLaplacian => {
            apply_fractional(f, move |r| (1.0 + ek * ek * r * r).sqrt())
        }
        SqrtKind::UepsAlpha(alpha) => {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(Error::param(
                    "alpha",
                    format!("must be non-negative, got {alpha}"),
                ));
            }
            if alpha == 0.0 {
                return Ok(f.clone());
            }
            apply_fractional(f, move |r| u_eps_symbol(r, eps, alpha))
        }
    }
}

/// Result of a Littlewood-Paley projection.
#[derive(Debug, Clone)]
pub struct Projection {
    pub field: Field,
    /// False when the block misses every nonzero lattice frequency.
    pub in_range: bool,
}

/// Block indices `k` whose annulus meets the nonzero lattice frequencies.
pub fn dyadic_range(grid: &Grid) -> std::ops::RangeInclusive<i32> {
    let lo = (grid.dxi().log2() - 1.0).floor() as i32 + 1;
    let hi = (grid.xi_radial_max().log2() + 1.0).ceil() as i32 - 1;
    lo..=hi
}

/// `P_{2^k} f`, the projection onto `|xi| ~ 2^k`.
pub fn dyadic_project(f: &Field, k: i32, kind: CutoffKind) -> Projection {
    let grid = *f.grid();
    let in_range = dyadic_range(&grid).contains(&k);
    if !in_range {
        return Projection {
            field: Field::zeros(grid, f.domain()),
            in_range,
        };
    }
    let chi = DyadicCutoff::dyadic(k, kind);
    let field = map_spectrum(f, |i| Complex64::new(chi.eval(grid.xi_abs(i)), 0.0));
    Projection { field, in_range }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, seed: u64, real: bool) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| {
                let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
                Complex64::new(rng.random_range(-1.0..1.0), im)
            })
            .collect();
        Field::from_values(grid, values, Domain::Space).unwrap()
    }

    fn random_vector(grid: Grid, seed: u64) -> VectorField {
        VectorField::new(
            (0..grid.dim())
                .map(|a| random_field(grid, seed + a as u64, false))
                .collect(),
        )
        .unwrap()
    }

    fn max_diff(a: &Field, b: &Field) -> f64 {
        let b = b.to_domain(a.domain());
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_and_laplacian_eigenfunction() {
        let g = Grid::new(2, 32, 10.0).unwrap();
        let f = random_field(g, 1, false);
        let same = apply_radial_multiplier(&f, |_| 1.0).unwrap();
        assert!(max_diff(&f, &same) < 1e-13);

        let k = [3, -2];
        let wave = Field::plane_wave(g, &k).unwrap();
        let xi2 = g.xi_abs(g.mode_index(&k).unwrap()).powi(2);
        let lap = apply_radial_multiplier(&wave, |r| r * r).unwrap();
        let mut expect = wave.clone();
        expect.scale(xi2);
        assert!(max_diff(&lap, &expect) < 1e-12);
    }

    #[test]
    fn multipliers_compose_and_commute() {
        let g = Grid::new(3, 8, 4.0).unwrap();
        let f = random_field(g, 2, false);
        let m1 = |r: f64| (1.0 + r * r).sqrt();
        let m2 = |r: f64| (-r).exp();
        let a = apply_radial_multiplier(&apply_radial_multiplier(&f, m1).unwrap(), m2).unwrap();
        let b = apply_radial_multiplier(&apply_radial_multiplier(&f, m2).unwrap(), m1).unwrap();
        let c = apply_radial_multiplier(&f, |r| m1(r) * m2(r)).unwrap();
        assert!(max_diff(&a, &c) < 1e-13);
        assert!(max_diff(&a, &b) < 1e-13);
    }

    #[test]
    fn nan_symbol_is_rejected() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = Field::zeros(g, Domain::Space);
        assert!(matches!(
            apply_radial_multiplier(&f, |r| 1.0 / r),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn real_fields_stay_real() {
        let g = Grid::new(2, 16, 7.0).unwrap();
        let f = random_field(g, 3, true);
        let p = DispersionParams::new(0.3, 0.5).unwrap();
        for kind in [
            SqrtKind::MinusLaplacian,
            SqrtKind::OnePlusEps2Kappa2MinusLaplacian,
            SqrtKind::UepsAlpha(0.7),
        ] {
            assert!(sqrt_op(&f, kind, &p).unwrap().max_imag() < 1e-12);
        }
        for c in gradient(&f).unwrap().components() {
            assert!(c.max_imag() < 1e-12);
        }
    }

    #[test]
    fn gradient_is_curl_free() {
        let g = Grid::new(3, 8, 5.0).unwrap();
        let f = random_field(g, 4, false);
        let grad = gradient(&f).unwrap();
        let q = helmholtz_q(&grad).unwrap();
        let p = helmholtz_p(&grad).unwrap();
        assert!(q.l2_distance(&grad).unwrap() < 1e-12 * grad.l2());
        assert!(p.l2() < 1e-12 * grad.l2());
    }

    #[test]
    fn transverse_field_has_no_q_part() {
        let g = Grid::new(2, 16, 6.0).unwrap();
        // v^ = (-xi_2, xi_1) a(xi) is orthogonal to xi on every mode.
        let a = random_field(g, 5, false).into_frequency();
        let comps = (0..2)
            .map(|c| {
                Field::from_spectrum_fn(g, |i| {
                    let xi = g.xi(i);
                    let w = if c == 0 { -xi[1] } else { xi[0] };
                    a.values()[i] * w
                })
            })
            .collect();
        let v = VectorField::new(comps).unwrap();
        assert!(helmholtz_q(&v).unwrap().l2() < 1e-12 * v.l2());
    }

    #[test]
    fn projection_identities() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let v = random_vector(g, 6);
        let q = helmholtz_q(&v).unwrap();
        let qq = helmholtz_q(&q).unwrap();
        assert!(qq.l2_distance(&q).unwrap() < 1e-12 * v.l2());
        let pq = helmholtz_p(&q).unwrap();
        assert!(pq.l2() < 1e-12 * v.l2());
        let p = helmholtz_p(&v).unwrap();
        let div_p = divergence(&p).unwrap();
        assert!(div_p.l2() < 1e-11 * v.l2());
        let sum: Vec<Field> = p
            .components()
            .iter()
            .zip(q.components())
            .map(|(a, b)| {
                let mut s = a.clone();
                s.axpy(Complex64::new(1.0, 0.0), b).unwrap();
                s
            })
            .collect();
        assert!(VectorField::new(sum).unwrap().l2_distance(&v).unwrap() < 1e-12 * v.l2());
    }

    #[test]
    fn reduced_operators_invert_on_curl_free_fields() {
        let g = Grid::new(3, 8, 9.0).unwrap();
        let v = helmholtz_q(&random_vector(g, 7)).unwrap();
        // drop Nyquist content, which the odd symbols discard
        let comps = v
            .components()
            .iter()
            .map(|c| map_spectrum(c, |i| if g.is_nyquist(i) { ZERO } else { Complex64::new(1.0, 0.0) }))
            .collect();
        let v = VectorField::new(comps).unwrap();
        let back = reduced_gradient(&reduced_divergence(&v).unwrap()).unwrap();
        assert!(back.l2_distance(&v).unwrap() < 1e-12 * v.l2());
    }

    #[test]
    fn u_eps_values() {
        let g = Grid::new(1, 16, 2.0 * std::f64::consts::PI).unwrap();
        let p = DispersionParams::new(1.0, 1.0).unwrap();
        let wave = Field::plane_wave(g, &[1]).unwrap();
        let u = sqrt_op(&wave, SqrtKind::UepsAlpha(1.0), &p).unwrap();
        let mut expect = wave.clone();
        expect.scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!(max_diff(&u, &expect) < 1e-13);
        let f = random_field(g, 8, false);
        assert_eq!(sqrt_op(&f, SqrtKind::UepsAlpha(0.0), &p).unwrap(), f);
        assert!(sqrt_op(&f, SqrtKind::UepsAlpha(-1.0), &p).is_err());
    }

    #[test]
    fn dyadic_ladder() {
        let g = Grid::new(2, 32, 20.0).unwrap();
        let f = random_field(g, 9, false);
        for kind in [CutoffKind::Smooth, CutoffKind::Sharp] {
            let mut sum = Field::zeros(g, Domain::Space);
            for k in dyadic_range(&g) {
                let p = dyadic_project(&f, k, kind);
                assert!(p.in_range);
                sum.axpy(Complex64::new(1.0, 0.0), &p.field).unwrap();
            }
            let mean_free = map_spectrum(&f, |i| {
                if i == 0 {
                    ZERO
                } else {
                    Complex64::new(1.0, 0.0)
                }
            });
            assert!(max_diff(&sum, &mean_free) < 1e-12);
        }
        let r = dyadic_range(&g);
        let out = dyadic_project(&f, r.end() + 1, CutoffKind::Smooth);
        assert!(!out.in_range && out.field.l2() == 0.0);
    }

    #[test]
    fn dyadic_block_center_and_disjointness() {
        // L = 2 pi, so |xi| = 4 is the lattice mode (4, 0).
        let g = Grid::new(2, 32, 2.0 * std::f64::consts::PI).unwrap();
        let wave = Field::plane_wave(g, &[4, 0]).unwrap();
        let p = dyadic_project(&wave, 2, CutoffKind::Smooth).field;
        assert!(max_diff(&p, &wave) < 1e-13);
        let f = random_field(g, 10, false);
        for k in 0..3 {
            let a = dyadic_project(&f, k, CutoffKind::Smooth).field;
            let ab = dyadic_project(&a, k + 2, CutoffKind::Smooth).field;
            assert!(ab.l2() < 1e-13 * f.l2());
        }
    }
}
