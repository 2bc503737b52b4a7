//! Exact evolution of the linear acoustic system
//!
//! ```text
//! d/dt sigma + eps^-1 div J = 0
//! d/dt J + eps^-1 grad (1 - eps^2 kappa^2 Delta) sigma = F
//! ```
//!
//! through the symmetrized variables
//! `sigma~ = (1 - eps^2 kappa^2 Delta)^{1/2} sigma` and
//! `J~ = (-Delta)^{-1/2} div J`, which obey
//! `d/dt sigma~ = -H J~`, `d/dt J~ = H sigma~ + F~` with `H` the multiplier
//! `phi_eps(|xi|)`. Each Fourier mode rotates by the angle `t phi_eps`, so
//! no time stepping is involved.
//!
//! Symmetrization drops the Nyquist bins (see [`crate::spectral`]); round
//! trips are exact for data without Nyquist content.

use num_complex::Complex64;

use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::grid::{Domain, Field, Grid, VectorField};
use crate::par;
use crate::spectral::{self, SqrtKind};

/// `phi_eps(|xi|)` on every lattice mode, in flat order.
pub fn phi_table(grid: &Grid, params: &DispersionParams) -> Vec<f64> {
    par::map_range(grid.len(), |i| params.phi_eps(grid.xi_abs(i)))
}

/// Symmetrized pair `(sigma~, J~)` at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymAcousticState {
    pub sigma_tilde: Field,
    pub j_tilde: Field,
    pub params: DispersionParams,
    pub time: f64,
}

/// Physical pair `(sigma, J)` at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticState {
    pub sigma: Field,
    pub j: VectorField,
    pub params: DispersionParams,
    pub time: f64,
}

impl SymAcousticState {
    pub fn new(sigma_tilde: Field, j_tilde: Field, params: DispersionParams) -> Result<Self> {
        sigma_tilde.check_same_grid(&j_tilde)?;
        Ok(Self {
            sigma_tilde,
            j_tilde,
            params,
            time: 0.0,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.sigma_tilde.grid()
    }

    /// `||sigma~||^2 + ||J~||^2` in plain `l^2`.
    pub fn energy(&self) -> f64 {
        self.sigma_tilde.l2().powi(2) + self.j_tilde.l2().powi(2)
    }

    /// `sigma~ + i J~`, the variable on which the semigroup acts.
    pub fn complexified(&self) -> Result<Field> {
        let mut z = self.sigma_tilde.clone();
        z.axpy(Complex64::new(0.0, 1.0), &self.j_tilde.to_domain(z.domain()))?;
        Ok(z)
    }
}

impl AcousticState {
    pub fn new(sigma: Field, j: VectorField, params: DispersionParams) -> Result<Self> {
        sigma.check_same_grid(&j.components()[0])?;
        Ok(Self {
            sigma,
            j,
            params,
            time: 0.0,
        })
    }

    /// `d/dt sigma` at this instant, `-eps^-1 div J`.
    pub fn sigma_dot(&self) -> Result<Field> {
        let mut s = spectral::divergence(&self.j)?;
        s.scale(-1.0 / self.params.eps());
        Ok(s)
    }
}

/// Time samples of the forcing together with `F~ = (-Delta)^{-1/2} div F`.
#[derive(Debug, Clone)]
pub struct ForcingTerm {
    times: Vec<f64>,
    f: Option<Vec<VectorField>>,
    f_tilde: Vec<Field>,
}

impl ForcingTerm {
    pub fn new(times: Vec<f64>, f: Vec<VectorField>) -> Result<Self> {
        if times.len() != f.len() {
            return Err(Error::param(
                "forcing",
                format!("{} times for {} samples", times.len(), f.len()),
            ));
        }
        let f_tilde = f
            .iter()
            .map(|v| Ok(spectral::reduced_divergence(v)?.into_frequency()))
            .collect::<Result<Vec<_>>>()?;
        Self::check_times(&times)?;
        Ok(Self {
            times,
            f: Some(f),
            f_tilde,
        })
    }

    /// Build from precomputed `F~` samples; the vector samples are not kept.
    pub fn from_tilde(times: Vec<f64>, f_tilde: Vec<Field>) -> Result<Self> {
        if times.len() != f_tilde.len() {
            return Err(Error::param(
                "forcing",
                format!("{} times for {} samples", times.len(), f_tilde.len()),
            ));
        }
        Self::check_times(&times)?;
        Ok(Self {
            times,
            f: None,
            f_tilde: f_tilde.into_iter().map(Field::into_frequency).collect(),
        })
    }

    /// Zero forcing sampled at `samples` uniform times on `[0, t]`.
    pub fn zero(grid: Grid, t: f64, samples: usize) -> Result<Self> {
        let times = uniform_times(t, samples)?;
        let f_tilde = vec![Field::zeros(grid, Domain::Frequency); samples];
        Self::from_tilde(times, f_tilde)
    }

    fn check_times(times: &[f64]) -> Result<()> {
        if times.len() < 2 {
            return Err(Error::InsufficientSamples {
                need: 2,
                got: times.len(),
            });
        }
        let span = times[times.len() - 1] - times[0];
        let step = span / (times.len() - 1) as f64;
        let uniform = span > 0.0
            && times
                .iter()
                .enumerate()
                .all(|(i, &s)| (s - (times[0] + step * i as f64)).abs() <= 1e-9 * span);
        if uniform {
            Ok(())
        } else {
            Err(Error::param("times", "forcing must be sampled uniformly"))
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> Option<&[VectorField]> {
        self.f.as_deref()
    }

    pub fn f_tilde(&self) -> &[Field] {
        &self.f_tilde
    }
}

/// `samples` uniform times on `[0, t]`.
pub fn uniform_times(t: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: samples,
        });
    }
    Ok((0..samples)
        .map(|i| t * i as f64 / (samples - 1) as f64)
        .collect())
}

/// Change of variables `(sigma, J) -> (sigma~, J~)`; only `Q J` survives.
pub fn symmetrize(state: &AcousticState) -> Result<SymAcousticState> {
    let sigma_tilde = spectral::sqrt_op(
        &state.sigma,
        SqrtKind::OnePlusEps2Kappa2MinusLaplacian,
        &state.params,
    )?;
    let j_tilde = spectral::reduced_divergence(&state.j)?.to_domain(sigma_tilde.domain());
    Ok(SymAcousticState {
        sigma_tilde,
        j_tilde,
        params: state.params,
        time: state.time,
    })
}

/// Inverse change of variables, returning `(sigma, Q J)`.
pub fn desymmetrize(s: &SymAcousticState) -> Result<AcousticState> {
    let grid = *s.grid();
    let jt = s.j_tilde.clone().into_frequency();
    let zero = jt.values()[0].norm();
    let scale = jt.l2().max(s.sigma_tilde.l2()).max(f64::MIN_POSITIVE);
    if zero > 1e-12 * scale {
        return Err(Error::ZeroModeContent(zero));
    }
    let ek = s.params.eps() * s.params.kappa();
    let sigma = spectral::map_spectrum(&s.sigma_tilde, |i| {
        if grid.is_nyquist(i) {
            Complex64::new(0.0, 0.0)
        } else {
            let r = grid.xi_abs(i);
            Complex64::new(1.0 / (1.0 + ek * ek * r * r).sqrt(), 0.0)
        }
    });
    let j = spectral::reduced_gradient(&jt)?;
    let j = match sigma.domain() {
        Domain::Space => j.into_space(),
        Domain::Frequency => j,
    };
    Ok(AcousticState {
        sigma,
        j,
        params: s.params,
        time: s.time,
    })
}

/// Rotate every mode of `(sigma~, J~)` by `t phi_eps(|xi|)`.
pub fn evolve_homogeneous(s: &SymAcousticState, t: f64) -> Result<SymAcousticState> {
    let grid = *s.grid();
    let domain = s.sigma_tilde.domain();
    let mut a = s.sigma_tilde.clone().into_frequency();
    let mut b = s.j_tilde.clone().into_frequency();
    let phi = phi_table(&grid, &s.params);
    rotate(a.values_mut(), b.values_mut(), &phi, t);
    Ok(SymAcousticState {
        sigma_tilde: a.to_domain(domain),
        j_tilde: b.to_domain(domain),
        params: s.params,
        time: s.time + t,
    })
}

fn rotate(a: &mut [Complex64], b: &mut [Complex64], phi: &[f64], t: f64) {
    let b_ro: &[Complex64] = b;
    let mut new_b = vec![Complex64::new(0.0, 0.0); b_ro.len()];
    {
        let a_ro: &[Complex64] = a;
        par::for_each_indexed(&mut new_b, |i, nb| {
            let (sn, cs) = (t * phi[i]).sin_cos();
            *nb = a_ro[i] * sn + b_ro[i] * cs;
        });
    }
    par::for_each_indexed(a, |i, av| {
        let (sn, cs) = (t * phi[i]).sin_cos();
        *av = *av * cs - b_ro[i] * sn;
    });
    b.copy_from_slice(&new_b);
}

/// `e^{itH_eps} f`, the multiplier `exp(i t phi_eps(|xi|))`.
pub fn semigroup_apply(f: &Field, t: f64, params: &DispersionParams) -> Field {
    let grid = *f.grid();
    spectral::map_spectrum(f, |i| {
        Complex64::from_polar(1.0, t * params.phi_eps(grid.xi_abs(i)))
    })
}

/// Forced evolution over `[0, t]` by the Duhamel formula.
///
/// The forcing integral uses the midpoint rule on `substeps` panels whose
/// endpoints are forcing samples; the midpoint value of `F~` is the mean of
/// the two endpoint samples.
pub fn duhamel(
    s0: &SymAcousticState,
    forcing: &ForcingTerm,
    t: f64,
    substeps: usize,
) -> Result<SymAcousticState> {
    if substeps == 0 {
        return Err(Error::param("substeps", "must be positive"));
    }
    let m = forcing.times.len();
    if m < substeps + 1 {
        return Err(Error::InsufficientSamples {
            need: substeps + 1,
            got: m,
        });
    }
    if (m - 1) % substeps != 0 {
        return Err(Error::param(
            "substeps",
            format!("{} forcing intervals are not a multiple of {substeps}", m - 1),
        ));
    }
    let span = forcing.times[m - 1] - forcing.times[0];
    if forcing.times[0].abs() > 1e-12 * t.abs().max(1.0) || (span - t).abs() > 1e-9 * t.abs().max(1.0)
    {
        return Err(Error::param(
            "forcing",
            format!("samples cover [{}, {}], need [0, {t}]", forcing.times[0], forcing.times[m - 1]),
        ));
    }
    let grid = *s0.grid();
    if forcing.f_tilde[0].grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let mut out = evolve_homogeneous(s0, t)?;
    let domain = out.sigma_tilde.domain();
    let mut a = out.sigma_tilde.into_frequency();
    let mut b = out.j_tilde.into_frequency();
    let phi = phi_table(&grid, &s0.params);
    let stride = (m - 1) / substeps;
    let h = t / substeps as f64;
    for p in 0..substeps {
        let f0 = forcing.f_tilde[p * stride].values();
        let f1 = forcing.f_tilde[(p + 1) * stride].values();
        let lag = t - (p as f64 + 0.5) * h;
        // Rotation of [0; F~] by lag * phi.
        par::for_each_indexed(a.values_mut(), |i, av| {
            let fm = (f0[i] + f1[i]) * 0.5;
            *av -= fm * ((lag * phi[i]).sin() * h);
        });
        par::for_each_indexed(b.values_mut(), |i, bv| {
            let fm = (f0[i] + f1[i]) * 0.5;
            *bv += fm * ((lag * phi[i]).cos() * h);
        });
    }
    out.sigma_tilde = a.to_domain(domain);
    out.j_tilde = b.to_domain(domain);
    Ok(out)
}

/// Exact solution of the homogeneous second-order equation
/// `sigma'' = eps^-2 Delta (1 - eps^2 kappa^2 Delta) sigma`.
pub fn boussinesq_evolve(
    sigma0: &Field,
    sigma_dot0: &Field,
    t: f64,
    params: &DispersionParams,
) -> Result<Field> {
    sigma0.check_same_grid(sigma_dot0)?;
    let grid = *sigma0.grid();
    let domain = sigma0.domain();
    let s0 = sigma0.clone().into_frequency();
    let v0 = sigma_dot0.clone().into_frequency();
    let (s0v, v0v) = (s0.values(), v0.values());
    let out = Field::from_spectrum_fn(grid, |i| {
        let w = params.phi_eps(grid.xi_abs(i));
        if w == 0.0 {
            s0v[i] + v0v[i] * t
        } else {
            let (sn, cs) = (t * w).sin_cos();
            s0v[i] * cs + v0v[i] * (sn / w)
        }
    });
    Ok(out.to_domain(domain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::helmholtz_q;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Real, mean-free data without Nyquist content.
    fn band_limited(grid: Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<Complex64> = (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        let f = Field::from_values(grid, vals, Domain::Space).unwrap();
        spectral::map_spectrum(&f, |i| {
            if i == 0 || grid.is_nyquist(i) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }

    fn state(grid: Grid, params: DispersionParams, seed: u64) -> AcousticState {
        let sigma = band_limited(grid, seed);
        let j = VectorField::new(
            (0..grid.dim())
                .map(|a| band_limited(grid, seed + 1 + a as u64))
                .collect(),
        )
        .unwrap();
        AcousticState::new(sigma, j, params).unwrap()
    }

    #[test]
    fn divergence_free_current_has_no_potential() {
        let g = Grid::new(2, 16, 8.0).unwrap();
        let p = DispersionParams::new(0.5, 1.0).unwrap();
        let x = state(g, p, 1);
        let solenoidal = spectral::helmholtz_p(&x.j).unwrap();
        let y = AcousticState::new(x.sigma.clone(), solenoidal, p).unwrap();
        assert!(symmetrize(&y).unwrap().j_tilde.l2() < 1e-12 * x.j.l2());
    }

    #[test]
    fn single_mode_multipliers() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let p = DispersionParams::new(1.0, 1.0).unwrap();
        let wave = Field::plane_wave(g, &[1, 0]).unwrap();
        let x = AcousticState::new(wave.clone(), VectorField::zeros(g, Domain::Space), p).unwrap();
        let s = symmetrize(&x).unwrap();
        let mut expect = wave.clone();
        expect.scale(2f64.sqrt());
        assert!(s.sigma_tilde.l2_distance(&expect).unwrap() < 1e-12 * expect.l2());
        let back = desymmetrize(&s).unwrap();
        assert!(back.sigma.l2_distance(&wave).unwrap() < 1e-12 * wave.l2());
    }

    #[test]
    fn small_eps_symmetrization_is_near_identity() {
        let g = Grid::new(2, 16, 8.0).unwrap();
        for &eps in &[1e-1, 1e-2, 1e-3] {
            let p = DispersionParams::new(eps, 1.0).unwrap();
            let x = state(g, p, 2);
            let s = symmetrize(&x).unwrap();
            let rel = s.sigma_tilde.l2_distance(&x.sigma).unwrap() / x.sigma.l2();
            let bound = (eps * g.xi_radial_max()).powi(2) / 2.0;
            assert!(rel <= bound, "eps={eps}: {rel} > {bound}");
        }
    }

    #[test]
    fn round_trip_recovers_q_part() {
        let g = Grid::new(3, 8, 6.0).unwrap();
        let p = DispersionParams::qhd(0.7).unwrap();
        let x = state(g, p, 3);
        let back = desymmetrize(&symmetrize(&x).unwrap()).unwrap();
        let q = helmholtz_q(&x.j).unwrap();
        assert!(back.sigma.l2_distance(&x.sigma).unwrap() < 1e-12 * x.sigma.l2());
        assert!(back.j.l2_distance(&q).unwrap() < 1e-12 * q.l2());
        let zero = AcousticState::new(
            Field::zeros(g, Domain::Space),
            VectorField::zeros(g, Domain::Space),
            p,
        )
        .unwrap();
        let z = desymmetrize(&symmetrize(&zero).unwrap()).unwrap();
        assert_eq!(z.sigma.l2(), 0.0);
        assert_eq!(z.j.l2(), 0.0);
    }

    #[test]
    fn zero_mode_potential_is_flagged() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let p = DispersionParams::qhd(1.0).unwrap();
        let mut jt = Field::zeros(g, Domain::Frequency);
        jt.values_mut()[0] = Complex64::new(1.0, 0.0);
        let s = SymAcousticState::new(Field::zeros(g, Domain::Frequency), jt, p).unwrap();
        assert!(matches!(desymmetrize(&s), Err(Error::ZeroModeContent(_))));
    }

    #[test]
    fn rotation_identities() {
        let g = Grid::new(2, 16, 10.0).unwrap();
        let p = DispersionParams::qhd(0.3).unwrap();
        let s = symmetrize(&state(g, p, 4)).unwrap();
        let same = evolve_homogeneous(&s, 0.0).unwrap();
        assert!(same.sigma_tilde.l2_distance(&s.sigma_tilde).unwrap() < 1e-14);
        let later = evolve_homogeneous(&s, 1e3).unwrap();
        assert!((later.energy() - s.energy()).abs() < 1e-12 * s.energy());
        assert_eq!(later.time, 1e3);
    }

    #[test]
    fn single_mode_period() {
        // L = 2 pi makes (2, 0) the mode |xi| = 2; phi_eps = 2 sqrt 2.
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let p = DispersionParams::qhd(1.0).unwrap();
        let wave = Field::plane_wave(g, &[2, 0]).unwrap();
        let s = SymAcousticState::new(wave.clone(), Field::zeros(g, Domain::Space), p).unwrap();
        let period = 2.0 * PI / (2.0 * 2f64.sqrt());
        let back = evolve_homogeneous(&s, period).unwrap();
        assert!(back.sigma_tilde.l2_distance(&wave).unwrap() < 1e-12 * wave.l2());
        assert!(back.j_tilde.l2() < 1e-12 * wave.l2());
    }

    #[test]
    fn semigroup_is_unitary_group_and_diagonalizes_rotation() {
        let g = Grid::new(2, 16, 10.0).unwrap();
        let p = DispersionParams::new(0.4, 0.8).unwrap();
        let f = band_limited(g, 5);
        let a = semigroup_apply(&f, 2.5, &p);
        assert!((a.l2() - f.l2()).abs() < 1e-13 * f.l2());
        let ab = semigroup_apply(&a, -0.75, &p);
        let direct = semigroup_apply(&f, 1.75, &p);
        assert!(ab.l2_distance(&direct).unwrap() < 1e-13 * f.l2());

        let s = SymAcousticState::new(band_limited(g, 6), band_limited(g, 7), p).unwrap();
        let z = semigroup_apply(&s.complexified().unwrap(), 3.0, &p);
        let zr = evolve_homogeneous(&s, 3.0).unwrap().complexified().unwrap();
        assert!(z.l2_distance(&zr).unwrap() < 1e-12 * z.l2());
    }

    fn constant_forcing(g: Grid, k: &[i64], t: f64, samples: usize) -> (ForcingTerm, Field) {
        let ft = Field::plane_wave(g, k).unwrap();
        let times = uniform_times(t, samples).unwrap();
        let forcing = ForcingTerm::from_tilde(times, vec![ft.clone(); samples]).unwrap();
        (forcing, ft)
    }

    #[test]
    fn duhamel_zero_forcing_is_free_flow() {
        let g = Grid::new(2, 16, 10.0).unwrap();
        let p = DispersionParams::qhd(0.5).unwrap();
        let s = symmetrize(&state(g, p, 8)).unwrap();
        let forcing = ForcingTerm::zero(g, 2.0, 11).unwrap();
        let a = duhamel(&s, &forcing, 2.0, 10).unwrap();
        let b = evolve_homogeneous(&s, 2.0).unwrap();
        assert!(a.sigma_tilde.l2_distance(&b.sigma_tilde).unwrap() < 1e-13 * s.sigma_tilde.l2());
        assert!(a.j_tilde.l2_distance(&b.j_tilde).unwrap() < 1e-13 * s.j_tilde.l2());
        assert!(matches!(
            duhamel(&s, &forcing, 2.0, 20),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn duhamel_constant_mode_closed_form() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let p = DispersionParams::qhd(1.0).unwrap();
        let t = 1.0;
        let zero = SymAcousticState::new(
            Field::zeros(g, Domain::Space),
            Field::zeros(g, Domain::Space),
            p,
        )
        .unwrap();
        for k in [[2i64, 0], [0, 0]] {
            let (forcing, ft) = constant_forcing(g, &k, t, 1001);
            let out = duhamel(&zero, &forcing, t, 1000).unwrap();
            let w = p.phi_eps(g.xi_abs(g.mode_index(&k).unwrap()));
            let (cs, cj) = if w == 0.0 {
                (0.0, t)
            } else {
                (-(1.0 - (t * w).cos()) / w, (t * w).sin() / w)
            };
            let mut es = ft.clone();
            es.scale(cs);
            let mut ej = ft.clone();
            ej.scale(cj);
            let norm = ft.l2();
            assert!(out.sigma_tilde.l2_distance(&es).unwrap() < 1e-6 * norm, "{k:?}");
            assert!(out.j_tilde.l2_distance(&ej).unwrap() < 1e-6 * norm, "{k:?}");
        }
    }

    #[test]
    fn duhamel_is_second_order() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let p = DispersionParams::qhd(1.0).unwrap();
        let t = 3.0;
        let wave = Field::plane_wave(g, &[3]).unwrap();
        // F~(s) = cos(s) e^{i 3 x}, sampled finely enough for every panel count.
        let samples = 641;
        let times = uniform_times(t, samples).unwrap();
        let f_tilde = times
            .iter()
            .map(|&s| {
                let mut f = wave.clone();
                f.scale(s.cos());
                f
            })
            .collect();
        let forcing = ForcingTerm::from_tilde(times, f_tilde).unwrap();
        let zero = SymAcousticState::new(Field::zeros(g, Domain::Space), Field::zeros(g, Domain::Space), p)
            .unwrap();
        let reference = duhamel(&zero, &forcing, t, 640).unwrap();
        let err = |n: usize| {
            duhamel(&zero, &forcing, t, n)
                .unwrap()
                .sigma_tilde
                .l2_distance(&reference.sigma_tilde)
                .unwrap()
        };
        let (e1, e2) = (err(10), err(20));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn boussinesq_matches_first_order_system() {
        let g = Grid::new(2, 16, 12.0).unwrap();
        let p = DispersionParams::qhd(0.6).unwrap();
        let x = state(g, p, 9);
        let sym = symmetrize(&x).unwrap();
        let q = helmholtz_q(&x.j).unwrap();
        let qx = AcousticState::new(x.sigma.clone(), q, p).unwrap();
        for &t in &[0.0, 0.3, 4.0] {
            let first = desymmetrize(&evolve_homogeneous(&sym, t).unwrap()).unwrap().sigma;
            let second = boussinesq_evolve(&x.sigma, &qx.sigma_dot().unwrap(), t, &p).unwrap();
            assert!(first.l2_distance(&second).unwrap() < 1e-10 * x.sigma.l2(), "t={t}");
        }
    }

    #[test]
    fn boussinesq_residual() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let p = DispersionParams::qhd(0.5).unwrap();
        let wave = Field::plane_wave(g, &[3]).unwrap();
        let mut v0 = wave.clone();
        v0.scale(0.7);
        let w = p.phi_eps(3.0);
        let at = |t: f64| boussinesq_evolve(&wave, &v0, t, &p).unwrap().into_frequency();
        let (t, h) = (1.3, 1e-3);
        let idx = g.mode_index(&[3]).unwrap();
        let s = |t: f64| at(t).values()[idx];
        let second = (s(t + h) - s(t) * 2.0 + s(t - h)) / (h * h);
        let resid = (second + s(t) * (w * w)).norm() / (w * w * s(t).norm().max(1.0));
        assert!(resid < 1e-5, "{resid}");
        let zero_mode = Field::from_spectrum_fn(g, |i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let moved = boussinesq_evolve(&zero_mode, &zero_mode, 2.0, &p).unwrap();
        assert!((moved.values()[0] - 3.0).norm() < 1e-15);
    }
}
