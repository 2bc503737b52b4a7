//! Split-step solver for `i psi_t = -1/2 Delta psi + (|psi|^2 - 1) psi`
//! around the rest state `psi = 1`, plus Madelung diagnostics and a
//! measurement of acoustic frequencies.
//!
//! Linearizing about `psi = 1` gives the acoustic system with `eps = 1` and
//! `kappa = 1/2`, i.e. `omega = |xi| sqrt(1 + |xi|^2 / 4)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::grid::{Domain, Field, Grid, VectorField};
use crate::par;
use crate::propagator::{self, AcousticState};
use crate::spectral;

/// Largest amplitude accepted as a linear perturbation.
pub const MAX_LINEAR_AMPLITUDE: f64 = 1e-3;
/// Minimum measured periods for a frequency extraction.
pub const MIN_PERIODS: f64 = 6.0;

/// Dispersion parameters of the linearized equation.
pub fn linearized_params() -> DispersionParams {
    DispersionParams::qhd(1.0).expect("constant parameters are valid")
}

/// Predicted acoustic frequency `|xi| sqrt(1 + |xi|^2 / 4)`.
pub fn predicted_omega(xi_abs: f64) -> f64 {
    linearized_params().phi_eps(xi_abs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Kick, drift, kick; second order.
    #[default]
    Strang,
    /// Triple-jump composition of Strang steps; fourth order.
    Yoshida4,
}

const YOSHIDA_W1: f64 = 1.351_207_191_959_657_8;
const YOSHIDA_W0: f64 = -1.702_414_383_919_315_5;

impl Scheme {
    /// Substep weights of one step.
    fn weights(&self) -> &'static [f64] {
        match self {
            Scheme::Strang => &[1.0],
            Scheme::Yoshida4 => &[YOSHIDA_W1, YOSHIDA_W0, YOSHIDA_W1],
        }
    }

    fn max_weight(&self) -> f64 {
        self.weights().iter().fold(0.0, |m, w| f64::max(m, w.abs()))
    }
}

/// Largest `|xi|^2` on the lattice.
fn max_xi2(grid: &Grid) -> f64 {
    grid.xi_radial_max().powi(2)
}

/// `dt max|xi|^2 / 2 < pi` for every substep of `scheme`.
pub fn phase_guard(grid: &Grid, dt: f64, scheme: Scheme) -> Result<()> {
    let phase = (dt * scheme.max_weight()).abs() * max_xi2(grid) / 2.0;
    if phase < PI {
        Ok(())
    } else {
        Err(Error::PhaseGuard(phase))
    }
}

/// Largest step admitted by [`phase_guard`].
pub fn guard_limit(grid: &Grid, scheme: Scheme) -> f64 {
    2.0 * PI / (max_xi2(grid) * scheme.max_weight())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpState {
    pub psi: Field,
    pub time: f64,
    pub dt: f64,
}

impl GpState {
    pub fn new(psi: Field, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        phase_guard(psi.grid(), dt, Scheme::Strang)?;
        Ok(Self {
            psi: psi.into_space(),
            time: 0.0,
            dt,
        })
    }

    /// The rest state `psi = 1`.
    pub fn rest(grid: Grid, dt: f64) -> Result<Self> {
        Self::new(Field::from_space_fn(grid, |_| Complex64::new(1.0, 0.0)), dt)
    }

    /// `1 + a cos(xi_0 . x)` for the lattice mode `k`.
    pub fn perturbed(grid: Grid, k: &[i64], amplitude: f64, dt: f64) -> Result<Self> {
        let xi = grid.xi(grid.mode_index(k)?);
        let psi = Field::from_space_fn(grid, move |x| {
            Complex64::new(1.0 + amplitude * (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]).cos(), 0.0)
        });
        Self::new(psi, dt)
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }
}

/// Reusable stepper holding the drift multipliers of one scheme.
#[derive(Debug, Clone)]
pub struct GpSolver {
    grid: Grid,
    dt: f64,
    scheme: Scheme,
    nonlinear: bool,
    drifts: Vec<Vec<Complex64>>,
}

impl GpSolver {
    pub fn new(grid: Grid, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        phase_guard(&grid, dt, scheme)?;
        let drifts = scheme
            .weights()
            .iter()
            .map(|w| {
                let tau = w * dt;
                par::map_range(grid.len(), |i| {
                    let xi = grid.xi_abs(i);
                    Complex64::from_polar(1.0, -tau * xi * xi / 2.0)
                })
            })
            .collect();
        Ok(Self {
            grid,
            dt,
            scheme,
            nonlinear: true,
            drifts,
        })
    }

    /// Switch the nonlinear kick off, leaving the free Schroedinger flow.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn kick(&self, psi: &mut Field, tau: f64) {
        if !self.nonlinear || tau == 0.0 {
            return;
        }
        par::for_each_indexed(psi.values_mut(), |_, v| {
            let phase = -tau * (v.norm_sqr() - 1.0);
            *v *= Complex64::from_polar(1.0, phase);
        });
    }

    fn drift(&self, psi: Field, which: usize) -> Field {
        let mut h = psi.into_frequency();
        let m = &self.drifts[which];
        par::for_each_indexed(h.values_mut(), |i, v| *v *= m[i]);
        h.into_space()
    }

    /// Advance `state` by one step of the configured scheme.
    pub fn step(&self, state: &mut GpState) -> Result<()> {
        if state.psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut psi = std::mem::replace(&mut state.psi, Field::zeros(self.grid, Domain::Space)).into_space();
        let weights = self.scheme.weights();
        let mut pending = 0.0;
        for (j, w) in weights.iter().enumerate() {
            let half = 0.5 * w * self.dt;
            // Adjacent half kicks commute and merge exactly.
            self.kick(&mut psi, pending + half);
            psi = self.drift(psi, j);
            pending = half;
        }
        self.kick(&mut psi, pending);
        state.psi = psi;
        state.time += self.dt;
        Ok(())
    }

    pub fn advance(&self, state: &mut GpState, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(state)?;
        }
        Ok(())
    }
}

/// One Strang step at the state's own `dt`.
pub fn gp_step(s: &GpState) -> Result<GpState> {
    let solver = GpSolver::new(*s.grid(), s.dt, Scheme::Strang)?;
    let mut out = s.clone();
    solver.step(&mut out)?;
    Ok(out)
}

/// `int |psi|^2`.
pub fn mass(psi: &Field) -> f64 {
    let u = psi.to_domain(Domain::Space);
    let v = u.values();
    par::ordered_sum(v.len(), |i| v[i].norm_sqr()) * psi.grid().cell_volume()
}

/// `int 1/2 |grad psi|^2 + 1/2 (|psi|^2 - 1)^2`.
pub fn energy(psi: &Field) -> f64 {
    let grid = *psi.grid();
    let u = psi.to_domain(Domain::Space);
    let h = psi.to_domain(Domain::Frequency);
    energy_parts(&u, &h, &grid)
}

fn energy_parts(u: &Field, h: &Field, grid: &Grid) -> f64 {
    let (uv, hv) = (u.values(), h.values());
    let kinetic = par::ordered_sum(hv.len(), |i| {
        let r = grid.xi_abs(i);
        r * r * hv[i].norm_sqr()
    });
    let potential = par::ordered_sum(uv.len(), |i| (uv[i].norm_sqr() - 1.0).powi(2));
    0.5 * (kinetic + potential) * grid.cell_volume()
}

/// Hydrodynamic fields `rho = |psi|^2` and `J = Im(conj(psi) grad psi)`.
#[derive(Debug, Clone)]
pub struct MadelungFields {
    pub rho: Field,
    pub j: VectorField,
}

pub fn madelung(s: &GpState) -> Result<MadelungFields> {
    let psi = s.psi.to_domain(Domain::Space);
    let grid = *psi.grid();
    let v = psi.values();
    let rho = Field::from_values(
        grid,
        v.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect(),
        Domain::Space,
    )?;
    let grad = spectral::gradient(&psi)?;
    let comps = grad
        .components()
        .iter()
        .map(|g| {
            let gv = g.values();
            Field::from_values(
                grid,
                (0..v.len())
                    .map(|i| Complex64::new((v[i].conj() * gv[i]).im, 0.0))
                    .collect(),
                Domain::Space,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MadelungFields {
        rho,
        j: VectorField::new(comps)?,
    })
}

/// Internal energy `(rho^gamma - gamma (rho - 1)) / (gamma (gamma - 1))`.
pub fn internal_energy(rho: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must exceed 1, got {gamma}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::param("rho", format!("must be non-negative, got {rho}")));
    }
    Ok((rho.powf(gamma) - gamma * (rho - 1.0)) / (gamma * (gamma - 1.0)))
}

/// Parameters of one frequency measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpeRunSpec {
    pub grid: Grid,
    /// Integer wavevector of the probed mode.
    pub mode: Vec<i64>,
    pub amplitude: f64,
    pub horizon: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// Steps between recorded samples.
    pub sample_stride: usize,
}

impl GpeRunSpec {
    /// Run with `dt = min(dt_scale / omega, 0.9 * guard)`.
    pub fn auto(
        grid: Grid,
        mode: Vec<i64>,
        amplitude: f64,
        periods: f64,
        dt_scale: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        let xi = grid.xi_abs(grid.mode_index(&mode)?);
        let omega = predicted_omega(xi);
        if omega == 0.0 {
            return Err(Error::param("mode", "the zero mode does not oscillate"));
        }
        let dt = (dt_scale / omega).min(0.9 * guard_limit(&grid, scheme));
        let horizon = periods * 2.0 * PI / omega;
        let steps_per_period = 2.0 * PI / omega / dt;
        let sample_stride = ((steps_per_period / 24.0).floor() as usize).max(1);
        Ok(Self {
            grid,
            mode,
            amplitude,
            horizon,
            dt,
            scheme,
            sample_stride,
        })
    }

    pub fn xi_abs(&self) -> Result<f64> {
        Ok(self.grid.xi_abs(self.grid.mode_index(&self.mode)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionMeasurement {
    pub xi_abs: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub omega_predicted: f64,
    pub fit_r_squared: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub steps: usize,
    pub samples: usize,
}

/// Complex amplitude of the symmetrized variable `sigma~ + i J~` at mode `k`,
/// plus mass and energy of the state.
struct Probe {
    basis: Vec<Complex64>,
    sigma_scale: f64,
    xi_abs: f64,
}

impl Probe {
    fn new(grid: &Grid, k: &[i64]) -> Result<Self> {
        let flat = grid.mode_index(k)?;
        let xi = grid.xi(flat);
        let xi_abs = grid.xi_abs(flat);
        let norm = 1.0 / (grid.len() as f64).sqrt();
        let basis = par::map_range(grid.len(), |i| {
            let x = grid.x(i);
            Complex64::from_polar(norm, -(xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]))
        });
        let kappa = linearized_params().kappa();
        Ok(Self {
            basis,
            sigma_scale: (1.0 + kappa * kappa * xi_abs * xi_abs).sqrt(),
            xi_abs,
        })
    }

    fn coefficient(&self, values: impl Fn(usize) -> f64 + Sync + Send) -> Complex64 {
        par::ordered_sum_complex(self.basis.len(), |i| self.basis[i] * values(i))
    }

    /// `(z, mass, energy)` for the current state.
    fn sample(&self, psi: &Field) -> (Complex64, f64, f64) {
        let grid = *psi.grid();
        let u = psi.to_domain(Domain::Space);
        let h = u.clone().into_frequency();
        let lap = spectral::map_spectrum(&h, |i| {
            let r = grid.xi_abs(i);
            Complex64::new(-r * r, 0.0)
        })
        .into_space();
        let (uv, lv) = (u.values(), lap.values());
        let sigma_hat = self.coefficient(|i| uv[i].norm_sqr() - 1.0);
        // div J = Im(conj(psi) Delta psi)
        let div_hat = self.coefficient(|i| (uv[i].conj() * lv[i]).im);
        let z = sigma_hat * self.sigma_scale + Complex64::new(0.0, 1.0) * (div_hat / self.xi_abs);
        let m = par::ordered_sum(uv.len(), |i| uv[i].norm_sqr()) * grid.cell_volume();
        (z, m, energy_parts(&u, &h, &grid))
    }
}

fn unwrap_phases(z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(z.len());
    let mut offset = 0.0;
    let mut prev = 0.0;
    for (j, v) in z.iter().enumerate() {
        let a = v.arg();
        if j > 0 {
            let mut jump = a - prev;
            while jump > PI {
                offset -= 2.0 * PI;
                jump -= 2.0 * PI;
            }
            while jump < -PI {
                offset += 2.0 * PI;
                jump += 2.0 * PI;
            }
        }
        prev = a;
        out.push(a + offset);
    }
    out
}

/// Evolve `1 + a cos(xi_0 . x)` and regress the phase of the mode's
/// symmetrized amplitude against time.
pub fn measure_dispersion(spec: &GpeRunSpec) -> Result<DispersionMeasurement> {
    if !(spec.amplitude > 0.0 && spec.amplitude <= MAX_LINEAR_AMPLITUDE) {
        return Err(Error::param(
            "amplitude",
            format!("must lie in (0, {MAX_LINEAR_AMPLITUDE}], got {}", spec.amplitude),
        ));
    }
    let xi_abs = spec.xi_abs()?;
    let omega_predicted = predicted_omega(xi_abs);
    if omega_predicted == 0.0 {
        return Err(Error::param("mode", "the zero mode does not oscillate"));
    }
    let min_horizon = MIN_PERIODS * 2.0 * PI / omega_predicted;
    if spec.horizon < min_horizon * (1.0 - 1e-12) {
        return Err(Error::param(
            "horizon",
            format!("need at least {min_horizon} ({MIN_PERIODS} periods), got {}", spec.horizon),
        ));
    }
    let steps = (spec.horizon / spec.dt).ceil() as usize;
    let dt = spec.horizon / steps as f64;
    let solver = GpSolver::new(spec.grid, dt, spec.scheme)?;
    let mut state = GpState::perturbed(spec.grid, &spec.mode, spec.amplitude, dt.min(guard_limit(&spec.grid, Scheme::Strang) * 0.99))?;
    state.dt = dt;
    let probe = Probe::new(&spec.grid, &spec.mode)?;
    let stride = spec.sample_stride.max(1);

    let mut times = Vec::new();
    let mut zs = Vec::new();
    let (z0, m0, e0) = probe.sample(&state.psi);
    times.push(0.0);
    zs.push(z0);
    let (mut mass_drift, mut energy_drift) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < steps {
        let n = stride.min(steps - done);
        solver.advance(&mut state, n)?;
        done += n;
        let (z, m, e) = probe.sample(&state.psi);
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("Gross-Pitaevskii evolution"));
        }
        times.push(state.time);
        zs.push(z);
        mass_drift = mass_drift.max(((m - m0) / m0).abs());
        energy_drift = energy_drift.max(((e - e0) / e0).abs());
    }
    let phases = unwrap_phases(&zs);
    let fit = linear_fit(&times, &phases)?;
    Ok(DispersionMeasurement {
        xi_abs,
        amplitude: spec.amplitude,
        omega: fit.slope.abs(),
        omega_predicted,
        fit_r_squared: fit.r_squared,
        mass_drift,
        energy_drift,
        steps,
        samples: times.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtrapolatedDispersion {
    pub xi_abs: f64,
    /// Richardson limit `(4 omega(a/2) - omega(a)) / 3`.
    pub omega: f64,
    pub omega_predicted: f64,
    pub rel_error: f64,
    pub at_amplitude: DispersionMeasurement,
    pub at_half_amplitude: DispersionMeasurement,
}

/// Measure at `a` and `a/2` and remove the `O(a^2)` frequency shift.
pub fn extrapolated_dispersion(spec: &GpeRunSpec) -> Result<ExtrapolatedDispersion> {
    let full = measure_dispersion(spec)?;
    let mut half_spec = spec.clone();
    half_spec.amplitude = spec.amplitude / 2.0;
    let half = measure_dispersion(&half_spec)?;
    let omega = (4.0 * half.omega - full.omega) / 3.0;
    Ok(ExtrapolatedDispersion {
        xi_abs: full.xi_abs,
        omega,
        omega_predicted: full.omega_predicted,
        rel_error: ((omega - full.omega_predicted) / full.omega_predicted).abs(),
        at_amplitude: full,
        at_half_amplitude: half,
    })
}

/// Max over sampled times of `||sigma_GP - sigma_lin|| / ||sigma(0)||`,
/// comparing the nonlinear density fluctuation with the exact linear flow
/// of the same initial data.
pub fn linear_vs_nonlinear(
    grid: Grid,
    mode: &[i64],
    amplitude: f64,
    horizon: f64,
    dt: f64,
    samples: usize,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::param("samples", "must be positive"));
    }
    let steps = (horizon / dt).ceil().max(1.0) as usize;
    let steps = steps.div_ceil(samples) * samples;
    let dt = horizon / steps as f64;
    let solver = GpSolver::new(grid, dt, Scheme::Strang)?;
    let mut state = GpState::perturbed(grid, mode, amplitude, dt)?;
    let fields = madelung(&state)?;
    let mut sigma0 = fields.rho.clone();
    par::for_each_indexed(sigma0.values_mut(), |_, v| *v -= 1.0);
    let denom = sigma0.l2();
    let lin0 = propagator::symmetrize(&AcousticState::new(sigma0, fields.j, linearized_params())?)?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        solver.advance(&mut state, steps / samples)?;
        let mut sigma = madelung(&state)?.rho;
        par::for_each_indexed(sigma.values_mut(), |_, v| *v -= 1.0);
        let lin = propagator::evolve_homogeneous(&lin0, state.time)?;
        let lin_sigma = propagator::desymmetrize(&lin)?.sigma.into_space();
        let diff = sigma.l2_distance(&lin_sigma)?;
        if denom > 0.0 {
            worst = worst.max(diff / denom);
        } else if diff > 0.0 {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}
