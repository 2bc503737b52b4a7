//! Periodic lattices, complex fields on them and the unitary FFT.
//!
//! Values are stored row-major with the last axis fastest. Frequency-domain
//! values use the natural FFT ordering: index `i` on an axis carries the
//! wavenumber `k = i` for `i < n/2` and `k = i - n` otherwise, so the
//! lattice frequency is `xi = 2 pi k / L` with `k` in `-n/2..n/2`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Space,
    Frequency,
}

/// Cubic periodic lattice with `n` points per axis and period `box_length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    d: usize,
    n: usize,
    box_length: f64,
}

impl Grid {
    pub fn new(d: usize, n: usize, box_length: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::param("d", format!("must be 1, 2 or 3, got {d}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::param(
                "n",
                format!("must be a power of two >= 2, got {n}"),
            ));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::param(
                "box_length",
                format!("must be positive, got {box_length}"),
            ));
        }
        Ok(Self { d, n, box_length })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Number of lattice points, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Measure of one lattice cell, `spacing^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    pub fn box_volume(&self) -> f64 {
        self.box_length.powi(self.d as i32)
    }

    /// Spacing of the frequency lattice, `2 pi / L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Largest frequency magnitude along one axis, `pi n / L`.
    pub fn xi_axis_max(&self) -> f64 {
        PI * self.n as f64 / self.box_length
    }

    /// Largest `|xi|` on the lattice (a corner of the Brillouin cube).
    pub fn xi_radial_max(&self) -> f64 {
        self.xi_axis_max() * (self.d as f64).sqrt()
    }

    /// Signed wavenumber of axis index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Axis index carrying the signed wavenumber `k`.
    pub fn index_of_wavenumber(&self, k: i64) -> Result<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            return Err(Error::param(
                "k",
                format!("wavenumber {k} outside -{half}..{half}"),
            ));
        }
        Ok(k.rem_euclid(self.n as i64) as usize)
    }

    /// Per-axis indices of a flat index; unused axes are 0.
    #[inline]
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = flat;
        for a in (0..self.d).rev() {
            idx[a] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        idx[..self.d].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Flat index of the lattice mode with integer wavevector `k`.
    pub fn mode_index(&self, k: &[i64]) -> Result<usize> {
        if k.len() != self.d {
            return Err(Error::param(
                "k",
                format!("expected {} components, got {}", self.d, k.len()),
            ));
        }
        let mut idx = [0usize; 3];
        for (a, &ka) in k.iter().enumerate() {
            idx[a] = self.index_of_wavenumber(ka)?;
        }
        Ok(self.ravel(idx))
    }

    /// Frequency vector of a flat index; unused axes are 0.
    #[inline]
    pub fn xi(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let dxi = self.dxi();
        let mut xi = [0.0; 3];
        for a in 0..self.d {
            xi[a] = dxi * self.wavenumber(idx[a]) as f64;
        }
        xi
    }

    #[inline]
    pub fn xi_abs(&self, flat: usize) -> f64 {
        let xi = self.xi(flat);
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
    }

    /// True if any axis of the mode sits on the unpaired Nyquist bin.
    #[inline]
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.unravel(flat);
        idx[..self.d].contains(&(self.n / 2))
    }

    /// Position of a flat index, in `[0, L)^d`.
    #[inline]
    pub fn x(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = h * idx[a] as f64;
        }
        x
    }
}

/// Complex lattice function tagged with the domain it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    domain: Domain,
}

impl Field {
    pub fn zeros(grid: Grid, domain: Domain) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            domain,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::param(
                "values",
                format!("expected {} entries, got {}", grid.len(), values.len()),
            ));
        }
        Ok(Self {
            grid,
            values,
            domain,
        })
    }

    /// Sample `f(x)` at every lattice point.
    pub fn from_space_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> Complex64 + Sync + Send,
    {
        let mut field = Self::zeros(grid, Domain::Space);
        par::for_each_indexed(&mut field.values, |i, v| *v = f(grid.x(i)));
        field
    }

    /// Fill the frequency domain with `f(flat_index)`.
    pub fn from_spectrum_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        let mut field = Self::zeros(grid, Domain::Frequency);
        par::for_each_indexed(&mut field.values, |i, v| *v = f(i));
        field
    }

    /// Plane wave `e^{i xi . x}` for the integer wavevector `k`.
    pub fn plane_wave(grid: Grid, k: &[i64]) -> Result<Self> {
        let flat = grid.mode_index(k)?;
        let xi = grid.xi(flat);
        Ok(Self::from_space_fn(grid, move |x| {
            Complex64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2])
        }))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn expect_domain(&self, expected: Domain) -> Result<()> {
        if self.domain == expected {
            Ok(())
        } else {
            Err(Error::WrongDomain {
                expected,
                found: self.domain,
            })
        }
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Forward transform; the field must be in the space domain.
    pub fn fft(&self) -> Result<Field> {
        self.expect_domain(Domain::Space)?;
        let mut out = self.clone();
        transform(&mut out.values, &self.grid, Direction::Forward);
        out.domain = Domain::Frequency;
        Ok(out)
    }

    /// Inverse transform; the field must be in the frequency domain.
    pub fn ifft(&self) -> Result<Field> {
        self.expect_domain(Domain::Frequency)?;
        let mut out = self.clone();
        transform(&mut out.values, &self.grid, Direction::Inverse);
        out.domain = Domain::Space;
        Ok(out)
    }

    /// Move to the frequency domain, transforming only if needed.
    pub fn into_frequency(mut self) -> Field {
        if self.domain == Domain::Space {
            transform(&mut self.values, &self.grid, Direction::Forward);
            self.domain = Domain::Frequency;
        }
        self
    }

    /// Move to the space domain, transforming only if needed.
    pub fn into_space(mut self) -> Field {
        if self.domain == Domain::Frequency {
            transform(&mut self.values, &self.grid, Direction::Inverse);
            self.domain = Domain::Space;
        }
        self
    }

    pub fn to_domain(&self, domain: Domain) -> Field {
        match domain {
            Domain::Space => self.clone().into_space(),
            Domain::Frequency => self.clone().into_frequency(),
        }
    }

    /// Plain `l^2` norm of the stored values (no lattice weights).
    pub fn l2(&self) -> f64 {
        par::ordered_sum(self.values.len(), |i| self.values[i].norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        par::ordered_max(self.values.len(), |i| self.values[i].norm())
    }

    pub fn max_imag(&self) -> f64 {
        par::ordered_max(self.values.len(), |i| self.values[i].im.abs())
    }

    pub fn scale(&mut self, s: f64) {
        par::for_each_indexed(&mut self.values, |_, v| *v *= s);
    }

    /// `self + a * other`, both in the same domain on the same grid.
    pub fn axpy(&mut self, a: Complex64, other: &Field) -> Result<()> {
        self.check_same_grid(other)?;
        other.expect_domain(self.domain)?;
        let src = &other.values;
        par::for_each_indexed(&mut self.values, |i, v| *v += a * src[i]);
        Ok(())
    }

    /// `l^2` distance to `other` after moving both to this field's domain.
    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        let o = other.to_domain(self.domain);
        Ok(par::ordered_sum(self.values.len(), |i| {
            (self.values[i] - o.values[i]).norm_sqr()
        })
        .sqrt())
    }

    /// Complex Fourier coefficient of `e^{i xi . x}` by direct summation,
    /// with the same unitary normalization as [`Field::fft`].
    pub fn mode_coefficient(&self, k: &[i64]) -> Result<Complex64> {
        self.expect_domain(Domain::Space)?;
        let flat = self.grid.mode_index(k)?;
        let xi = self.grid.xi(flat);
        let norm = 1.0 / (self.grid.len() as f64).sqrt();
        let grid = self.grid;
        let s = par::ordered_sum_complex(self.values.len(), |i| {
            let x = grid.x(i);
            self.values[i] * Complex64::from_polar(1.0, -(xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]))
        });
        Ok(s * norm)
    }
}

/// `d` scalar components sharing one grid and one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: Vec<Field>,
}

impl VectorField {
    pub fn new(comps: Vec<Field>) -> Result<Self> {
        let first = comps
            .first()
            .ok_or_else(|| Error::param("comps", "vector field needs components"))?;
        if comps.len() != first.grid.d {
            return Err(Error::param(
                "comps",
                format!("expected {} components, got {}", first.grid.d, comps.len()),
            ));
        }
        for c in &comps[1..] {
            first.check_same_grid(c)?;
            c.expect_domain(first.domain)?;
        }
        Ok(Self { comps })
    }

    pub fn zeros(grid: Grid, domain: Domain) -> Self {
        Self {
            comps: (0..grid.d).map(|_| Field::zeros(grid, domain)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.comps[0].grid
    }

    pub fn domain(&self) -> Domain {
        self.comps[0].domain
    }

    pub fn components(&self) -> &[Field] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Field] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Field> {
        self.comps
    }

    pub fn into_frequency(self) -> VectorField {
        Self {
            comps: self.comps.into_iter().map(Field::into_frequency).collect(),
        }
    }

    pub fn into_space(self) -> VectorField {
        Self {
            comps: self.comps.into_iter().map(Field::into_space).collect(),
        }
    }

    pub fn fft(&self) -> Result<VectorField> {
        Ok(Self {
            comps: self.comps.iter().map(Field::fft).collect::<Result<_>>()?,
        })
    }

    pub fn ifft(&self) -> Result<VectorField> {
        Ok(Self {
            comps: self.comps.iter().map(Field::ifft).collect::<Result<_>>()?,
        })
    }

    /// `l^2` norm of the stacked components.
    pub fn l2(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c.l2().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_distance(&self, other: &VectorField) -> Result<f64> {
        if self.comps.len() != other.comps.len() {
            return Err(Error::GridMismatch);
        }
        let mut s = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            s += a.l2_distance(b)?.powi(2);
        }
        Ok(s.sqrt())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>);

thread_local! {
    static PLANS: RefCell<PlanCache> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let fwd = dir == Direction::Forward;
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((n, fwd))
            .or_insert_with(|| {
                if fwd {
                    planner.plan_fft_forward(n)
                } else {
                    planner.plan_fft_inverse(n)
                }
            })
            .clone()
    })
}

/// Rows per parallel task for contiguous line transforms.
const ROWS_PER_TASK: usize = 16;

fn fft_rows(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    par::for_each_chunk_mut(data, n * ROWS_PER_TASK, |_, chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

/// In-place unitary d-dimensional transform.
fn transform(data: &mut [Complex64], grid: &Grid, dir: Direction) {
    let n = grid.n;
    let d = grid.d;
    let fft = plan(n, dir);
    // Last axis is contiguous.
    fft_rows(data, n, &fft);
    if d > 1 {
        let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
        for axis in 0..d - 1 {
            let inner = n.pow((d - 1 - axis) as u32);
            // (outer, n, inner) -> (outer, inner, n)
            {
                let src: &[Complex64] = data;
                par::for_each_chunk_mut(&mut scratch, n, |row, line| {
                    let o = row / inner;
                    let j = row % inner;
                    let base = o * n * inner + j;
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = src[base + i * inner];
                    }
                });
            }
            fft_rows(&mut scratch, n, &fft);
            {
                let src: &[Complex64] = &scratch;
                par::for_each_chunk_mut(data, inner, |row, line| {
                    let o = row / n;
                    let i = row % n;
                    let base = o * inner * n + i;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = src[base + j * n];
                    }
                });
            }
        }
    }
    let norm = 1.0 / (data.len() as f64).sqrt();
    par::for_each_indexed(data, |_, v| *v *= norm);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Field::from_values(grid, values, Domain::Space).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(2, 12, 1.0).is_err());
        assert!(Grid::new(2, 8, 0.0).is_err());
    }

    #[test]
    fn frequency_lattice_layout() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(g.is_nyquist(4));
        assert!((g.spacing() * 8.0 - g.box_length()).abs() < 1e-15);
        let g3 = Grid::new(3, 4, 1.0).unwrap();
        let flat = g3.mode_index(&[1, -2, -1]).unwrap();
        assert_eq!(g3.unravel(flat), [1, 2, 3]);
        assert_eq!(g3.ravel([1, 2, 3]), flat);
    }

    #[test]
    fn round_trip_and_parseval() {
        for (d, n) in [(1, 64), (2, 32), (3, 16)] {
            let g = Grid::new(d, n, 3.0).unwrap();
            let f = random_field(g, 7 + d as u64);
            let fh = f.fft().unwrap();
            assert!((fh.l2() - f.l2()).abs() <= 1e-13 * f.l2());
            let back = fh.ifft().unwrap();
            let err = par::ordered_max(g.len(), |i| (back.values[i] - f.values[i]).norm());
            assert!(err <= 1e-13 * f.max_abs(), "d={d}: {err}");
        }
    }

    #[test]
    fn delta_transforms_to_constant() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let mut f = Field::zeros(g, Domain::Space);
        f.values_mut()[0] = Complex64::new(1.0, 0.0);
        let fh = f.fft().unwrap();
        let c = 1.0 / 16.0;
        assert!(fh.values().iter().all(|v| (v - c).norm() < 1e-15));
    }

    #[test]
    fn plane_wave_lands_on_its_mode() {
        let g = Grid::new(3, 8, 5.0).unwrap();
        let k = [1, -3, 2];
        let f = Field::plane_wave(g, &k).unwrap();
        let fh = f.fft().unwrap();
        let flat = g.mode_index(&k).unwrap();
        let expect = (g.len() as f64).sqrt();
        for (i, v) in fh.values().iter().enumerate() {
            let target = if i == flat { expect } else { 0.0 };
            assert!((v - target).norm() < 1e-10, "mode {i}: {v}");
        }
        let direct = f.mode_coefficient(&k).unwrap();
        assert!((direct - fh.values()[flat]).norm() < 1e-10);
    }

    #[test]
    fn domain_tags_are_enforced() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = Field::zeros(g, Domain::Frequency);
        assert!(matches!(f.fft(), Err(Error::WrongDomain { .. })));
        assert!(f.ifft().is_ok());
    }

    #[test]
    fn vector_field_checks_grids() {
        let g1 = Grid::new(2, 8, 1.0).unwrap();
        let g2 = Grid::new(2, 8, 2.0).unwrap();
        let r = VectorField::new(vec![
            Field::zeros(g1, Domain::Space),
            Field::zeros(g2, Domain::Space),
        ]);
        assert!(matches!(r, Err(Error::GridMismatch)));
        assert!(VectorField::new(vec![Field::zeros(g1, Domain::Space)]).is_err());
    }
}
