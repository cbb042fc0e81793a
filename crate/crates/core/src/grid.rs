//! Uniform periodic grid and the discrete Fourier transform contract.
//!
//! Transforms use the unnormalized forward DFT and a `1/n` inverse, so that
//! for samples `f_j` and spectrum `F_m`
//!
//! ```text
//! Σ |f_j|² dx = (1 / length) Σ |F_m|² dx².
//! ```
//!
//! A plane wave `exp(i k_m x)` with `k_m` on the lattice transforms to a
//! single nonzero bin `m` (times the phase `exp(i k_m x_min)`).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub const DEFAULT_POINTS: usize = 4096;
pub const DEFAULT_X_MIN: f64 = -50.0;
pub const DEFAULT_LENGTH: f64 = 100.0;

/// Periodic 1-D grid covering `[x_min, x_min + length)`.
#[derive(Clone, PartialEq)]
pub struct Grid {
    n_points: usize,
    x_min: f64,
    length: f64,
    dx: f64,
    x: Vec<f64>,
    k: Vec<f64>,
}

impl Grid {
    pub fn new(n_points: usize, x_min: f64, length: f64) -> Result<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid n_points must be a power of two >= 2, got {n_points}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Config(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        if !x_min.is_finite() {
            return Err(Error::Config(format!(
                "grid x_min must be finite, got {x_min}"
            )));
        }
        let dx = length / n_points as f64;
        let x = (0..n_points).map(|j| x_min + j as f64 * dx).collect();
        let k = (0..n_points)
            .map(|j| 2.0 * PI * fft_index(j, n_points) as f64 / length)
            .collect();
        Ok(Grid {
            n_points,
            x_min,
            length,
            dx,
            x,
            k,
        })
    }

    /// `[-50, 50)` sampled with 4096 points.
    pub fn default_domain() -> Self {
        Grid::new(DEFAULT_POINTS, DEFAULT_X_MIN, DEFAULT_LENGTH)
            .expect("default grid parameters are valid")
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    /// Exclusive upper end of the domain.
    pub fn x_max(&self) -> f64 {
        self.x_min + self.length
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Angular wavenumbers in FFT ordering.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Lattice spacing of the wavenumbers, `2π / length`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Nearest lattice wavenumber to `k`.
    pub fn snap_wavenumber(&self, k: f64) -> f64 {
        (k / self.dk()).round() * self.dk()
    }

    /// Grid index nearest to `x`, wrapped periodically.
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx).round() as i64;
        j.rem_euclid(self.n_points as i64) as usize
    }

    pub fn spectral(&self) -> Spectral {
        Spectral::new(self.n_points)
    }

    pub fn params(&self) -> GridParams {
        GridParams {
            n_points: self.n_points,
            x_min: self.x_min,
            length: self.length,
        }
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.n_points)
            .field("x_min", &self.x_min)
            .field("length", &self.length)
            .finish()
    }
}

/// Serializable grid description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridParams {
    pub n_points: usize,
    pub x_min: f64,
    pub length: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            n_points: DEFAULT_POINTS,
            x_min: DEFAULT_X_MIN,
            length: DEFAULT_LENGTH,
        }
    }
}

impl GridParams {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.n_points, self.x_min, self.length)
    }
}

/// Signed mode number of FFT bin `j`: `0, 1, …, n/2 − 1, −n/2, …, −1`.
fn fft_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Planned forward/inverse FFTs of one size.
///
/// Plans are shared and immutable; every call supplies or allocates its own
/// scratch, so a `Spectral` can be used from several threads at once.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Scratch length required by the in-place transforms.
    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::dimension(self.n, len));
        }
        Ok(())
    }

    pub fn forward(&self, field: &[C64]) -> Result<Vec<C64>> {
        self.check(field.len())?;
        let mut out = field.to_vec();
        self.forward.process(&mut out);
        Ok(out)
    }

    pub fn inverse(&self, spectrum: &[C64]) -> Result<Vec<C64>> {
        self.check(spectrum.len())?;
        let mut out = spectrum.to_vec();
        self.inverse.process(&mut out);
        let scale = 1.0 / self.n as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(out)
    }

    /// In-place forward transform. `buf.len()` must equal the plan size.
    pub fn forward_in_place(&self, buf: &mut [C64], scratch: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.forward.process_with_scratch(buf, scratch);
    }

    /// In-place inverse transform, including the `1/n` normalization.
    pub fn inverse_in_place(&self, buf: &mut [C64], scratch: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inverse.process_with_scratch(buf, scratch);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    /// Spectral second derivative `F⁻¹[−k² F[f]]`.
    pub fn second_derivative(&self, grid: &Grid, values: &[C64]) -> Result<Vec<C64>> {
        self.check(grid.n_points())?;
        let mut spec = self.forward(values)?;
        for (s, &k) in spec.iter_mut().zip(grid.k()) {
            *s *= -k * k;
        }
        self.inverse(&spec)
    }

    /// Periodic translation `f(x − shift)` evaluated by a spectral phase ramp.
    pub fn shift(&self, grid: &Grid, values: &[C64], shift: f64) -> Result<Vec<C64>> {
        self.check(grid.n_points())?;
        let mut spec = self.forward(values)?;
        for (s, &k) in spec.iter_mut().zip(grid.k()) {
            *s *= C64::from_polar(1.0, -k * shift);
        }
        self.inverse(&spec)
    }
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}
