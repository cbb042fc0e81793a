//! Barrier potentials `M(x, t) = V(x) − E(x) + α r(x, t)`.
//!
//! Base profiles are piecewise constant or linear on half-open segments
//! `[left, right)`, which is the Heaviside convention `H(0) = 1`. The
//! builders reproduce the formulas literally, e.g. the single barrier
//! `4[H(x − 2) − H(x + 2)]` is `−4` on `[−2, 2)`. Since the NLSE here carries
//! `+Mψ`, a negative `M` is repulsive. `negate_base` flips the deterministic
//! part for users who want the opposite sign.
//!
//! Noise `r` is i.i.d. uniform on `[−1, 1]`, regenerated for every solver step
//! from a ChaCha stream keyed by `(seed, step_index)`, so any step's
//! realization can be replayed without running the preceding ones.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    SingleRectangular,
    DoubleRectangular,
    Triangular,
    CustomPiecewise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant(f64),
    /// `c0 + c1 x`
    Linear {
        c0: f64,
        c1: f64,
    },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Constant(c) => c,
            Profile::Linear { c0, c1 } => c0 + c1 * x,
        }
    }
}

/// Profile active on `left ≤ x < right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub left: f64,
    pub right: f64,
    pub profile: Profile,
}

impl Segment {
    pub fn new(left: f64, right: f64, profile: Profile) -> Self {
        Segment {
            left,
            right,
            profile,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.left && x < self.right
    }
}

/// Declarative potential description; immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub segments: Vec<Segment>,
    pub alpha: f64,
    pub negate_base: bool,
}

impl PotentialSpec {
    /// `4[H(x − 2) − H(x + 2)]`
    pub fn single_rectangular(alpha: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::SingleRectangular,
            segments: vec![Segment::new(-2.0, 2.0, Profile::Constant(-4.0))],
            alpha,
            negate_base: false,
        }
    }

    /// `3[H(x − 8) − H(x − 6)] + 4[H(x + 8) − H(x + 6)]`
    pub fn double_rectangular(alpha: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::DoubleRectangular,
            segments: vec![
                Segment::new(-8.0, -6.0, Profile::Constant(4.0)),
                Segment::new(6.0, 8.0, Profile::Constant(-3.0)),
            ],
            alpha,
            negate_base: false,
        }
    }

    /// `(x/2 + 2.5)[H(x − 5) − H(x + 5)]`
    pub fn triangular(alpha: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::Triangular,
            segments: vec![Segment::new(
                -5.0,
                5.0,
                Profile::Linear { c0: -2.5, c1: -0.5 },
            )],
            alpha,
            negate_base: false,
        }
    }

    pub fn custom(segments: Vec<Segment>, alpha: f64) -> Result<Self> {
        let spec = PotentialSpec {
            kind: PotentialKind::CustomPiecewise,
            segments,
            alpha,
            negate_base: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// No potential at all.
    pub fn free() -> Self {
        PotentialSpec {
            kind: PotentialKind::CustomPiecewise,
            segments: Vec::new(),
            alpha: 0.0,
            negate_base: false,
        }
    }

    /// `M(x) = slope · x` across the whole grid.
    pub fn linear_ramp(grid: &Grid, slope: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::CustomPiecewise,
            segments: vec![Segment::new(
                grid.x_min(),
                grid.x_max(),
                Profile::Linear { c0: 0.0, c1: slope },
            )],
            alpha: 0.0,
            negate_base: false,
        }
    }

    pub fn with_negated_base(mut self, negate: bool) -> Self {
        self.negate_base = negate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!(
                "potential.alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        for s in &self.segments {
            if !(s.left < s.right) {
                return Err(Error::Config(format!(
                    "potential segment needs left < right, got [{}, {})",
                    s.left, s.right
                )));
            }
        }
        let mut sorted: Vec<&Segment> = self.segments.iter().collect();
        sorted.sort_by(|a, b| a.left.total_cmp(&b.left));
        for w in sorted.windows(2) {
            if w[1].left < w[0].right {
                return Err(Error::Config(format!(
                    "potential segments [{}, {}) and [{}, {}) overlap",
                    w[0].left, w[0].right, w[1].left, w[1].right
                )));
            }
        }
        Ok(())
    }

    /// Deterministic part of `M` at `x`.
    pub fn base_at(&self, x: f64) -> f64 {
        let v = self
            .segments
            .iter()
            .find(|s| s.contains(x))
            .map_or(0.0, |s| s.profile.eval(x));
        if self.negate_base {
            -v
        } else {
            v
        }
    }

    /// Sample on `grid`; the current values hold the step-0 noise realization.
    pub fn sample(&self, grid: Arc<Grid>, seed: u64) -> Result<SampledPotential> {
        self.validate()?;
        let base: Vec<f64> = grid.x().iter().map(|&x| self.base_at(x)).collect();
        let mut pot = SampledPotential {
            current: base.clone(),
            base,
            grid,
            alpha: self.alpha,
            seed,
            step_index: 0,
        };
        pot.refresh_noise(0);
        Ok(pot)
    }
}

pub fn build_single_rectangular(
    grid: Arc<Grid>,
    alpha: f64,
    seed: u64,
) -> Result<SampledPotential> {
    PotentialSpec::single_rectangular(alpha).sample(grid, seed)
}

pub fn build_double_rectangular(
    grid: Arc<Grid>,
    alpha: f64,
    seed: u64,
) -> Result<SampledPotential> {
    PotentialSpec::double_rectangular(alpha).sample(grid, seed)
}

pub fn build_triangular(grid: Arc<Grid>, alpha: f64, seed: u64) -> Result<SampledPotential> {
    PotentialSpec::triangular(alpha).sample(grid, seed)
}

/// One simulation's potential buffers: deterministic base plus the noise
/// realization of the current step.
#[derive(Debug, Clone)]
pub struct SampledPotential {
    grid: Arc<Grid>,
    base: Vec<f64>,
    current: Vec<f64>,
    alpha: f64,
    seed: u64,
    step_index: u64,
}

impl SampledPotential {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn base_values(&self) -> &[f64] {
        &self.base
    }

    pub fn current_values(&self) -> &[f64] {
        &self.current
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    /// Replace the noise with the realization for `step_index`.
    pub fn refresh_noise(&mut self, step_index: u64) {
        self.step_index = step_index;
        if self.alpha == 0.0 {
            self.current.copy_from_slice(&self.base);
            return;
        }
        let mut rng = noise_stream(self.seed, step_index);
        let alpha = self.alpha;
        for (c, &b) in self.current.iter_mut().zip(&self.base) {
            *c = b + alpha * rng.random_range(-1.0..=1.0);
        }
    }
}

fn noise_stream(seed: u64, step_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step_index);
    rng
}

/// The raw uniform `[−1, 1]` draw for `(seed, step_index)` on `n` points.
pub fn noise_realization(seed: u64, step_index: u64, n: usize) -> Vec<f64> {
    let mut rng = noise_stream(seed, step_index);
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}
