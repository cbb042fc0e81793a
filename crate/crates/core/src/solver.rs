//! Split-step Fourier time stepping.
//!
//! One step of the first-order scheme is
//!
//! ```text
//! ψ(t + Δt) = F⁻¹[ exp(−i β k² Δt) F[ exp(i(ζ|ψ|² + M)Δt) ψ(t) ] ],
//! ```
//!
//! i.e. the exact pointwise nonlinear/potential phase followed by the exact
//! spectral dispersion phase ([`Splitting::LieVerbatim`]). The symmetric
//! variant ([`Splitting::Strang`]) wraps the nonlinear step in two half
//! dispersion steps. Both sub-steps are unitary for real `M`, so the discrete
//! norm is conserved up to rounding.
//!
//! The potential noise is redrawn once per full step, before the step,
//! using step indices `1, 2, …`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{same_grid, WaveField};
use crate::grid::{Grid, Spectral};
use crate::potential::{PotentialSpec, SampledPotential};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// Nonlinear/potential step, then dispersion. First order.
    #[default]
    LieVerbatim,
    /// Half dispersion, nonlinear/potential, half dispersion. Second order.
    Strang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub beta: f64,
    pub zeta: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: u64,
    pub splitting: Splitting,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            beta: 0.5,
            zeta: 1.0,
            dt: 1e-3,
            t_end: 5.0,
            snapshot_every: 20,
            splitting: Splitting::LieVerbatim,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!(
                "solver.dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "solver.t_end must be >= dt, got {}",
                self.t_end
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("solver.snapshot_every must be >= 1".into()));
        }
        if !self.beta.is_finite() {
            return Err(Error::Config("solver.beta must be finite".into()));
        }
        if !self.zeta.is_finite() {
            return Err(Error::Config("solver.zeta must be finite".into()));
        }
        Ok(())
    }

    /// Number of steps, `round(t_end / dt)`.
    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

/// `ψ_j ← exp(i(ζ|ψ_j|² + M_j)Δt) ψ_j`.
pub fn nonlinear_potential_step(
    field: &mut WaveField,
    pot: &SampledPotential,
    zeta: f64,
    dt: f64,
) -> Result<()> {
    same_grid(field.grid(), pot.grid())?;
    apply_nonlinear_phase(field.values_mut(), pot.current_values(), zeta, dt);
    Ok(())
}

#[inline]
fn apply_nonlinear_phase(values: &mut [C64], m: &[f64], zeta: f64, dt: f64) {
    for (v, &mj) in values.iter_mut().zip(m) {
        let phase = (zeta * v.norm_sqr() + mj) * dt;
        let (s, c) = phase.sin_cos();
        *v *= C64::new(c, s);
    }
}

/// Multiply the spectrum by `exp(−i β k² Δt)`. Allocates its own plan; use
/// [`Propagator`] inside loops.
pub fn linear_step(field: &mut WaveField, beta: f64, dt: f64) -> Result<()> {
    let grid = field.grid().clone();
    let spectral = grid.spectral();
    let multiplier = dispersion_multiplier(&grid, beta, dt);
    let mut scratch = vec![C64::new(0.0, 0.0); spectral.scratch_len()];
    apply_dispersion(&spectral, field.values_mut(), &multiplier, &mut scratch);
    Ok(())
}

fn dispersion_multiplier(grid: &Grid, beta: f64, dt: f64) -> Vec<C64> {
    grid.k()
        .iter()
        .map(|&k| C64::from_polar(1.0, -beta * k * k * dt))
        .collect()
}

fn apply_dispersion(
    spectral: &Spectral,
    values: &mut [C64],
    multiplier: &[C64],
    scratch: &mut [C64],
) {
    spectral.forward_in_place(values, scratch);
    for (v, m) in values.iter_mut().zip(multiplier) {
        *v *= m;
    }
    spectral.inverse_in_place(values, scratch);
}

/// Reusable stepping state for one grid and solver configuration: FFT plans,
/// precomputed dispersion multipliers and scratch space.
#[derive(Debug)]
pub struct Propagator {
    grid: Arc<Grid>,
    spectral: Spectral,
    zeta: f64,
    dt: f64,
    splitting: Splitting,
    full: Vec<C64>,
    half: Vec<C64>,
    scratch: Vec<C64>,
}

impl Propagator {
    pub fn new(grid: Arc<Grid>, config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let spectral = grid.spectral();
        let scratch = vec![C64::new(0.0, 0.0); spectral.scratch_len()];
        Ok(Propagator {
            full: dispersion_multiplier(&grid, config.beta, config.dt),
            half: dispersion_multiplier(&grid, config.beta, 0.5 * config.dt),
            spectral,
            scratch,
            zeta: config.zeta,
            dt: config.dt,
            splitting: config.splitting,
            grid,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Advance `field` by one step of size `dt`. Redraws the potential noise
    /// for `step_index` first.
    pub fn step(
        &mut self,
        field: &mut WaveField,
        pot: &mut SampledPotential,
        step_index: u64,
    ) -> Result<()> {
        same_grid(field.grid(), &self.grid)?;
        same_grid(pot.grid(), &self.grid)?;
        pot.refresh_noise(step_index);
        let m = pot.current_values();
        let values = field.values_mut();
        match self.splitting {
            Splitting::LieVerbatim => {
                apply_nonlinear_phase(values, m, self.zeta, self.dt);
                apply_dispersion(&self.spectral, values, &self.full, &mut self.scratch);
            }
            Splitting::Strang => {
                apply_dispersion(&self.spectral, values, &self.half, &mut self.scratch);
                apply_nonlinear_phase(values, m, self.zeta, self.dt);
                apply_dispersion(&self.spectral, values, &self.half, &mut self.scratch);
            }
        }
        let t = field.time() + self.dt;
        field.set_time(t);
        Ok(())
    }
}

/// Recorded snapshots of one simulation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimulationConfig,
    pub potential: PotentialSpec,
    pub snapshots: Vec<WaveField>,
    /// `Σ|ψ|² dx` of each snapshot.
    pub norms: Vec<f64>,
}

impl Trajectory {
    pub fn grid(&self) -> &Arc<Grid> {
        self.snapshots[0].grid()
    }

    pub fn last(&self) -> &WaveField {
        self.snapshots
            .last()
            .expect("trajectory has at least the initial snapshot")
    }

    /// Largest `|ψ|` over all snapshots.
    pub fn max_amplitude(&self) -> f64 {
        self.snapshots
            .iter()
            .map(WaveField::max_modulus)
            .fold(0.0, f64::max)
    }

    /// Index of the snapshot holding the largest `|ψ|`; the earliest wins ties.
    pub fn max_amplitude_snapshot(&self) -> usize {
        max_amplitude_index(&self.snapshots)
    }
}

pub fn max_amplitude_index(snapshots: &[WaveField]) -> usize {
    let mut best = (0, f64::MIN);
    for (i, s) in snapshots.iter().enumerate() {
        let m = s.max_modulus();
        if m > best.1 {
            best = (i, m);
        }
    }
    best.0
}

/// Integrate from `initial` to `initial.time() + t_end`, storing the initial
/// field and every `snapshot_every`-th step.
pub fn run(
    initial: &WaveField,
    spec: &PotentialSpec,
    config: &SimulationConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let grid = initial.grid().clone();
    let mut pot = spec.sample(grid.clone(), config.seed)?;
    let mut propagator = Propagator::new(grid, config)?;
    let n_steps = config.n_steps();
    let t0 = initial.time();

    let mut field = initial.clone();
    let capacity = (n_steps / config.snapshot_every + 1) as usize;
    let mut snapshots = Vec::with_capacity(capacity);
    let mut norms = Vec::with_capacity(capacity);
    norms.push(field.norm());
    snapshots.push(field.clone());

    for step in 1..=n_steps {
        propagator.step(&mut field, &mut pot, step)?;
        if step % config.snapshot_every == 0 {
            // Accumulated time drifts; store the exact grid time instead.
            field.set_time(t0 + step as f64 * config.dt);
            if !field.is_finite() {
                return Err(Error::BlowUp { step });
            }
            norms.push(field.norm());
            snapshots.push(field.clone());
        }
    }

    Ok(Trajectory {
        config: config.clone(),
        potential: spec.clone(),
        snapshots,
        norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{plane_wave, sech_soliton, SechSoliton, Solution};
    use crate::potential::build_single_rectangular;

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::default_domain())
    }

    #[test]
    fn nonlinear_step_cases() {
        let g = grid();
        let pot = PotentialSpec::free().sample(g.clone(), 0).unwrap();

        let mut z = WaveField::zeros(g.clone(), 0.0);
        nonlinear_potential_step(&mut z, &pot, 1.0, 0.1).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));

        let mut ones = plane_wave(&g, 0.0).unwrap();
        nonlinear_potential_step(&mut ones, &pot, 1.0, 0.1).unwrap();
        let expected = C64::from_polar(1.0, 0.1);
        assert!(ones.values().iter().all(|v| (v - expected).norm() < 1e-15));
    }

    #[test]
    fn nonlinear_step_preserves_modulus() {
        let g = grid();
        let pot = build_single_rectangular(g.clone(), 1.0, 3).unwrap();
        let mut f = sech_soliton(&g, 0.0, 0.7).unwrap();
        let before = f.modulus();
        nonlinear_potential_step(&mut f, &pot, 1.0, 1e-3).unwrap();
        for (a, b) in f.modulus().iter().zip(&before) {
            assert!((a - b).abs() <= 2.0 * f64::EPSILON * b.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn nonlinear_step_grid_mismatch() {
        let pot = PotentialSpec::free().sample(grid(), 0).unwrap();
        let other = Arc::new(Grid::new(64, 0.0, 1.0).unwrap());
        let mut f = WaveField::zeros(other, 0.0);
        assert!(matches!(
            nonlinear_potential_step(&mut f, &pot, 1.0, 1e-3),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn linear_step_cases() {
        let g = grid();
        let mut c = plane_wave(&g, 0.0).unwrap();
        linear_step(&mut c, 0.5, 1e-3).unwrap();
        assert!(c
            .values()
            .iter()
            .all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-14));

        let km = 7.0 * g.dk();
        let mut mode = plane_wave(&g, km).unwrap();
        let orig = mode.clone();
        linear_step(&mut mode, 0.5, 1e-3).unwrap();
        let factor = C64::from_polar(1.0, -km * km * 5e-4);
        for (a, b) in mode.values().iter().zip(orig.values()) {
            assert!((a - b * factor).norm() < 1e-13);
        }
    }

    #[test]
    fn linear_step_conserves_norm() {
        let g = grid();
        let mut f = sech_soliton(&g, 0.0, 0.5).unwrap();
        let n0 = f.norm();
        linear_step(&mut f, 0.5, 1e-3).unwrap();
        assert!((f.norm() - n0).abs() <= 1e-13 * n0);
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = grid();
        let mut pot = build_single_rectangular(g.clone(), 1.0, 5).unwrap();
        let mut prop = Propagator::new(g.clone(), &SimulationConfig::default()).unwrap();
        let mut f = WaveField::zeros(g, 0.0);
        for s in 1..=10 {
            prop.step(&mut f, &mut pot, s).unwrap();
        }
        assert!(f.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn single_step_trajectory() {
        let g = grid();
        let cfg = SimulationConfig {
            t_end: 1e-3,
            snapshot_every: 1,
            ..Default::default()
        };
        let traj = run(
            &sech_soliton(&g, 0.0, 0.5).unwrap(),
            &PotentialSpec::free(),
            &cfg,
        )
        .unwrap();
        assert_eq!(traj.snapshots.len(), 2);
        assert_eq!(traj.snapshots[1].time(), 1e-3);
        assert_eq!(traj.norms.len(), 2);
    }

    #[test]
    fn snapshot_spacing() {
        let g = Arc::new(Grid::new(256, -20.0, 40.0).unwrap());
        let cfg = SimulationConfig {
            t_end: 0.2,
            snapshot_every: 25,
            ..Default::default()
        };
        let traj = run(
            &sech_soliton(&g, 0.0, 0.5).unwrap(),
            &PotentialSpec::free(),
            &cfg,
        )
        .unwrap();
        assert_eq!(traj.snapshots.len(), 9);
        for w in traj.snapshots.windows(2) {
            assert!((w[1].time() - w[0].time() - 0.025).abs() < 1e-12);
        }
        assert!(traj.norms.iter().all(|&n| n > 0.0));
    }

    #[test]
    fn blow_up_reports_step() {
        let g = Arc::new(Grid::new(64, -5.0, 10.0).unwrap());
        let cfg = SimulationConfig {
            t_end: 0.01,
            snapshot_every: 2,
            ..Default::default()
        };
        let huge = WaveField::from_fn(g, 0.0, |_| C64::new(1e160, 0.0)).unwrap();
        match run(&huge, &PotentialSpec::free(), &cfg) {
            Err(Error::BlowUp { step }) => assert_eq!(step, 2),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn invalid_config() {
        let bad = [
            SimulationConfig {
                dt: 0.0,
                ..Default::default()
            },
            SimulationConfig {
                t_end: 1e-4,
                ..Default::default()
            },
            SimulationConfig {
                snapshot_every: 0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn soliton_peak_travels_left() {
        let g = grid();
        let cfg = SimulationConfig {
            t_end: 2.0,
            snapshot_every: 500,
            splitting: Splitting::Strang,
            ..Default::default()
        };
        let sol = SechSoliton::new(0.5).unwrap();
        let traj = run(&sol.sample(&g, 0.0).unwrap(), &PotentialSpec::free(), &cfg).unwrap();
        for snap in &traj.snapshots {
            let modulus = snap.modulus();
            let j = (0..modulus.len())
                .max_by(|&a, &b| modulus[a].total_cmp(&modulus[b]))
                .unwrap();
            let expected = -2.0 * snap.time();
            assert!((g.x()[j] - expected).abs() <= g.dx() * (1.0 + snap.time()));
        }
    }
}
