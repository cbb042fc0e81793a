//! Spectral simulation of the nonlinear Schrödinger equation with noisy
//! tunneling potentials,
//!
//! ```text
//! i ψ_t + β ψ_xx + ζ |ψ|² ψ + M(x, t) ψ = 0,
//! ```
//!
//! together with the analytic solutions (sech soliton, plane wave, Peregrine
//! and second-order rational solitons) used as initial conditions and oracles,
//! and the peak statistics used to classify rogue wavefunctions.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: periodic grid, wavenumber lattice and FFT contract.
//! * [`field`]: wavefield container and analytic solution families.
//! * [`potential`]: barrier potentials with reproducible white noise.
//! * [`solver`]: split-step Fourier time stepping.
//! * [`analysis`]: peak detection, significant amplitude, rogue
//!   classification and profile matching.
//! * [`io`]: binary snapshot format and CSV exports.
//! * [`scenario`]: strict JSON scenario configs, named presets and seeded
//!   ensembles.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod potential;
pub mod scenario;
pub mod solver;

pub use num_complex::Complex64 as C64;

pub use analysis::{
    amplitude_histogram, classify_rogues, find_peaks, match_rational_profile,
    significant_amplitude, Histogram, PeakRecord, ProfileMatch, RogueReport,
};
pub use error::{Error, Result};
pub use field::{
    pde_residual, scale_solution, Peregrine, PlaneWave, RationalOrder2, Scaled, SechSoliton,
    Solution, Tilted, WaveField,
};
pub use grid::{Grid, Spectral};
pub use potential::{PotentialKind, PotentialSpec, Profile, SampledPotential, Segment};
pub use scenario::{EnsembleSummary, ScenarioConfig};
pub use solver::{run, Propagator, SimulationConfig, Splitting, Trajectory};
