//! Scenario configuration, named presets and seeded ensembles.
//!
//! Configs are strict JSON: unknown keys are rejected. Only
//! `initial_condition` and `potential.kind` are required; everything else
//! falls back to the defaults (4096 points on `[−50, 50)`, `dt = 1e-3`,
//! `β = ½`, `ζ = 1`, `α = 1`).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    amplitude_histogram, classify_rogues, Histogram, RogueReport, DEFAULT_THRESHOLD_FACTOR,
    THRESHOLD_RANGE,
};
use crate::error::{Error, Result};
use crate::field::{
    scale_solution, Peregrine, PlaneWave, RationalOrder2, SechSoliton, Solution, WaveField,
};
use crate::grid::{Grid, GridParams};
use crate::io::read_snapshots;
use crate::potential::{PotentialKind, PotentialSpec, Segment};
use crate::solver::{max_amplitude_index, run, SimulationConfig, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    SechSoliton {
        #[serde(default = "default_soliton_amplitude")]
        amplitude_a: f64,
    },
    PlaneWave {
        #[serde(default = "default_plane_wavenumber")]
        k: f64,
    },
    Peregrine {
        #[serde(default)]
        t0: f64,
        /// `B` in `B ψ(Bx, B²t)`.
        #[serde(default = "default_scale")]
        scale: f64,
    },
    RationalOrder2 {
        #[serde(default)]
        t0: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// A snapshot from an existing trajectory file (the last one by default).
    FromFile {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snapshot: Option<usize>,
    },
}

fn default_soliton_amplitude() -> f64 {
    0.5
}

fn default_plane_wavenumber() -> f64 {
    1.0
}

fn default_scale() -> f64 {
    1.0
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub negate_base: bool,
    /// Only for `custom_piecewise`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<Segment>,
}

impl PotentialConfig {
    pub fn new(kind: PotentialKind, alpha: f64) -> Self {
        PotentialConfig {
            kind,
            alpha,
            negate_base: false,
            segments: Vec::new(),
        }
    }

    pub fn to_spec(&self) -> Result<PotentialSpec> {
        let builtin = match self.kind {
            PotentialKind::SingleRectangular => Some(PotentialSpec::single_rectangular(self.alpha)),
            PotentialKind::DoubleRectangular => Some(PotentialSpec::double_rectangular(self.alpha)),
            PotentialKind::Triangular => Some(PotentialSpec::triangular(self.alpha)),
            PotentialKind::CustomPiecewise => None,
        };
        let spec = match builtin {
            Some(spec) => {
                if !self.segments.is_empty() {
                    return Err(Error::Config(
                        "potential.segments is only allowed with kind custom_piecewise".into(),
                    ));
                }
                spec.validate()?;
                spec
            }
            None => PotentialSpec::custom(self.segments.clone(), self.alpha)?,
        };
        Ok(spec.with_negated_base(self.negate_base))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub threshold_factor: f64,
    pub min_separation: f64,
    /// Profile comparison halfwidth; `1.5 / b` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_halfwidth: Option<f64>,
    pub n_bins: usize,
    /// Upper edge of the amplitude histogram range `[0, histogram_max]`.
    pub histogram_max: f64,
    /// Snapshots earlier than this time are left out of histograms.
    pub burn_in: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            threshold_factor: DEFAULT_THRESHOLD_FACTOR,
            min_separation: 1.0,
            window_halfwidth: None,
            n_bins: 60,
            histogram_max: 6.0,
            burn_in: 0.0,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = THRESHOLD_RANGE;
        if !(lo..=hi).contains(&self.threshold_factor) {
            return Err(Error::Config(format!(
                "analysis.threshold_factor must lie in [{lo}, {hi}], got {}",
                self.threshold_factor
            )));
        }
        if !(self.min_separation > 0.0) {
            return Err(Error::Config(
                "analysis.min_separation must be positive".into(),
            ));
        }
        if let Some(w) = self.window_halfwidth {
            if !(w > 0.0) {
                return Err(Error::Config(
                    "analysis.window_halfwidth must be positive".into(),
                ));
            }
        }
        if self.n_bins == 0 {
            return Err(Error::Config("analysis.n_bins must be >= 1".into()));
        }
        if !(self.histogram_max > 0.0) || !self.histogram_max.is_finite() {
            return Err(Error::Config(
                "analysis.histogram_max must be positive".into(),
            ));
        }
        if !self.burn_in.is_finite() {
            return Err(Error::Config("analysis.burn_in must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Binary,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Binary],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub grid: GridParams,
    pub initial_condition: InitialCondition,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub solver: SimulationConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Free-text assumptions carried into run manifests.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parse and validate a JSON scenario. Relative `from_file` paths are taken
/// relative to `base_dir` when given.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<ScenarioConfig> {
    let mut cfg: ScenarioConfig = serde_json::from_str(text).map_err(parse_error)?;
    if let (InitialCondition::FromFile { path, .. }, Some(base)) =
        (&mut cfg.initial_condition, base_dir)
    {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path.parent())
}

impl ScenarioConfig {
    pub fn new(initial_condition: InitialCondition, potential: PotentialConfig) -> Self {
        ScenarioConfig {
            grid: GridParams::default(),
            initial_condition,
            potential,
            solver: SimulationConfig::default(),
            analysis: AnalysisConfig::default(),
            outputs: OutputConfig::default(),
            notes: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.solver.validate()?;
        self.potential.to_spec()?;
        self.analysis.validate()?;
        match &self.initial_condition {
            InitialCondition::SechSoliton { amplitude_a } => {
                if !(*amplitude_a > 0.0) || !amplitude_a.is_finite() {
                    return Err(Error::Config(format!(
                        "initial_condition.amplitude_a must be positive, got {amplitude_a}"
                    )));
                }
            }
            InitialCondition::PlaneWave { k } if !k.is_finite() => {
                return Err(Error::Config("initial_condition.k must be finite".into()));
            }
            InitialCondition::Peregrine { t0, scale }
            | InitialCondition::RationalOrder2 { t0, scale } => {
                if !t0.is_finite() {
                    return Err(Error::Config("initial_condition.t0 must be finite".into()));
                }
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(Error::Config(format!(
                        "initial_condition.scale must be positive, got {scale}"
                    )));
                }
            }
            InitialCondition::FromFile { path, .. } if !path.is_file() => {
                return Err(Error::Config(format!(
                    "initial_condition.path {} does not exist",
                    path.display()
                )));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.solver.seed = seed;
        self
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(self.grid.build()?))
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        self.potential.to_spec()
    }

    pub fn initial_field(&self, grid: &Arc<Grid>) -> Result<WaveField> {
        match &self.initial_condition {
            InitialCondition::SechSoliton { amplitude_a } => {
                SechSoliton::new(*amplitude_a)?.sample(grid, 0.0)
            }
            InitialCondition::PlaneWave { k } => PlaneWave::on_grid(grid, *k).sample(grid, 0.0),
            InitialCondition::Peregrine { t0, scale } => {
                scale_solution(Peregrine, *scale)?.sample(grid, *t0)
            }
            InitialCondition::RationalOrder2 { t0, scale } => {
                scale_solution(RationalOrder2, *scale)?.sample(grid, *t0)
            }
            InitialCondition::FromFile { path, snapshot } => {
                let file = read_snapshots(path)?;
                if file.grid.as_ref() != grid.as_ref() {
                    return Err(Error::Config(format!(
                        "initial_condition.path grid {:?} differs from scenario grid {:?}",
                        file.grid, grid
                    )));
                }
                let count = file.snapshots.len();
                let index = snapshot.unwrap_or(count.saturating_sub(1));
                let snap = file.snapshots.get(index).ok_or_else(|| {
                    Error::Config(format!(
                        "initial_condition.snapshot {index} out of range ({count} snapshots)"
                    ))
                })?;
                WaveField::new(grid.clone(), snap.values().to_vec(), snap.time())
            }
        }
    }

    /// Build the grid, initial field and potential, then integrate.
    pub fn simulate(&self) -> Result<Trajectory> {
        let grid = self.build_grid()?;
        let initial = self.initial_field(&grid)?;
        run(&initial, &self.potential_spec()?, &self.solver)
    }
}

/// Named presets: odd groups start from the sech soliton, even groups from
/// the plane wave; `a` variants are noise-free, `b` variants use α = 1.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "fig1a",
        "sech soliton, single rectangular barrier, no noise",
    ),
    (
        "fig1b",
        "sech soliton, single rectangular barrier, white noise",
    ),
    ("fig2a", "plane wave, single rectangular barrier, no noise"),
    (
        "fig2b",
        "plane wave, single rectangular barrier, white noise",
    ),
    (
        "fig3a",
        "sech soliton, double rectangular barrier, no noise",
    ),
    (
        "fig3b",
        "sech soliton, double rectangular barrier, white noise",
    ),
    ("fig4a", "plane wave, double rectangular barrier, no noise"),
    (
        "fig4b",
        "plane wave, double rectangular barrier, white noise",
    ),
    ("fig5a", "sech soliton, triangular barrier, no noise"),
    ("fig5b", "sech soliton, triangular barrier, white noise"),
    ("fig6a", "plane wave, triangular barrier, no noise"),
    ("fig6b", "plane wave, triangular barrier, white noise"),
];

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let (_, description) = PRESETS.iter().find(|(n, _)| *n == name)?;
    let group: u32 = name[3..4].parse().ok()?;
    let noisy = name.ends_with('b');
    let kind = match group {
        1 | 2 => PotentialKind::SingleRectangular,
        3 | 4 => PotentialKind::DoubleRectangular,
        _ => PotentialKind::Triangular,
    };
    let initial = if group % 2 == 1 {
        InitialCondition::SechSoliton { amplitude_a: 0.5 }
    } else {
        InitialCondition::PlaneWave { k: 1.0 }
    };
    let mut cfg = ScenarioConfig::new(
        initial,
        PotentialConfig::new(kind, if noisy { 1.0 } else { 0.0 }),
    );
    // The triangular plane-wave panels need a longer horizon for the
    // instability to reach amplitudes near 5.
    cfg.solver.t_end = if group == 6 { 10.0 } else { 5.0 };
    cfg.notes = vec![
        format!("preset {name}: {description}"),
        "domain [-50, 50) with 4096 points is an assumed window".into(),
        format!("t_end = {} is an assumed horizon", cfg.solver.t_end),
        "potential noise is redrawn every time step".into(),
        "barrier formulas are evaluated literally with H(0) = 1".into(),
    ];
    Some(cfg)
}

/// Snapshot analysis shared by the CLI and the ensemble driver.
#[derive(Debug, Clone)]
pub struct TrajectoryAnalysis {
    /// Index of the snapshot with the largest `|ψ|`.
    pub max_snapshot: usize,
    pub max_amplitude: f64,
    pub time_of_max: f64,
    /// `None` when the max snapshot has no peaks (e.g. a constant field).
    pub report: Option<RogueReport>,
    pub histogram: Histogram,
}

pub fn analyze_snapshots(
    snapshots: &[WaveField],
    cfg: &AnalysisConfig,
) -> Result<TrajectoryAnalysis> {
    if snapshots.is_empty() {
        return Err(Error::Parameter("trajectory has no snapshots".into()));
    }
    let max_snapshot = max_amplitude_index(snapshots);
    let field = &snapshots[max_snapshot];
    let report = match classify_rogues(field, cfg.threshold_factor, cfg.min_separation) {
        Ok(mut r) => {
            r.score_rogues(field, cfg.window_halfwidth)?;
            Some(r)
        }
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    let histogram = amplitude_histogram(
        snapshots,
        cfg.n_bins,
        Some((0.0, cfg.histogram_max)),
        cfg.burn_in,
    )?;
    Ok(TrajectoryAnalysis {
        max_snapshot,
        max_amplitude: field.max_modulus(),
        time_of_max: field.time(),
        report,
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberStats {
    pub max_amplitude: f64,
    pub time_of_max: f64,
    pub significant_amplitude: Option<f64>,
    pub rogue_count: usize,
    /// `(b, window error)` of the highest peak at the max snapshot.
    pub top_peak_match: Option<(f64, f64)>,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberResult {
    pub index: u64,
    pub seed: u64,
    pub outcome: std::result::Result<MemberStats, String>,
}

#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub members: Vec<MemberResult>,
    /// `|ψ|` histogram pooled over all successful members.
    pub histogram: Histogram,
}

impl EnsembleSummary {
    /// Fraction of members whose maximum `|ψ|` exceeded `level`.
    pub fn fraction_exceeding(&self, level: f64) -> f64 {
        let hits = self
            .members
            .iter()
            .filter(|m| matches!(&m.outcome, Ok(s) if s.max_amplitude > level))
            .count();
        hits as f64 / self.members.len() as f64
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "index,seed,status,max_amplitude,time_of_max,significant_amplitude,rogue_count,top_b_factor,top_window_error,norm_drift"
        )?;
        for m in &self.members {
            match &m.outcome {
                Ok(s) => {
                    let sig = s
                        .significant_amplitude
                        .map(|v| v.to_string())
                        .unwrap_or_default();
                    let (b, e) = s
                        .top_peak_match
                        .map(|(b, e)| (b.to_string(), e.to_string()))
                        .unwrap_or_default();
                    writeln!(
                        w,
                        "{},{},ok,{},{},{},{},{},{},{}",
                        m.index,
                        m.seed,
                        s.max_amplitude,
                        s.time_of_max,
                        sig,
                        s.rogue_count,
                        b,
                        e,
                        s.norm_drift
                    )?;
                }
                Err(msg) => {
                    writeln!(
                        w,
                        "{},{},\"{}\",,,,,,,",
                        m.index,
                        m.seed,
                        msg.replace('"', "'")
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Seed of ensemble member `index`: `base_seed ^ index`.
pub fn member_seed(base_seed: u64, index: u64) -> u64 {
    base_seed ^ index
}

fn run_member(scenario: &ScenarioConfig, index: u64) -> (MemberResult, Option<Histogram>) {
    let seed = member_seed(scenario.solver.seed, index);
    let member = scenario.clone().with_seed(seed);
    let outcome = member.simulate().and_then(|traj| {
        let analysis = analyze_snapshots(&traj.snapshots, &member.analysis)?;
        let n0 = traj.norms[0];
        let drift = traj
            .norms
            .iter()
            .map(|n| ((n - n0) / n0).abs())
            .fold(0.0, f64::max);
        let top_peak_match = analysis.report.as_ref().and_then(|r| {
            let field = &traj.snapshots[analysis.max_snapshot];
            let top = r.peaks.first()?;
            let b = top.amplitude / crate::analysis::RATIONAL_ORDER2_PEAK;
            let hw = member
                .analysis
                .window_halfwidth
                .unwrap_or_else(|| crate::analysis::default_window_halfwidth(b));
            crate::analysis::match_rational_profile(field, top, hw)
                .ok()
                .map(|m| (m.b_factor, m.window_error))
        });
        let stats = MemberStats {
            max_amplitude: analysis.max_amplitude,
            time_of_max: analysis.time_of_max,
            significant_amplitude: analysis.report.as_ref().map(|r| r.significant_amplitude),
            rogue_count: analysis.report.as_ref().map_or(0, |r| r.rogue_peaks.len()),
            top_peak_match,
            norm_drift: drift,
        };
        Ok((stats, analysis.histogram))
    });
    match outcome {
        Ok((stats, hist)) => (
            MemberResult {
                index,
                seed,
                outcome: Ok(stats),
            },
            Some(hist),
        ),
        Err(e) => (
            MemberResult {
                index,
                seed,
                outcome: Err(e.to_string()),
            },
            None,
        ),
    }
}

/// Run `n_seeds` members on at most `workers` threads. Results are reduced in
/// seed order, so the summary does not depend on `workers`. A failing member
/// is recorded and does not abort the others.
pub fn run_ensemble(
    scenario: &ScenarioConfig,
    n_seeds: u64,
    workers: usize,
) -> Result<EnsembleSummary> {
    if n_seeds == 0 {
        return Err(Error::Parameter("ensemble needs at least one seed".into()));
    }
    scenario.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(MemberResult, Option<Histogram>)> = pool.install(|| {
        (0..n_seeds)
            .into_par_iter()
            .map(|i| run_member(scenario, i))
            .collect()
    });

    let mut histogram = Histogram::with_range(
        scenario.analysis.n_bins,
        0.0,
        scenario.analysis.histogram_max,
    )?;
    let mut members = Vec::with_capacity(results.len());
    for (member, hist) in results {
        if let Some(h) = hist {
            histogram.merge(&h)?;
        }
        members.push(member);
    }
    Ok(EnsembleSummary { members, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "initial_condition": {"kind": "plane_wave"},
        "potential": {"kind": "single_rectangular"}
    }"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = parse_config(MINIMAL, None).unwrap();
        assert_eq!(cfg.solver.dt, 1e-3);
        assert_eq!(cfg.grid.n_points, 4096);
        assert_eq!(cfg.solver.beta, 0.5);
        assert_eq!(cfg.solver.zeta, 1.0);
        assert_eq!(cfg.potential.alpha, 1.0);
        assert_eq!(
            cfg.initial_condition,
            InitialCondition::PlaneWave { k: 1.0 }
        );
    }

    #[test]
    fn zero_dt_rejected() {
        let text = r#"{
            "initial_condition": {"kind": "plane_wave"},
            "potential": {"kind": "single_rectangular"},
            "solver": {"dt": 0.0}
        }"#;
        match parse_config(text, None) {
            Err(Error::Config(msg)) => assert!(msg.contains("solver.dt"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{
            "initial_condition": {"kind": "plane_wave"},
            "potential": {"kind": "single_rectangular"},
            "grid": {"dxx": 0.1}
        }"#;
        match parse_config(text, None) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("dxx"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let top_level = r#"{"initial_condition": {"kind": "plane_wave"}, "potential": {"kind": "triangular"}, "dxx": 1}"#;
        assert!(matches!(
            parse_config(top_level, None),
            Err(Error::Parse { .. })
        ));
        let in_variant = r#"{"initial_condition": {"kind": "plane_wave", "kk": 2}, "potential": {"kind": "triangular"}}"#;
        assert!(matches!(
            parse_config(in_variant, None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn malformed_json_position() {
        match parse_config("{\n  \"grid\": ,\n}", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_names_fields() {
        let cases = [
            (r#""grid": {"n_points": 1000}"#, "n_points"),
            (
                r#""analysis": {"threshold_factor": 9.0}"#,
                "analysis.threshold_factor",
            ),
            (
                r#""solver": {"snapshot_every": 0}"#,
                "solver.snapshot_every",
            ),
        ];
        for (extra, field) in cases {
            let text = format!(
                r#"{{"initial_condition": {{"kind": "plane_wave"}}, "potential": {{"kind": "triangular"}}, {extra}}}"#
            );
            let err = parse_config(&text, None).unwrap_err().to_string();
            assert!(err.contains(field), "{err}");
        }
        let missing = r#"{"initial_condition": {"kind": "from_file", "path": "/nonexistent/x.nls"}, "potential": {"kind": "triangular"}}"#;
        assert!(parse_config(missing, None)
            .unwrap_err()
            .to_string()
            .contains("initial_condition.path"));
        let segs = r#"{"initial_condition": {"kind": "plane_wave"}, "potential": {"kind": "triangular", "segments": [{"left": 0, "right": 1, "profile": {"constant": 1}}]}}"#;
        assert!(parse_config(segs, None)
            .unwrap_err()
            .to_string()
            .contains("potential.segments"));
    }

    #[test]
    fn custom_potential_config() {
        let text = r#"{
            "initial_condition": {"kind": "sech_soliton", "amplitude_a": 0.8},
            "potential": {"kind": "custom_piecewise", "alpha": 0.0, "segments": [
                {"left": -1, "right": 1, "profile": {"constant": -2.0}},
                {"left": 3, "right": 5, "profile": {"linear": {"c0": 1.0, "c1": -0.5}}}
            ]}
        }"#;
        let cfg = parse_config(text, None).unwrap();
        let spec = cfg.potential_spec().unwrap();
        assert_eq!(spec.base_at(0.0), -2.0);
        assert_eq!(spec.base_at(4.0), -1.0);
        assert_eq!(spec.base_at(2.0), 0.0);
    }

    #[test]
    fn config_round_trips_through_json() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            let text = serde_json::to_string_pretty(&cfg).unwrap();
            assert_eq!(parse_config(&text, None).unwrap(), cfg);
        }
    }

    #[test]
    fn presets_cover_all_panels() {
        assert_eq!(PRESETS.len(), 12);
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let noisy = cfg.potential.alpha > 0.0;
            assert_eq!(noisy, name.ends_with('b'));
        }
        assert!(preset("fig7a").is_none());
        assert_eq!(
            preset("fig2b").unwrap().potential.kind,
            PotentialKind::SingleRectangular
        );
        assert_eq!(
            preset("fig4a").unwrap().potential.kind,
            PotentialKind::DoubleRectangular
        );
        assert_eq!(
            preset("fig5b").unwrap().potential.kind,
            PotentialKind::Triangular
        );
        assert!(matches!(
            preset("fig5b").unwrap().initial_condition,
            InitialCondition::SechSoliton { .. }
        ));
        assert!(matches!(
            preset("fig6b").unwrap().initial_condition,
            InitialCondition::PlaneWave { .. }
        ));
    }

    #[test]
    fn scaled_rational_initial_condition() {
        let text = r#"{"initial_condition": {"kind": "rational_order2", "scale": 0.76}, "potential": {"kind": "single_rectangular", "alpha": 0}}"#;
        let cfg = parse_config(text, None).unwrap();
        let grid = cfg.build_grid().unwrap();
        let field = cfg.initial_field(&grid).unwrap();
        assert!((field.max_modulus() - 3.8).abs() < 1e-12);
        let bad = text.replace("0.76", "-1");
        assert!(parse_config(&bad, None)
            .unwrap_err()
            .to_string()
            .contains("initial_condition.scale"));
    }

    #[test]
    fn member_seeds() {
        assert_eq!(member_seed(0, 3), 3);
        assert_eq!(member_seed(0b1010, 0b0110), 0b1100);
    }
}
