use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use nlse_tunnel_core::analysis::{default_window_halfwidth, RATIONAL_ORDER2_PEAK};
use nlse_tunnel_core::io::{
    read_snapshots, write_histogram_csv, write_potential_csv, write_profile_csv, write_report_csv,
    write_trajectory, write_trajectory_csv,
};
use nlse_tunnel_core::scenario::{
    analyze_snapshots, load_config, parse_config, preset, run_ensemble, AnalysisConfig,
    OutputFormat, PRESETS,
};
use nlse_tunnel_core::{find_peaks, match_rational_profile, Error, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "nlse-tunnel",
    version,
    about = "Noisy-barrier NLSE simulations and rogue-wave analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write trajectory.nls, potential.csv and manifest.json.
    Simulate(SimulateArgs),
    /// Detect peaks and rogue events in a trajectory file.
    Analyze(AnalyzeArgs),
    /// Run many seeds of one scenario in parallel.
    Ensemble(EnsembleArgs),
    /// Compare one peak with the scaled second-order rational solution.
    Compare(CompareArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct ScenarioSource {
    /// JSON scenario file.
    config: Option<PathBuf>,
    /// Built-in preset (fig1a … fig6b).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: ScenarioSource,
    /// Replay the scenario recorded in a run manifest.
    #[arg(long, conflicts_with_all = ["config", "preset"])]
    manifest: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the scenario's).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write trajectory.csv.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    trajectory: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    min_separation: f64,
    /// Profile comparison halfwidth; 1.5/b by default.
    #[arg(long)]
    window: Option<f64>,
    #[arg(long, default_value_t = 60)]
    bins: usize,
    #[arg(long, default_value_t = 6.0)]
    histogram_max: f64,
    #[arg(long, default_value_t = 0.0)]
    burn_in: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[arg(long)]
    seeds: u64,
    /// Base seed; member i uses base ^ i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "NLSE_TUNNEL_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    trajectory: PathBuf,
    /// 1-based rank of the peak by amplitude.
    #[arg(long, default_value_t = 1)]
    peak_rank: usize,
    /// Snapshot index; the max-amplitude snapshot by default.
    #[arg(long)]
    snapshot: Option<usize>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    min_separation: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Written next to every simulation; `simulate --manifest` replays it.
#[derive(Serialize, Deserialize)]
struct Manifest {
    program: String,
    version: String,
    scenario: ScenarioConfig,
    n_steps: u64,
    n_snapshots: usize,
    max_amplitude: f64,
    max_norm_drift: f64,
    files: Vec<String>,
}

#[derive(Serialize)]
struct AnalysisSummary {
    snapshot: usize,
    time: f64,
    max_amplitude: f64,
    significant_amplitude: Option<f64>,
    threshold: Option<f64>,
    n_peaks: usize,
    n_rogue: usize,
    note: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BlowUp { .. } => 3,
            Error::Io(_) | Error::Format { .. } => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Analyze(args) => analyze(args),
        Command::Ensemble(args) => ensemble(args),
        Command::Compare(args) => compare(args),
        Command::Presets => {
            for (name, description) in PRESETS {
                println!("{name:6} {description}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn resolve_scenario(source: &ScenarioSource) -> CliResult<ScenarioConfig> {
    match (&source.config, &source.preset) {
        (Some(path), _) => Ok(load_config(path)?),
        (None, Some(name)) => preset(name).ok_or_else(|| {
            let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
            usage(format!(
                "unknown preset {name:?}; expected one of {}",
                names.join(", ")
            ))
        }),
        (None, None) => Err(usage("a scenario file or --preset is required")),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn simulate(args: SimulateArgs) -> CliResult {
    let mut scenario = match &args.manifest {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let inner = value
                .get("scenario")
                .ok_or_else(|| usage(format!("{}: manifest has no scenario", path.display())))?;
            parse_config(&inner.to_string(), path.parent())?
        }
        None => resolve_scenario(&args.source)?,
    };
    if let Some(seed) = args.seed {
        scenario.solver.seed = seed;
    }
    if args.csv && !scenario.outputs.formats.contains(&OutputFormat::Csv) {
        scenario.outputs.formats.push(OutputFormat::Csv);
    }
    // The manifest keeps the scenario's own directory so replays stay byte-identical.
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| scenario.outputs.directory.clone());
    fs::create_dir_all(&out)?;

    let traj = scenario.simulate()?;
    let mut files = Vec::new();

    write_trajectory(&out.join("trajectory.nls"), &traj)?;
    files.push("trajectory.nls".to_string());
    let sampled = traj
        .potential
        .sample(traj.grid().clone(), scenario.solver.seed)?;
    write_potential_csv(create(&out.join("potential.csv"))?, &sampled)?;
    files.push("potential.csv".to_string());
    if scenario.outputs.formats.contains(&OutputFormat::Csv) {
        write_trajectory_csv(create(&out.join("trajectory.csv"))?, &traj.snapshots)?;
        files.push("trajectory.csv".to_string());
    }

    let n0 = traj.norms[0];
    let drift = traj
        .norms
        .iter()
        .map(|n| ((n - n0) / n0).abs())
        .fold(0.0, f64::max);
    let manifest = Manifest {
        program: "nlse-tunnel".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        n_steps: scenario.solver.n_steps(),
        n_snapshots: traj.snapshots.len(),
        max_amplitude: traj.max_amplitude(),
        max_norm_drift: drift,
        files,
        scenario,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(out.join("manifest.json"), text + "\n")?;

    println!(
        "simulated {} steps, {} snapshots; max |psi| = {:.6} at t = {:.3}; norm drift {:.2e}",
        manifest.n_steps,
        manifest.n_snapshots,
        manifest.max_amplitude,
        traj.snapshots[traj.max_amplitude_snapshot()].time(),
        drift
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> CliResult {
    let cfg = AnalysisConfig {
        threshold_factor: args.threshold,
        min_separation: args.min_separation,
        window_halfwidth: args.window,
        n_bins: args.bins,
        histogram_max: args.histogram_max,
        burn_in: args.burn_in,
    };
    cfg.validate()?;
    let file = read_snapshots(&args.trajectory)?;
    let result = analyze_snapshots(&file.snapshots, &cfg)?;
    fs::create_dir_all(&args.out)?;

    let mut summary = AnalysisSummary {
        snapshot: result.max_snapshot,
        time: result.time_of_max,
        max_amplitude: result.max_amplitude,
        significant_amplitude: None,
        threshold: None,
        n_peaks: 0,
        n_rogue: 0,
        note: None,
    };
    match &result.report {
        Some(report) => {
            write_report_csv(create(&args.out.join("report.csv"))?, report)?;
            summary.significant_amplitude = Some(report.significant_amplitude);
            summary.threshold = Some(report.threshold());
            summary.n_peaks = report.peaks.len();
            summary.n_rogue = report.rogue_peaks.len();
            println!(
                "snapshot {} (t = {:.3}): significant amplitude {:.4}, threshold {:.4}, {} peaks, {} rogue",
                result.max_snapshot,
                result.time_of_max,
                report.significant_amplitude,
                report.threshold(),
                report.peaks.len(),
                report.rogue_peaks.len()
            );
            println!("rank        x  amplitude  rogue");
            for (rank, p) in report.peaks.iter().take(5).enumerate() {
                println!(
                    "{:4} {:8.3} {:10.5}  {}",
                    rank + 1,
                    p.position_x,
                    p.amplitude,
                    if report.is_rogue(p) { "yes" } else { "no" }
                );
            }
        }
        None => {
            summary.note = Some("no peaks".into());
            println!(
                "snapshot {} (t = {:.3}): no peaks",
                result.max_snapshot, result.time_of_max
            );
        }
    }
    write_histogram_csv(create(&args.out.join("histogram.csv"))?, &result.histogram)?;
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(args.out.join("summary.json"), text + "\n")?;
    Ok(())
}

fn ensemble(args: EnsembleArgs) -> CliResult {
    let mut scenario = resolve_scenario(&args.source)?;
    if let Some(seed) = args.seed {
        scenario.solver.seed = seed;
    }
    if args.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let workers = match args.workers {
        Some(0) => return Err(usage("--workers must be at least 1")),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let out = args
        .out
        .unwrap_or_else(|| scenario.outputs.directory.clone());
    fs::create_dir_all(&out)?;

    let summary = run_ensemble(&scenario, args.seeds, workers)?;
    summary.write_csv(create(&out.join("ensemble.csv"))?)?;
    write_histogram_csv(create(&out.join("histogram.csv"))?, &summary.histogram)?;

    let failed = summary
        .members
        .iter()
        .filter(|m| m.outcome.is_err())
        .count();
    let rogue_runs = summary
        .members
        .iter()
        .filter(|m| matches!(&m.outcome, Ok(s) if s.rogue_count > 0))
        .count();
    println!(
        "{} members ({} failed) on {} workers; {} with rogue peaks; {:.0}% exceed |psi| = 2",
        summary.members.len(),
        failed,
        workers,
        rogue_runs,
        100.0 * summary.fraction_exceeding(2.0)
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn compare(args: CompareArgs) -> CliResult {
    if args.peak_rank == 0 {
        return Err(usage("--peak-rank is 1-based"));
    }
    let file = read_snapshots(&args.trajectory)?;
    let index = match args.snapshot {
        Some(i) if i >= file.snapshots.len() => {
            return Err(usage(format!(
                "snapshot {i} out of range ({} snapshots)",
                file.snapshots.len()
            )))
        }
        Some(i) => i,
        None => nlse_tunnel_core::solver::max_amplitude_index(&file.snapshots),
    };
    let field = &file.snapshots[index];
    let peaks = find_peaks(field, args.min_separation)?;
    let peak = peaks.get(args.peak_rank - 1).ok_or_else(|| {
        usage(format!(
            "peak rank {} out of range ({} peaks)",
            args.peak_rank,
            peaks.len()
        ))
    })?;
    let hw = args
        .window
        .unwrap_or_else(|| default_window_halfwidth(peak.amplitude / RATIONAL_ORDER2_PEAK));
    let m = match_rational_profile(field, peak, hw)?;
    fs::create_dir_all(&args.out)?;
    write_profile_csv(create(&args.out.join("profile.csv"))?, &m)?;
    println!(
        "snapshot {index} peak {} at x = {:.4}: b = {:.6}, window ±{:.4}, relative L2 error {:.3e}",
        args.peak_rank, peak.position_x, m.b_factor, m.window_halfwidth, m.window_error
    );
    Ok(())
}
