use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eventack::pipeline::{
    self, estimate_windows, evaluate, integrate_trajectory, parse_tracks, read_ground_truth,
    read_intrinsics, read_omega, read_scale, write_omega, write_stats, write_trajectory,
    PipelineError, Scale, TrackValidity, WindowConfig, WindowOutcome,
};
use eventack::plot::{axis_label, line_chart, read_sweep_series};
use eventack::sim::{run_sweep_with, Factor, SceneConfig, SimError};
use eventack::synth::{generate_sequence, SequenceConfig};
use eventack_core::robust::VoteConfig;
use eventack_core::solver::{ExpansionOrder, SolverConfig};
use serde::Serialize;

/// Rotational velocity of an Ackermann vehicle from event-camera feature tracks.
#[derive(Parser)]
#[command(name = "eventack", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over one scene factor.
    Simulate(SimulateArgs),
    /// Windowed rotational-velocity estimation from a tracks file.
    Solve(SolveArgs),
    /// Chain window estimates into a trajectory using external scale.
    Trajectory(TrajectoryArgs),
    /// Rotation and translation-direction errors against ground truth.
    Evaluate(EvaluateArgs),
    /// Line chart of a sweep CSV.
    Plot(PlotArgs),
    /// Write a synthetic tracks/intrinsics/ground-truth/scale fixture.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    factor: Factor,
    #[arg(long, value_delimiter = ',', default_value = "s3c2,s5c4,s7c6")]
    orders: Vec<ExpansionOrder>,
    /// Factor values (default: the standard range for the factor).
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pin the rotational velocity instead of drawing it per trial.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
}

#[derive(Args)]
struct WindowArgs {
    #[arg(long, default_value_t = 0.2)]
    window_length: f64,
    #[arg(long, default_value_t = 0.1)]
    stride: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    epoch: f64,
}

impl WindowArgs {
    fn config(&self) -> WindowConfig {
        WindowConfig {
            length: self.window_length,
            stride: self.stride,
            epoch: self.epoch,
            ..WindowConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    tracks: PathBuf,
    #[arg(long)]
    intrinsics: PathBuf,
    #[arg(long, default_value = "s7c6")]
    order: ExpansionOrder,
    #[arg(long)]
    out: PathBuf,
    /// Dropped-track and gap report (default: `<out>` with a `.report.toml` extension).
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value_t = 0.15)]
    min_duration: f64,
    #[arg(long, default_value_t = 0.25)]
    max_duration: f64,
    #[arg(long, default_value_t = 8)]
    min_events: usize,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[arg(long)]
    omega: PathBuf,
    /// Per-window forward displacement, `t_start,t_end,d`.
    #[arg(
        long,
        conflicts_with = "constant_scale",
        required_unless_present = "constant_scale"
    )]
    scale: Option<PathBuf>,
    #[arg(long)]
    constant_scale: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    omega: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Optional per-window error table.
    #[arg(long)]
    per_window: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.5)]
    duration: f64,
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    omega: f64,
    #[arg(long, default_value_t = 0.1)]
    omega_amp: f64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// New tracks per second.
    #[arg(long, default_value_t = 120.0)]
    track_rate: f64,
    #[arg(long, default_value_t = 60)]
    events_per_track: usize,
    #[command(flatten)]
    window: WindowArgs,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Solve(a) => solve(a),
        Command::Trajectory(a) => trajectory(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Plot(a) => plot(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let base = SceneConfig {
        trials: a.trials,
        seed: a.seed,
        omega_true: a.omega,
        ..SceneConfig::default()
    };
    let values = a.values.unwrap_or_else(|| a.factor.default_values());
    let result = run_sweep_with(
        a.factor,
        &values,
        &base,
        &a.orders,
        &SolverConfig::default(),
        &VoteConfig::default(),
    )?;
    result.save(&a.out)?;
    let failed = result
        .rows
        .iter()
        .filter(|r| r.failures == r.trials)
        .count();
    if failed == result.rows.len() {
        return Err(Failure::Numerical(
            "every trial failed at every factor value".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveReport<'a> {
    input_tracks: usize,
    used_tracks: usize,
    dropped_tracks: usize,
    windows: usize,
    estimated_windows: usize,
    gap_windows: usize,
    dropped: &'a [pipeline::DroppedTrack],
    gaps: Vec<pipeline::WindowGap>,
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    let cam = read_intrinsics(&a.intrinsics)?;
    let validity = TrackValidity {
        min_duration: a.min_duration,
        max_duration: a.max_duration,
        min_events: a.min_events,
    };
    let tracks = parse_tracks(&a.tracks, &cam, &validity)?;
    let window = a.window.config();
    let outcomes = estimate_windows(
        &tracks.tracks,
        &cam,
        a.order,
        &window,
        &SolverConfig::default(),
        &VoteConfig::default(),
    )?;

    let mut buf = Vec::new();
    write_omega(&mut buf, &outcomes)?;
    write_file(&a.out, &buf)?;

    let gaps: Vec<_> = outcomes
        .iter()
        .filter_map(|o| match o {
            WindowOutcome::Gap(g) => Some(*g),
            WindowOutcome::Estimate(_) => None,
        })
        .collect();
    let report = SolveReport {
        input_tracks: tracks.input_tracks(),
        used_tracks: tracks.tracks.len(),
        dropped_tracks: tracks.dropped.len(),
        windows: outcomes.len(),
        estimated_windows: outcomes.len() - gaps.len(),
        gap_windows: gaps.len(),
        dropped: &tracks.dropped,
        gaps,
    };
    let text = toml::to_string(&report).map_err(|e| Failure::Input(e.to_string()))?;
    let report_path = a
        .report
        .unwrap_or_else(|| a.out.with_extension("report.toml"));
    write_file(&report_path, text.as_bytes())?;

    if outcomes.is_empty() {
        return Err(Failure::Input(
            "the tracks do not cover a single complete window".into(),
        ));
    }
    if report.estimated_windows == 0 {
        return Err(Failure::Numerical(format!(
            "no window produced an estimate ({} gaps); see {}",
            report.gap_windows,
            report_path.display()
        )));
    }
    Ok(())
}

fn trajectory(a: TrajectoryArgs) -> Result<(), Failure> {
    let windows = read_omega(&a.omega)?;
    let scale = match (&a.scale, a.constant_scale) {
        (Some(p), _) => read_scale(p)?,
        (None, Some(d)) => Scale::Constant(d),
        (None, None) => return Err(Failure::Input("a scale source is required".into())),
    };
    let poses = integrate_trajectory(&windows, &scale)?;
    let mut buf = Vec::new();
    write_trajectory(&mut buf, &poses)?;
    write_file(&a.out, &buf)
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<(), Failure> {
    let windows = read_omega(&a.omega)?;
    let gt = read_ground_truth(&a.gt)?;
    let report = evaluate(&windows, &gt)?;
    let mut buf = Vec::new();
    write_stats(&mut buf, &report)?;
    write_file(&a.out, &buf)?;
    if let Some(p) = a.per_window {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &report.per_window {
            w.serialize(row)
                .map_err(|e| Failure::Input(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
        write_file(&p, &bytes)?;
    }
    Ok(())
}

fn plot(a: PlotArgs) -> Result<(), Failure> {
    let name = a.input.display().to_string();
    let file = std::fs::File::open(&a.input).map_err(|e| Failure::Input(format!("{name}: {e}")))?;
    let series = read_sweep_series(file, &name)?;
    let sidecar = std::fs::read_to_string(a.input.with_extension("toml")).ok();
    let factor = sidecar
        .as_deref()
        .and_then(|t| t.parse::<toml::Table>().ok())
        .and_then(|t| t.get("factor").and_then(|v| v.as_str()).map(str::to_owned))
        .unwrap_or_default();
    let svg = line_chart(&series, axis_label(&factor), "mean error (rad/s)");
    write_file(&a.out, svg.as_bytes())
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    let cfg = SequenceConfig {
        duration: a.duration,
        omega_mean: a.omega,
        omega_amp: a.omega_amp,
        noise_sigma: a.noise,
        track_rate: a.track_rate,
        events_per_track: a.events_per_track,
        seed: a.seed,
        ..SequenceConfig::default()
    };
    let seq = generate_sequence(&cfg)?;
    seq.write_fixture(&a.out_dir, &a.window.config())?;
    Ok(())
}
