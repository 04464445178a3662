//! `qss-rocof`: generate synthetic three-phase records, run the RoCoF
//! estimators over them, compare the two relay schemes and study the
//! circulation threshold.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qss-rocof", version, about = "QSS-frequency RoCoF estimation and UFLS relay simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic three-phase waveform CSV.
    Generate(GenerateArgs),
    /// Run both RoCoF estimators and write aligned time series plus a summary.
    Analyze(AnalyzeArgs),
    /// Run the conventional and QSS relays over one waveform.
    Relay(RelayArgs),
    /// Report the initial gated span for a log-spaced range of thresholds.
    SweepEpsilon(SweepArgs),
    /// Suggest a threshold from a stationary record.
    EpsilonRecommend(RecommendArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Balanced,
    Chirp,
    AmplitudeStep,
    Polluted,
    TransientEvent,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Nominal frequency, Hz.
    #[arg(long, default_value_t = 50.0)]
    f0: f64,
    /// Sample rate, Hz.
    #[arg(long, default_value_t = 5000.0)]
    fs: f64,
    /// Duration, s.
    #[arg(long, default_value_t = 2.0)]
    dur: f64,
    /// Peak phase voltage, pu.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Frequency ramp, Hz/s.
    #[arg(long)]
    ramp: Option<f64>,
    /// Ramp onset, s.
    #[arg(long, default_value_t = 0.0)]
    ramp_start: f64,
    /// Amplitude step ratio.
    #[arg(long)]
    step_ratio: Option<f64>,
    /// Amplitude step time, s.
    #[arg(long)]
    step_at: Option<f64>,
    /// Harmonic as ORDER:MAGNITUDE (repeatable).
    #[arg(long = "harmonic", value_parser = parse_harmonic)]
    harmonics: Vec<(u32, f64)>,
    /// Gaussian noise standard deviation per phase, pu.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Linear amplitude drift, 1/s.
    #[arg(long)]
    drift: Option<f64>,
    /// Distorted event onset, s.
    #[arg(long)]
    event_start: Option<f64>,
    /// Distorted event length, s.
    #[arg(long)]
    event_len: Option<f64>,
    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Source {
    Geometric,
    Pll,
}

/// Estimator settings shared by the analysis commands.
#[derive(Debug, Args)]
struct EstimatorArgs {
    #[arg(long, default_value_t = 50.0)]
    base_frequency: f64,
    /// Circulation threshold, pu².
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Low-pass cutoff on the instantaneous frequency, Hz.
    #[arg(long, default_value_t = 50.0)]
    cutoff_hz: f64,
    /// Washout time constant, ms.
    #[arg(long, default_value_t = 10.0)]
    washout_ms: f64,
    #[arg(long, default_value_t = 0.2)]
    pll_kp: f64,
    #[arg(long, default_value_t = 0.03)]
    pll_ki: f64,
    /// Longest accepted period, ms.
    #[arg(long, default_value_t = 100.0)]
    lookback_ms: f64,
    /// Instantaneous frequency behind the conventional estimator.
    #[arg(long, value_enum, default_value_t = Source::Geometric)]
    source: Source,
    /// Samples added on each side of every closed-gate stretch.
    #[arg(long, default_value_t = 3)]
    guard_samples: usize,
    /// Event onset for reporting the initial gated span, s.
    #[arg(long)]
    event_start: Option<f64>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Waveform CSV with columns time_s, va, vb, vc.
    #[arg(long, short)]
    input: PathBuf,
    /// Time-series CSV.
    #[arg(long, short)]
    output: PathBuf,
    /// Summary CSV; defaults to `<output>.summary.csv`.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Rolling window for both estimators, ms (default 500 conventional, 250 QSS).
    #[arg(long)]
    window_ms: Option<f64>,
    #[command(flatten)]
    estimator: EstimatorArgs,
}

#[derive(Debug, Args)]
struct RelayArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Conventional relay config (TOML); built-in settings when omitted.
    #[arg(long)]
    conventional: Option<PathBuf>,
    /// QSS relay config (TOML); built-in settings when omitted.
    #[arg(long)]
    qss: Option<PathBuf>,
    /// Directory for the trip CSVs and the comparison.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[command(flatten)]
    estimator: EstimatorArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Event onset, s.
    #[arg(long)]
    event_start: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps_min: f64,
    #[arg(long, default_value_t = 1.0)]
    eps_max: f64,
    #[arg(long, default_value_t = 41)]
    points: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    /// Stationary waveform CSV.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    lookback_ms: f64,
}

fn parse_harmonic(s: &str) -> Result<(u32, f64), String> {
    let (order, mag) = s.split_once(':').ok_or("expected ORDER:MAGNITUDE")?;
    let order = order.trim().parse().map_err(|e| format!("order: {e}"))?;
    let mag = mag.trim().parse().map_err(|e| format!("magnitude: {e}"))?;
    Ok((order, mag))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Relay(args) => commands::relay(args),
        Command::SweepEpsilon(args) => commands::sweep_epsilon(args),
        Command::EpsilonRecommend(args) => commands::recommend(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
