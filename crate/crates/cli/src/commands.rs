use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use qss_rocof::analysis::{InstantaneousSource, RocofStats};
use qss_rocof::experiments::{self, log_space, plateau, recommend_epsilon};
use qss_rocof::pll::PllGains;
use qss_rocof::relay::write_trip_csv;
use qss_rocof::signal::{write_csv_to, SignalKind};
use qss_rocof::{analyze as run_analysis, compare_schemes, generate as synthesize, read_csv, AnalysisConfig};
use qss_rocof::{FrequencyChain, RelayConfig, SampledWaveform, SignalSpec};

use crate::{AnalyzeArgs, EstimatorArgs, GenerateArgs, Kind, RecommendArgs, RelayArgs, Source, SweepArgs};

pub struct CommandError {
    pub code: u8,
    pub error: anyhow::Error,
}

type Outcome = Result<(), CommandError>;

fn usage(error: impl Into<anyhow::Error>) -> CommandError {
    CommandError {
        code: 1,
        error: error.into(),
    }
}

fn data(error: impl Into<anyhow::Error>) -> CommandError {
    CommandError {
        code: 2,
        error: error.into(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CommandError> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(data)
}

fn read_waveform(path: &Path) -> Result<SampledWaveform, CommandError> {
    read_csv(path).with_context(|| format!("reading {}", path.display())).map_err(data)
}

fn write_to(output: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Outcome {
    let result = match output {
        Some(path) => {
            let mut out = create(path)?;
            body(&mut out).and_then(|_| out.flush())
        }
        None => {
            let mut out = io::stdout().lock();
            body(&mut out).and_then(|_| out.flush())
        }
    };
    result.context("writing output").map_err(data)
}

pub fn generate(args: GenerateArgs) -> Outcome {
    let mut spec = SignalSpec::balanced(args.f0, args.amplitude, args.dur);
    spec.kind = match args.kind {
        Kind::Balanced => SignalKind::Balanced,
        Kind::Chirp => SignalKind::Chirp,
        Kind::AmplitudeStep => SignalKind::AmplitudeStep,
        Kind::Polluted => SignalKind::Polluted,
        Kind::TransientEvent => SignalKind::TransientEvent,
    };
    if let Some(rate) = args.ramp {
        spec = spec.with_ramp(rate, args.ramp_start);
    }
    match (args.step_ratio, args.step_at) {
        (Some(ratio), Some(at)) => spec = spec.with_step(ratio, at),
        (None, None) => {}
        _ => return Err(usage(anyhow!("--step-ratio and --step-at go together"))),
    }
    for (order, magnitude) in args.harmonics {
        spec = spec.with_harmonic(order, magnitude);
    }
    if let Some(std) = args.noise {
        spec = spec.with_noise(std, args.seed);
    }
    if let Some(drift) = args.drift {
        spec = spec.with_drift(drift);
    }
    match (args.event_start, args.event_len) {
        (Some(start), Some(len)) => spec = spec.with_event(start, len),
        (None, None) => {}
        _ => return Err(usage(anyhow!("--event-start and --event-len go together"))),
    }
    let waveform = synthesize(&spec, args.fs).map_err(usage)?;
    write_to(args.output.as_deref(), |out| write_csv_to(&waveform, out))
}

fn analysis_config(args: &EstimatorArgs) -> AnalysisConfig {
    AnalysisConfig {
        base_frequency_hz: args.base_frequency,
        epsilon: args.epsilon,
        butterworth_cutoff_hz: args.cutoff_hz,
        washout_tau_s: args.washout_ms / 1000.0,
        pll: PllGains {
            kp: args.pll_kp,
            ki: args.pll_ki,
        },
        lookback_s: args.lookback_ms / 1000.0,
        instantaneous: match args.source {
            Source::Geometric => InstantaneousSource::Geometric,
            Source::Pll => InstantaneousSource::Pll,
        },
        guard_samples: args.guard_samples,
        event_start_s: args.event_start,
        ..AnalysisConfig::default()
    }
}

pub fn analyze(args: AnalyzeArgs) -> Outcome {
    let mut config = analysis_config(&args.estimator);
    if let Some(ms) = args.window_ms {
        config.window_s = ms / 1000.0;
        config.qss_window_s = ms / 1000.0;
    }
    config.validate().map_err(usage)?;
    let waveform = read_waveform(&args.input)?;
    let analysis = run_analysis(&waveform, &config).map_err(data)?;

    write_to(Some(&args.output), |out| analysis.write_csv(out))?;
    let summary_path = args.summary.unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".summary.csv");
        PathBuf::from(p)
    });
    let summary = analysis.summary();
    write_to(Some(&summary_path), |out| {
        writeln!(
            out,
            "estimator,window_s,defined_samples,min_hz_s,max_hz_s,max_abs_hz_s,band_exceedances,exceeds_band"
        )?;
        for (name, window, s) in [
            ("conventional", summary.conventional_window_s, &summary.conventional),
            ("qss_gated", summary.qss_window_s, &summary.qss_gated),
        ] {
            writeln!(out, "{name},{window},{}", stats_row(s))?;
        }
        Ok(())
    })?;

    println!("samples            {}", summary.samples);
    println!("gate closed        {} samples (epsilon {})", summary.gate_closed_samples, summary.epsilon);
    println!("max |gamma'|       {}", opt(summary.max_abs_gamma_prime));
    if config.event_start_s.is_some() {
        println!("initial gated span {} s", opt(summary.first_recovery_s));
    }
    for (name, s) in [("conventional", &summary.conventional), ("qss-gated", &summary.qss_gated)] {
        println!(
            "{name:<18} max |RoCoF| {} Hz/s, outside ±1 Hz/s on {} samples",
            opt(s.max_abs_hz_per_s),
            s.band_exceedances
        );
    }
    Ok(())
}

fn stats_row(s: &RocofStats) -> String {
    format!(
        "{},{},{},{},{},{}",
        s.defined_samples,
        opt(s.min_hz_per_s),
        opt(s.max_hz_per_s),
        opt(s.max_abs_hz_per_s),
        s.band_exceedances,
        s.exceeds_band
    )
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn relay_config(path: Option<&Path>, fallback: RelayConfig) -> Result<RelayConfig, CommandError> {
    match path {
        Some(p) => RelayConfig::load(p).map_err(data),
        None => Ok(fallback),
    }
}

pub fn relay(args: RelayArgs) -> Outcome {
    let config = analysis_config(&args.estimator);
    config.validate().map_err(usage)?;
    let conv_cfg = relay_config(args.conventional.as_deref(), RelayConfig::conventional())?;
    let qss_cfg = relay_config(args.qss.as_deref(), RelayConfig::qss())?;
    let waveform = read_waveform(&args.input)?;
    let comparison = compare_schemes(&waveform, &config, &conv_cfg, &qss_cfg).map_err(data)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))
        .map_err(data)?;
    let conv_path = args.out_dir.join("conventional_trips.csv");
    let qss_path = args.out_dir.join("qss_trips.csv");
    write_to(Some(&conv_path), |out| write_trip_csv(&comparison.conventional.trips, out))?;
    write_to(Some(&qss_path), |out| write_trip_csv(&comparison.qss.trips, out))?;
    write_to(Some(&args.out_dir.join("comparison.csv")), |out| comparison.write_summary(out))?;
    write_to(None, |out| comparison.write_summary(out))
}

pub fn sweep_epsilon(args: SweepArgs) -> Outcome {
    let epsilons = log_space(args.eps_min, args.eps_max, args.points).map_err(usage)?;
    let waveform = read_waveform(&args.input)?;
    let chain = FrequencyChain::new(&waveform, &AnalysisConfig::default()).map_err(data)?;
    let points = experiments::sweep_epsilon(&chain, &epsilons, args.event_start).map_err(data)?;
    write_to(args.output.as_deref(), |out| {
        writeln!(out, "epsilon,delta_t_s,saturated")?;
        for p in &points {
            writeln!(out, "{},{},{}", p.epsilon, p.delta_t_s, p.saturated)?;
        }
        Ok(())
    })?;
    match plateau(&points, 0.5 / waveform.sample_rate_hz()) {
        Some((lo, hi)) => eprintln!("plateau: epsilon {lo:.3e} .. {hi:.3e} ({:.2} decades)", (hi / lo).log10()),
        None => eprintln!("plateau: none"),
    }
    Ok(())
}

pub fn recommend(args: RecommendArgs) -> Outcome {
    let config = AnalysisConfig {
        lookback_s: args.lookback_ms / 1000.0,
        ..AnalysisConfig::default()
    };
    config.validate().map_err(usage)?;
    let waveform = read_waveform(&args.input)?;
    let chain = FrequencyChain::new(&waveform, &config).map_err(data)?;
    let r = recommend_epsilon(&chain).map_err(data)?;
    if let Some(w) = &r.warning {
        eprintln!("warning: {w}");
    }
    println!("max_abs_gamma_prime={}", r.max_abs_gamma_prime);
    println!("epsilon={}", r.epsilon);
    Ok(())
}
