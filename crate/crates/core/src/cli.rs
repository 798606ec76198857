//! `harmgap` command line: `synth`, `estimate` and `bench`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 estimation failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{
    run_monte_carlo_with_threads, scenario_4a_with, scenario_4b_with, scenario_4c_with, Scenario,
    SegmentCounts, DEFAULT_DRIFT, DEFAULT_RUNS,
};
use crate::io::{load_segments, save_report, save_result, save_signal, Provenance, ResultDocument};
use crate::pencil::{
    gmpa_estimate, OrderSelection, PencilConfig, SubspaceSource, DEFAULT_TOL_RANK,
};
use crate::signal::{add_noise, synthesize, ComponentParams, HarmonicModel, SegmentedSignal};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_ESTIMATION: i32 = 3;

/// Environment variable capping `bench` parallelism.
pub const THREADS_ENV: &str = "HARMGAP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "harmgap",
    version,
    about = "Matrix pencil estimation for gapped signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a segmented signal CSV.
    Synth(SynthArgs),
    /// Estimate poles and amplitudes from a signal CSV.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo SNR sweep and write an RMSE report CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioName {
    #[value(name = "4a")]
    A,
    #[value(name = "4b")]
    B,
    #[value(name = "4c")]
    C,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchScenario {
    #[value(name = "4a")]
    A,
    #[value(name = "4b")]
    B,
    #[value(name = "4c")]
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SubspaceArg {
    Hankel,
    StackedPair,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    /// Segment-2 drift for scenario 4b, seconds.
    #[arg(long, default_value_t = DEFAULT_DRIFT, allow_negative_numbers = true)]
    delta_t: f64,
    /// Use the 80/111/61 split (drops the last sample) instead of 80/111/62.
    #[arg(long)]
    stated_counts: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioName,
    /// JSON model/segment description, required for `custom`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Add noise at this SNR; omitted means noiseless.
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("model_order").required(true).args(["order", "auto_order"])))]
struct EstimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Model order N.
    #[arg(long)]
    order: Option<usize>,
    /// Select the order from the singular values with this ratio threshold.
    #[arg(long)]
    auto_order: Option<f64>,
    /// Pencil parameter p; defaults to floor(K_min / 2).
    #[arg(long)]
    pencil: Option<usize>,
    #[arg(long, value_enum, default_value = "hankel")]
    subspace: SubspaceArg,
    #[arg(long, default_value_t = DEFAULT_TOL_RANK)]
    tol_rank: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    scenario: BenchScenario,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_negative_numbers = true)]
    snr_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    snr_max: Option<f64>,
    #[arg(long)]
    snr_step: Option<f64>,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Worker threads; overrides HARMGAP_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Deserialize)]
struct CustomComponent {
    #[serde(default = "one")]
    amplitude_re: f64,
    #[serde(default)]
    amplitude_im: f64,
    #[serde(default)]
    damping: f64,
    frequency_hz: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
struct CustomSegment {
    start_time: f64,
    length: usize,
}

/// Model and geometry for `synth --scenario custom`.
#[derive(Debug, Deserialize)]
struct CustomConfig {
    dt: f64,
    components: Vec<CustomComponent>,
    segments: Vec<CustomSegment>,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::PencilBound { .. } | Error::SegmentTooShort { .. } => {
            EXIT_USAGE
        }
        Error::Format(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_DATA,
        Error::RankDeficient { .. } | Error::ZeroSignal | Error::DegeneratePole => EXIT_ESTIMATION,
    }
}

fn geometry_counts(g: &GeometryArgs) -> SegmentCounts {
    if g.stated_counts {
        SegmentCounts::Stated
    } else {
        SegmentCounts::Arithmetic
    }
}

fn bench_scenario(which: BenchScenario, g: &GeometryArgs) -> Scenario {
    let counts = geometry_counts(g);
    match which {
        BenchScenario::A => scenario_4a_with(counts),
        BenchScenario::B => scenario_4b_with(g.delta_t, counts),
        BenchScenario::C => scenario_4c_with(counts),
    }
}

fn custom_signal(path: &PathBuf) -> Result<SegmentedSignal> {
    let cfg: CustomConfig = serde_json::from_reader(std::fs::File::open(path)?)?;
    let model = HarmonicModel::new(
        cfg.components
            .iter()
            .map(|c| {
                ComponentParams::from_hz(
                    Complex64::new(c.amplitude_re, c.amplitude_im),
                    c.damping,
                    c.frequency_hz,
                )
            })
            .collect(),
    )?;
    let specs: Vec<(f64, usize)> = cfg
        .segments
        .iter()
        .map(|s| (s.start_time, s.length))
        .collect();
    synthesize(&model, cfg.dt, &specs)
}

fn synth(args: SynthArgs) -> Result<()> {
    let clean = match args.scenario {
        ScenarioName::Custom => {
            let path = args
                .config
                .as_ref()
                .ok_or_else(|| Error::invalid("--scenario custom needs --config"))?;
            custom_signal(path)?
        }
        other => {
            if args.config.is_some() {
                return Err(Error::invalid("--config only applies to --scenario custom"));
            }
            let which = match other {
                ScenarioName::A => BenchScenario::A,
                ScenarioName::B => BenchScenario::B,
                _ => BenchScenario::C,
            };
            bench_scenario(which, &args.geometry).clean_signal()?
        }
    };
    let signal = match args.snr_db {
        Some(snr) if snr.is_nan() => return Err(Error::invalid("--snr-db is NaN")),
        Some(snr) => add_noise(&clean, snr, args.seed),
        None => clean,
    };
    save_signal(&signal, &args.out)?;
    eprintln!(
        "wrote {} segments, {} samples to {}",
        signal.num_segments(),
        signal.total_samples(),
        args.out.display()
    );
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let signal = load_segments(&args.input)?;
    let order = match (args.order, args.auto_order) {
        (Some(n), None) => OrderSelection::Fixed(n),
        (None, Some(ratio)) => OrderSelection::Auto { ratio },
        _ => {
            return Err(Error::invalid(
                "give exactly one of --order and --auto-order",
            ))
        }
    };
    let cfg = PencilConfig {
        pencil: args.pencil,
        order,
        tol_rank: args.tol_rank,
        subspace: match args.subspace {
            SubspaceArg::Hankel => SubspaceSource::Hankel,
            SubspaceArg::StackedPair => SubspaceSource::StackedPair,
        },
    };
    let result = gmpa_estimate(&signal, &cfg)?;
    for w in &result.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    let doc = ResultDocument::new(
        &result,
        &signal,
        &cfg,
        Provenance {
            input: Some(args.input.display().to_string()),
            seed: None,
        },
    );
    save_result(&doc, &args.out)?;
    for (f, d) in result.frequencies.iter().zip(&result.dampings) {
        println!("{f:.10} Hz  damping {d:.6e} 1/s");
    }
    Ok(())
}

fn snr_grid(args: &BenchArgs, default: &[f64]) -> Result<Vec<f64>> {
    if args.snr_min.is_none() && args.snr_max.is_none() && args.snr_step.is_none() {
        return Ok(default.to_vec());
    }
    let min = args.snr_min.unwrap_or(default[0]);
    let max = args.snr_max.unwrap_or(default[default.len() - 1]);
    let step = args.snr_step.unwrap_or(2.0);
    if !(min.is_finite() && max.is_finite() && step.is_finite() && step > 0.0 && max >= min) {
        return Err(Error::invalid(format!(
            "bad SNR range {min}..{max} step {step}"
        )));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| min + i as f64 * step).collect())
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::invalid(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        _ => Ok(None),
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let base = bench_scenario(args.scenario, &args.geometry);
    let grid = snr_grid(&args, &base.snr_grid)?;
    let scenario = base
        .with_runs(args.runs)
        .with_seed(args.seed)
        .with_snr_grid(grid);
    let report = run_monte_carlo_with_threads(&scenario, thread_count(args.threads)?)?;
    save_report(&report, &args.out)?;
    eprintln!(
        "scenario {}: {} rows, {} runs per SNR, seed {} -> {}",
        report.scenario,
        report.rows.len(),
        scenario.runs,
        scenario.seed,
        args.out.display()
    );
    Ok(())
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Estimate(a) => estimate(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench_args(min: Option<f64>, max: Option<f64>, step: Option<f64>) -> BenchArgs {
        BenchArgs {
            scenario: BenchScenario::A,
            runs: 1,
            seed: 0,
            snr_min: min,
            snr_max: max,
            snr_step: step,
            geometry: GeometryArgs {
                delta_t: DEFAULT_DRIFT,
                stated_counts: false,
            },
            threads: None,
            out: PathBuf::from("x.csv"),
        }
    }

    #[test]
    fn snr_grid_from_flags() {
        let d = [-10.0, 20.0];
        assert_eq!(
            snr_grid(&bench_args(None, None, None), &d).unwrap(),
            vec![-10.0, 20.0]
        );
        assert_eq!(
            snr_grid(&bench_args(Some(-4.0), Some(2.0), Some(3.0)), &d).unwrap(),
            vec![-4.0, -1.0, 2.0]
        );
        assert_eq!(
            snr_grid(&bench_args(Some(0.0), Some(1.0), Some(0.1)), &d)
                .unwrap()
                .len(),
            11
        );
        assert!(snr_grid(&bench_args(Some(5.0), Some(1.0), None), &d).is_err());
        assert!(snr_grid(&bench_args(None, None, Some(0.0)), &d).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::invalid("x")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Format("x".into())), EXIT_DATA);
        assert_eq!(exit_code(&Error::ZeroSignal), EXIT_ESTIMATION);
    }

    #[test]
    fn drift_scenario_geometry() {
        let g = GeometryArgs {
            delta_t: 0.002,
            stated_counts: true,
        };
        let s = bench_scenario(BenchScenario::B, &g);
        let spec = s.effective_specs();
        assert!((spec[1].0 - 0.992).abs() < 1e-15);
        assert_eq!(spec[2].1, 61);
        let c = bench_scenario(BenchScenario::C, &g);
        assert_eq!(c.segment_specs[2].1, 61);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["harmgap"]), EXIT_USAGE);
        assert_eq!(
            run(["harmgap", "estimate", "--in", "x.csv", "--out", "y.json"]),
            EXIT_USAGE
        );
        assert_eq!(
            run(["harmgap", "bench", "--scenario", "9z", "--out", "r.csv"]),
            EXIT_USAGE
        );
        assert_eq!(run(["harmgap", "--version"]), EXIT_OK);
    }
}
