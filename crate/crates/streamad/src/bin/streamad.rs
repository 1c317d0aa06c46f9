//! Command-line front end: streaming runs from config files, ensemble-size
//! sweeps, combination studies, throughput benchmarks, hot-swap demos and
//! synthetic data generation.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use streamad::combiners::{LabelMethod, ScoreMethod, ScoreSeries};
use streamad::detectors::{DetectorKind, EnsembleConfig, NumericMode};
use streamad::error::{Error, Result};
use streamad::evaluation::{
    auc_roc, bench_detector, combo_study, sweep_ensemble, sweep_means,
};
use streamad::pipeline::{parse_content_spec, BuildOverrides, Pipeline, PipelineConfig};
use streamad::io::resolve_dataset;
use streamad::{gen_synthetic, write_csv, write_scores, DataStream};

#[derive(Parser)]
#[command(
    name = "streamad",
    about = "Streaming ensemble anomaly detection with hot-swappable pipelines",
    version
)]
struct Cli {
    /// Size of the rayon thread pool (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Pipeline description file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory searched for `<dataset>.csv` files named in the bindings.
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
    /// Calibration prefix length in samples.
    #[arg(long, default_value_t = 128)]
    calibration: usize,
    /// Contamination rate used for label thresholds and label AUC.
    #[arg(long, default_value_t = 0.1)]
    contamination: f64,
    /// Force Q16.16 fixed-point arithmetic in every detector slot.
    #[arg(long)]
    fixed_point: bool,
    /// Score slots of one sample on multiple threads.
    #[arg(long)]
    parallel: bool,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for per-channel score files (flat files, one score/line).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a pipeline from a config file and stream its datasets through it.
    Run(RunArgs),
    /// Evaluate one detector type over a grid of ensemble sizes and seeds.
    Sweep {
        /// Detector type: loda, rshash or xstream.
        #[arg(long)]
        detector: DetectorKind,
        /// Labeled dataset: CSV path or synthetic:n=..,d=..,c=..,seed=..
        #[arg(long)]
        data: String,
        /// Comma-separated ensemble sizes.
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20")]
        r: Vec<usize>,
        /// Comma-separated seeds; each (R, seed) cell runs independently.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 128)]
        calibration: usize,
    },
    /// Combine several detectors' outputs on one dataset at score and label
    /// level.
    Combo {
        /// Labeled dataset: CSV path or synthetic:n=..,d=..,c=..,seed=..
        #[arg(long)]
        data: String,
        /// Comma-separated detector specs, e.g. loda:r=35,rshash:r=25.
        #[arg(long, value_delimiter = ';', default_value = "loda;rshash;xstream")]
        detectors: Vec<String>,
        /// averaging, maximization, weighted or weighted-conventional.
        #[arg(long, default_value = "averaging")]
        score_method: String,
        /// or, voting.
        #[arg(long, default_value = "or")]
        label_method: String,
        /// Comma-separated weights for the weighted method.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.1)]
        contamination: f64,
        #[arg(long, default_value_t = 128)]
        calibration: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time the streaming phase of one detector configuration and report
    /// operation counts.
    Bench {
        #[arg(long)]
        detector: DetectorKind,
        /// Dataset: CSV path or synthetic:n=..,d=..,c=..,seed=..
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 10)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        fixed_point: bool,
        /// Run sub-detectors of each sample on the rayon pool.
        #[arg(long)]
        parallel: bool,
    },
    /// Run a pipeline, swap one slot's content mid-stream, and report the
    /// reconfiguration cost.
    SwapDemo {
        #[command(flatten)]
        run: RunArgs,
        /// Sample index at which the swap happens.
        #[arg(long)]
        at: usize,
        /// Slot to swap.
        #[arg(long)]
        slot: String,
        /// New content: identity, combiner:<method>, or
        /// <detector>:r=..,seed=..,window=..
        #[arg(long)]
        to: String,
    },
    /// Generate a labeled synthetic dataset CSV.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        contamination: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load_bound_streams(
    cfg: &PipelineConfig,
    data_dir: &Path,
) -> Result<HashMap<String, DataStream>> {
    let mut streams = HashMap::new();
    for reference in cfg.bindings.values() {
        if !streams.contains_key(reference) {
            let stream = resolve_dataset(reference, data_dir)?;
            streams.insert(reference.clone(), stream);
        }
    }
    Ok(streams)
}

fn build_pipeline(args: &RunArgs) -> Result<(Pipeline, HashMap<String, DataStream>)> {
    let cfg = PipelineConfig::from_path(&args.config)?;
    let streams = load_bound_streams(&cfg, &args.data_dir)?;
    let overrides = BuildOverrides {
        seed: args.seed,
        parallel: args.parallel.then_some(true),
        numeric: args.fixed_point.then_some(NumericMode::Fixed),
    };
    let pipeline = Pipeline::from_config(&cfg, &streams, overrides)?;
    let violations = pipeline.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidPipeline(
            violations
                .iter()
                .map(|v| format!("  - {v}"))
                .collect::<Vec<_>>()
                .join("\n"),
        ));
    }
    Ok((pipeline, streams))
}

fn report_channels(
    outputs: &std::collections::BTreeMap<String, Vec<f64>>,
    streams: &HashMap<String, DataStream>,
    pipeline: &Pipeline,
    contamination: f64,
    output_dir: Option<&Path>,
) -> Result<()> {
    // Ground truth per channel: if every bound stream shares identical
    // labels (single dataset or copies), AUC is reported per channel.
    let truths: Vec<Vec<u8>> = pipeline
        .bindings
        .values()
        .filter_map(|name| streams.get(name).and_then(|s| s.labels()))
        .collect();
    let shared_truth = match truths.first() {
        Some(first) if truths.iter().all(|t| t == first) => Some(first.clone()),
        _ => None,
    };
    if let Some(dir) = output_dir {
        std::fs::create_dir_all(dir)?;
    }
    for (channel, values) in outputs {
        let series = streamad::normalize(&ScoreSeries::new(channel.clone(), values.clone()))?;
        let labels = streamad::threshold_labels(&series, contamination)?;
        let flagged: usize = labels.values.iter().map(|&l| l as usize).sum();
        match &shared_truth {
            Some(truth) if truth.len() == values.len() => {
                let auc = auc_roc(values, truth)?;
                println!(
                    "channel {channel}: {} samples, {} flagged at c={contamination}, AUC {auc:.4}",
                    values.len(),
                    flagged
                );
            }
            _ => println!(
                "channel {channel}: {} samples, {} flagged at c={contamination}",
                values.len(),
                flagged
            ),
        }
        if let Some(dir) = output_dir {
            let path = dir.join(format!("{channel}.scores"));
            write_scores(&path, values)?;
            println!("  wrote {}", path.display());
        }
    }
    Ok(())
}

fn parse_detector_spec(spec: &str, dimension: usize, seed: u64) -> Result<EnsembleConfig> {
    match parse_content_spec(spec, dimension)? {
        streamad::SlotContent::Detector(det) => {
            let mut cfg = det.config().clone();
            if !spec.contains("seed=") {
                cfg.seed = seed;
            }
            Ok(cfg)
        }
        _ => Err(Error::Config(format!(
            "'{spec}' does not describe a detector"
        ))),
    }
}

fn parse_score_method_arg(name: &str) -> Result<ScoreMethod> {
    match name.to_ascii_lowercase().as_str() {
        "averaging" | "average" | "avg" => Ok(ScoreMethod::Averaging),
        "maximization" | "max" => Ok(ScoreMethod::Maximization),
        "weighted" => Ok(ScoreMethod::Weighted { conventional: false }),
        "weighted-conventional" => Ok(ScoreMethod::Weighted { conventional: true }),
        other => Err(Error::Config(format!("unknown score method '{other}'"))),
    }
}

fn parse_label_method_arg(name: &str) -> Result<LabelMethod> {
    match name.to_ascii_lowercase().as_str() {
        "or" => Ok(LabelMethod::Or),
        "voting" | "vote" => Ok(LabelMethod::Voting),
        other => Err(Error::Config(format!("unknown label method '{other}'"))),
    }
}

fn real_main(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Run(args) => {
            let (mut pipeline, streams) = build_pipeline(&args)?;
            pipeline.calibrate(&streams, args.calibration)?;
            let start = std::time::Instant::now();
            let outputs = pipeline.run(&streams)?;
            let elapsed = start.elapsed();
            println!(
                "pipeline: {} slots, {} channels, {:?} streaming, {} ops",
                pipeline.slots.len(),
                outputs.len(),
                elapsed,
                pipeline.ops_executed()
            );
            report_channels(
                &outputs,
                &streams,
                &pipeline,
                args.contamination,
                args.output.as_deref(),
            )?;
        }
        Command::Sweep {
            detector,
            data,
            r,
            seeds,
            calibration,
        } => {
            let stream = resolve_dataset(&data, Path::new("data"))?;
            let cells = sweep_ensemble(detector, &stream, &r, &seeds, calibration)?;
            println!("detector {detector:?} on {} ({} samples)", stream.name, stream.len());
            println!("{:>6} {:>6} {:>8}", "R", "seed", "AUC");
            for c in &cells {
                println!("{:>6} {:>6} {:>8.4}", c.r, c.seed, c.auc);
            }
            println!("mean AUC per R:");
            for (r, auc) in sweep_means(&cells) {
                println!("{r:>6}        {auc:>8.4}");
            }
        }
        Command::Combo {
            data,
            detectors,
            score_method,
            label_method,
            weights,
            contamination,
            calibration,
            seed,
        } => {
            let stream = resolve_dataset(&data, Path::new("data"))?;
            let truth = stream.labels().ok_or(Error::DegenerateGroundTruth)?;
            let mut series = Vec::new();
            for (i, spec) in detectors.iter().enumerate() {
                let mut cfg = parse_detector_spec(spec, stream.dimension, seed + i as u64)?;
                cfg.dimension = stream.dimension;
                let mut det = streamad::EnsembleDetector::new(cfg)?;
                let end = calibration.min(stream.len());
                det.calibrate(&stream.samples[..end])?;
                let raw = det.process_stream(&stream.samples)?;
                series.push(ScoreSeries::new(spec.clone(), raw));
            }
            let weights = weights
                .map(streamad::WeightVector::new)
                .transpose()?;
            let outcome = combo_study(
                &series,
                &truth,
                contamination,
                parse_score_method_arg(&score_method)?,
                parse_label_method_arg(&label_method)?,
                weights.as_ref(),
            )?;
            for (spec, auc) in detectors.iter().zip(&outcome.individual_auc) {
                println!("{spec:<30} AUC {auc:.4}");
            }
            println!(
                "combined scores ({score_method})    AUC {:.4}",
                outcome.auc_score
            );
            println!(
                "combined labels ({label_method}, c={contamination})  AUC {:.4}",
                outcome.auc_label
            );
        }
        Command::Bench {
            detector,
            data,
            r,
            seed,
            fixed_point,
            parallel,
        } => {
            let stream = resolve_dataset(&data, Path::new("data"))?;
            let mut cfg = EnsembleConfig::new(detector, stream.dimension);
            cfg.r = r;
            cfg.seed = seed;
            cfg.parallel = parallel;
            if fixed_point {
                cfg.mode = NumericMode::Fixed;
            }
            let report = bench_detector(cfg, &stream)?;
            println!(
                "{:?} R={} on {} samples ({}, {}): {:?}, {} ops, {:.3e} ops/s",
                report.kind,
                report.r,
                report.samples,
                if fixed_point { "fixed" } else { "real" },
                if report.parallel { "parallel" } else { "sequential" },
                report.elapsed,
                report.op_total,
                report.op_rate
            );
        }
        Command::SwapDemo { run, at, slot, to } => {
            let (mut pipeline, streams) = build_pipeline(&run)?;
            pipeline.calibrate(&streams, run.calibration)?;
            let n = pipeline.stream_len(&streams)?;
            if at > n {
                return Err(Error::InvalidParameter(format!(
                    "swap index {at} past stream length {n}"
                )));
            }
            let dimension = pipeline
                .bindings
                .get(&slot)
                .and_then(|name| streams.get(name))
                .map(|s| s.dimension)
                .unwrap_or(1);
            let mut content = parse_content_spec(&to, dimension)?;
            if let streamad::SlotContent::Detector(det) = &mut content {
                let end = run.calibration.min(n);
                let name = pipeline
                    .bindings
                    .get(&slot)
                    .ok_or_else(|| Error::UnknownSlot(slot.clone()))?;
                det.calibrate(&streams[name].samples[..end])?;
            }
            let mut outputs = pipeline.run_range(&streams, 0, at)?;
            let cost = pipeline.measure_swap_cost(&slot, content)?;
            let tail = pipeline.run_range(&streams, at, n)?;
            for (channel, values) in tail {
                outputs.entry(channel).or_default().extend(values);
            }
            println!("swapped slot '{slot}' to '{to}' at sample {at}: {cost:?}");
            report_channels(
                &outputs,
                &streams,
                &pipeline,
                run.contamination,
                run.output.as_deref(),
            )?;
        }
        Command::Gen {
            n,
            d,
            contamination,
            seed,
            output,
        } => {
            let stream = gen_synthetic(n, d, contamination, seed)?;
            write_csv(&stream, &output)?;
            println!(
                "wrote {} samples x {} features (contamination {contamination}, seed {seed}) to {}",
                n,
                d,
                output.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
