//! Evaluation: rank-based ROC-AUC, end-to-end detector evaluation,
//! ensemble-size sweeps, combination studies and throughput benchmarks.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::combiners::{
    combine_labels, combine_scores, normalize, threshold_labels, LabelMethod, LabelSeries,
    ScoreMethod, ScoreSeries, WeightVector,
};
use crate::data::DataStream;
use crate::detectors::{op_count, DetectorKind, EnsembleConfig, EnsembleDetector};
use crate::error::{Error, Result};

/// ROC-AUC via the Mann-Whitney rank statistic with average ranks, so each
/// tied positive/negative pair contributes exactly 0.5. Requires both
/// classes to be present.
pub fn auc_roc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptySeries);
    }
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::NonBinaryLabel(f64::from(bad)));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateGroundTruth);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .expect("finite scores")
    });

    // Average rank within each tie group (1-based ranks).
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let np = positives as f64;
    let nn = negatives as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Result of running one detector over one labeled stream.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub detector: DetectorKind,
    pub r: usize,
    pub samples: usize,
    /// AUC of the continuous (normalized) scores against ground truth.
    pub auc_score: f64,
    /// AUC of the binarized labels at the given contamination rate.
    pub auc_label: f64,
    /// Streaming phase only; excludes data loading and calibration.
    pub execution_time: Duration,
    /// Analytic operation total for the streaming phase.
    pub op_total: u64,
    /// Operations per second.
    pub op_rate: f64,
    pub scores: ScoreSeries,
    pub labels: LabelSeries,
}

/// Calibrate on the first `calibration_len` samples, stream every sample,
/// then score against ground truth. The timed region covers streaming only.
pub fn evaluate_detector(
    detector: &mut EnsembleDetector,
    stream: &DataStream,
    calibration_len: usize,
    contamination: f64,
) -> Result<EvalReport> {
    let truth = stream.labels().ok_or(Error::DegenerateGroundTruth)?;
    let end = calibration_len.min(stream.len());
    detector.calibrate(&stream.samples[..end])?;

    let start = Instant::now();
    let raw = detector.process_stream(&stream.samples)?;
    let execution_time = start.elapsed();

    let cfg = detector.config();
    let op_total = op_count(
        cfg.kind,
        stream.len() as u64,
        cfg.r as u64,
        cfg.dimension as u64,
        cfg.cms_rows as u64,
        cfg.k as u64,
    )?;
    let op_rate = op_total as f64 / execution_time.as_secs_f64().max(1e-12);

    let scores = normalize(&ScoreSeries::new(stream.name.clone(), raw))?;
    let labels = threshold_labels(&scores, contamination)?;
    let auc_score = auc_roc(&scores.values, &truth)?;
    let auc_label = auc_roc(
        &labels.values.iter().map(|&l| f64::from(l)).collect::<Vec<_>>(),
        &truth,
    )?;
    Ok(EvalReport {
        detector: cfg.kind,
        r: cfg.r,
        samples: stream.len(),
        auc_score,
        auc_label,
        execution_time,
        op_total,
        op_rate,
        scores,
        labels,
    })
}

/// One cell of an ensemble-size sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub kind: DetectorKind,
    pub r: usize,
    pub seed: u64,
    pub auc: f64,
}

/// Evaluate `kind` on `stream` for every (R, seed) pair. Cells are
/// independent, so they run on the rayon pool; the result order is the
/// deterministic (r, seed) grid order regardless of scheduling.
pub fn sweep_ensemble(
    kind: DetectorKind,
    stream: &DataStream,
    rs: &[usize],
    seeds: &[u64],
    calibration_len: usize,
) -> Result<Vec<SweepCell>> {
    let truth = stream.labels().ok_or(Error::DegenerateGroundTruth)?;
    let cells: Vec<(usize, u64)> = rs
        .iter()
        .flat_map(|&r| seeds.iter().map(move |&s| (r, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(r, seed)| {
            let mut cfg = EnsembleConfig::new(kind, stream.dimension);
            cfg.r = r;
            cfg.seed = seed;
            let mut det = EnsembleDetector::new(cfg)?;
            let end = calibration_len.min(stream.len());
            det.calibrate(&stream.samples[..end])?;
            let raw = det.process_stream(&stream.samples)?;
            let auc = auc_roc(&raw, &truth)?;
            Ok(SweepCell { kind, r, seed, auc })
        })
        .collect()
}

/// Mean AUC per R over the sweep's seeds, in ascending R order.
pub fn sweep_means(cells: &[SweepCell]) -> Vec<(usize, f64)> {
    let mut rs: Vec<usize> = cells.iter().map(|c| c.r).collect();
    rs.sort_unstable();
    rs.dedup();
    rs.into_iter()
        .map(|r| {
            let vals: Vec<f64> = cells.iter().filter(|c| c.r == r).map(|c| c.auc).collect();
            (r, vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect()
}

/// Outcome of combining several detectors' outputs on one labeled stream.
#[derive(Debug, Clone)]
pub struct ComboOutcome {
    /// Per-input score AUCs, in input order.
    pub individual_auc: Vec<f64>,
    /// AUC of the combined continuous score.
    pub auc_score: f64,
    /// AUC of the combined binary labels.
    pub auc_label: f64,
}

/// Score-level and label-level combination study: each raw series is
/// min-max normalized, the normalized series are combined with
/// `score_method` for the score AUC, and each is thresholded at
/// `contamination` then merged with `label_method` for the label AUC.
pub fn combo_study(
    raw_series: &[ScoreSeries],
    truth: &[u8],
    contamination: f64,
    score_method: ScoreMethod,
    label_method: LabelMethod,
    weights: Option<&WeightVector>,
) -> Result<ComboOutcome> {
    if raw_series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let normalized: Vec<ScoreSeries> = raw_series
        .iter()
        .map(normalize)
        .collect::<Result<Vec<_>>>()?;
    let individual_auc = normalized
        .iter()
        .map(|s| auc_roc(&s.values, truth))
        .collect::<Result<Vec<_>>>()?;
    let combined = combine_scores(score_method, &normalized, weights)?;
    let auc_score = auc_roc(&combined.values, truth)?;

    let labelled: Vec<LabelSeries> = normalized
        .iter()
        .map(|s| threshold_labels(s, contamination))
        .collect::<Result<Vec<_>>>()?;
    let merged = combine_labels(label_method, &labelled)?;
    let auc_label = auc_roc(
        &merged.values.iter().map(|&l| f64::from(l)).collect::<Vec<_>>(),
        truth,
    )?;
    Ok(ComboOutcome {
        individual_auc,
        auc_score,
        auc_label,
    })
}

/// Throughput measurement for one detector configuration.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub kind: DetectorKind,
    pub r: usize,
    pub samples: usize,
    pub parallel: bool,
    /// Streaming phase only.
    pub elapsed: Duration,
    /// Analytic formula total, cross-checked against the instrumented
    /// counters.
    pub op_total: u64,
    pub op_rate: f64,
}

/// Time the streaming phase of one configuration over `stream`. The
/// instrumented per-loop counters must reproduce the analytic total; a
/// divergence is reported as an error rather than silently averaged away.
pub fn bench_detector(mut config: EnsembleConfig, stream: &DataStream) -> Result<BenchReport> {
    config.dimension = stream.dimension;
    let parallel = config.parallel;
    let mut det = EnsembleDetector::new(config)?;
    let end = det.config().window.min(stream.len());
    det.calibrate(&stream.samples[..end])?;

    let start = Instant::now();
    det.process_stream(&stream.samples)?;
    let elapsed = start.elapsed();

    let cfg = det.config();
    let op_total = op_count(
        cfg.kind,
        stream.len() as u64,
        cfg.r as u64,
        cfg.dimension as u64,
        cfg.cms_rows as u64,
        cfg.k as u64,
    )?;
    let executed = det.ops_executed();
    if executed != op_total {
        return Err(Error::InvalidParameter(format!(
            "instrumented op count {executed} disagrees with formula {op_total}"
        )));
    }
    Ok(BenchReport {
        kind: cfg.kind,
        r: cfg.r,
        samples: stream.len(),
        parallel,
        elapsed,
        op_total,
        op_rate: op_total as f64 / elapsed.as_secs_f64().max(1e-12),
    })
}
