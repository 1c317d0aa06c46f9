//! The three streaming ensemble detectors, each decomposed into
//! projection / core / sliding-window / score blocks behind one streaming
//! contract.
//!
//! Scores follow the negative log-likelihood convention throughout: higher
//! means more anomalous.
//!
//! # Operation counting policy
//!
//! Each sub-detector keeps an operation counter incremented inside its
//! processing loops. The policy charges, per processed sample:
//!
//! * Loda: 2 ops per dimension (multiply + accumulate), plus 7 per
//!   sub-detector (shift into bin range, scale, clamp, window read, window
//!   update, log, score accumulate), plus 2 per sample (ensemble divide and
//!   emit).
//! * RS-Hash: 4 ops per dimension (shift, scale, alpha add, divide by f),
//!   5 ops per (row, dimension) for the hash inner loop, 11 per row (hash
//!   init, 6 finalisation steps, modulo, window read, window update, running
//!   min), 1 per sub-detector (log), plus 2 per sample.
//! * xStream: 2 ops per (dimension, k) for the projection, 5 ops per
//!   (row, dimension) for the hash (the model charges the hash to the input
//!   dimensions), 15 per row (hash init, 6 finalisation steps, modulo,
//!   window read, window update, log, row offset add, running min, and 2 for
//!   the multi-scale flooring), 2 per sub-detector (negate, accumulate),
//!   plus 2 per sample.
//!
//! [`op_count`] evaluates the closed-form totals for the same policy.

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::hashing::{jenkins_hash, SlidingCountTable};
use crate::num::{sub_seed, Q16_16, SeededRng};

/// Streaming detector contract: one sample in, one raw anomaly score out.
pub trait Detector {
    fn dimension(&self) -> usize;
    fn process(&mut self, features: &[f64]) -> Result<f64>;
    fn reset(&mut self);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Loda,
    RsHash,
    XStream,
}

impl DetectorKind {
    /// Default per-slot sub-detector budget.
    pub fn default_capacity(self) -> usize {
        match self {
            DetectorKind::Loda => 35,
            DetectorKind::RsHash => 25,
            DetectorKind::XStream => 20,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Loda => "loda",
            DetectorKind::RsHash => "rshash",
            DetectorKind::XStream => "xstream",
        }
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "loda" => Ok(DetectorKind::Loda),
            "rshash" | "rs-hash" => Ok(DetectorKind::RsHash),
            "xstream" => Ok(DetectorKind::XStream),
            other => Err(Error::UnknownDetector(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericMode {
    Real,
    Fixed,
}

/// Construction parameters for an [`EnsembleDetector`].
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub kind: DetectorKind,
    pub dimension: usize,
    /// Ensemble size R.
    pub r: usize,
    /// Sliding-window length W.
    pub window: usize,
    /// Histogram bin count (Loda); also the divisor for the xStream bin
    /// width at calibration.
    pub bins: usize,
    /// CMS hash rows w.
    pub cms_rows: usize,
    /// CMS column count.
    pub cms_mod: usize,
    /// Projection size K (xStream).
    pub k: usize,
    pub seed: u64,
    /// Offset added to the sub-detector index before seed derivation, so a
    /// slot-partitioned ensemble can reproduce the sub-seeds of a monolithic
    /// one.
    pub seed_offset: u64,
    pub mode: NumericMode,
    pub parallel: bool,
}

impl EnsembleConfig {
    pub fn new(kind: DetectorKind, dimension: usize) -> Self {
        let (cms_rows, cms_mod, k) = match kind {
            DetectorKind::Loda => (1, 128, 1),
            DetectorKind::RsHash => (2, 128, 1),
            DetectorKind::XStream => (2, 128, 20),
        };
        EnsembleConfig {
            kind,
            dimension,
            r: kind.default_capacity(),
            window: 128,
            bins: 20,
            cms_rows,
            cms_mod,
            k,
            seed: 0,
            seed_offset: 0,
            mode: NumericMode::Real,
            parallel: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0
            || self.r == 0
            || self.window == 0
            || self.bins < 2
            || self.cms_rows == 0
            || self.cms_mod == 0
            || self.k == 0
        {
            return Err(Error::InvalidParameter(format!(
                "bad ensemble configuration: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Group a flat scalar stream into d-dimensional samples in arrival order.
/// Returns the samples and the number of trailing scalars dropped.
pub fn windower(scalars: &[f64], d: usize) -> Result<(Vec<Sample>, usize)> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let complete = scalars.len() / d;
    let dropped = scalars.len() - complete * d;
    let samples = scalars[..complete * d]
        .chunks_exact(d)
        .map(|c| Sample::unlabeled(c.to_vec()))
        .collect();
    Ok((samples, dropped))
}

/// Closed-form operation totals for the counting policy documented at module
/// level. `w` and `k` are ignored where a detector has no such parameter.
pub fn op_count(kind: DetectorKind, n: u64, r: u64, d: u64, w: u64, k: u64) -> Result<u64> {
    if n == 0 || r == 0 || d == 0 || w == 0 || k == 0 {
        return Err(Error::InvalidParameter(
            "op_count arguments must all be >= 1".into(),
        ));
    }
    Ok(match kind {
        DetectorKind::Loda => n * (2 * r * d + 7 * r + 2),
        DetectorKind::RsHash => n * (5 * r * d * w + 4 * r * d + 11 * r * w + r + 2),
        DetectorKind::XStream => n * (2 * r * d * k + 5 * r * d * w + 15 * r * w + 2 * r + 2),
    })
}

fn clamp_to_i32(v: f64) -> i32 {
    if v.is_nan() {
        0
    } else if v >= i32::MAX as f64 {
        i32::MAX
    } else if v <= i32::MIN as f64 {
        i32::MIN
    } else {
        v as i32
    }
}

/// Widen a [min, max] range by a 5% margin, guaranteeing max > min even for
/// degenerate (constant) inputs.
fn widen(min: f64, max: f64) -> (f64, f64) {
    let mut margin = 0.05 * (max - min);
    if margin <= 0.0 {
        margin = 0.5;
    }
    (min - margin, max + margin)
}

#[derive(Debug, Clone)]
struct LodaCal {
    min: f64,
    /// bins / (max - min)
    scale: f64,
    q_min: Q16_16,
    q_scale: Q16_16,
}

#[derive(Debug, Clone)]
struct LodaSub {
    prj: Vec<f64>,
    q_prj: Vec<Q16_16>,
    cal: Option<LodaCal>,
    bins: usize,
    table: SlidingCountTable,
    ops: u64,
}

impl LodaSub {
    fn new(seed: u64, cfg: &EnsembleConfig) -> Result<Self> {
        let mut rng = SeededRng::new(seed);
        let prj: Vec<f64> = (0..cfg.dimension).map(|_| rng.normal()).collect();
        let q_prj = prj.iter().map(|&p| Q16_16::from_real(p)).collect();
        Ok(LodaSub {
            prj,
            q_prj,
            cal: None,
            bins: cfg.bins,
            table: SlidingCountTable::new(1, cfg.bins, cfg.window)?,
            ops: 0,
        })
    }

    fn project(&self, features: &[f64]) -> f64 {
        self.prj
            .iter()
            .zip(features)
            .map(|(p, x)| p * x)
            .sum::<f64>()
    }

    fn calibrate(&mut self, prefix: &[Sample]) {
        let projected: Vec<f64> = prefix.iter().map(|s| self.project(&s.features)).collect();
        let min = projected.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = projected.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (min, max) = widen(min, max);
        let scale = self.bins as f64 / (max - min);
        self.cal = Some(LodaCal {
            min,
            scale,
            q_min: Q16_16::from_real(min),
            q_scale: Q16_16::from_real(scale),
        });
    }

    fn process(&mut self, features: &[f64], mode: NumericMode) -> Result<f64> {
        let cal = self.cal.as_ref().ok_or(Error::Uncalibrated)?;
        let idx = match mode {
            NumericMode::Real => {
                let p = self.project(features);
                ((p - cal.min) * cal.scale).floor() as i64
            }
            NumericMode::Fixed => {
                let mut p = Q16_16::ZERO;
                for (qp, &x) in self.q_prj.iter().zip(features) {
                    p = p.add(qp.mul(Q16_16::from_real(x)));
                }
                i64::from(p.sub(cal.q_min).mul(cal.q_scale).floor_int())
            }
        };
        let idx = idx.clamp(0, self.bins as i64 - 1) as usize;
        let c = self.table.admit(&[idx])?[0];
        // Occupancy of the window the count was read against.
        let occ = self.table.occupancy() - 1;
        self.ops += 2 * self.prj.len() as u64 + 7;
        Ok(((occ + 1) as f64).log2() - (f64::from(c) + 1.0).log2())
    }
}

#[derive(Debug, Clone)]
struct RsHashCal {
    min: Vec<f64>,
    inv_range: Vec<f64>,
    q_min: Vec<Q16_16>,
    q_inv_range: Vec<Q16_16>,
}

#[derive(Debug, Clone)]
struct RsHashSub {
    alpha: Vec<f64>,
    f: f64,
    q_alpha: Vec<Q16_16>,
    q_f: Q16_16,
    cal: Option<RsHashCal>,
    modulus: usize,
    table: SlidingCountTable,
    ops: u64,
}

impl RsHashSub {
    fn new(seed: u64, cfg: &EnsembleConfig) -> Result<Self> {
        let mut rng = SeededRng::new(seed);
        let lo = 1.0 / (cfg.window as f64).sqrt();
        let f = rng.uniform_range(lo, 1.0 - lo);
        let alpha: Vec<f64> = (0..cfg.dimension)
            .map(|_| rng.uniform_range(0.0, f))
            .collect();
        let q_alpha = alpha.iter().map(|&a| Q16_16::from_real(a)).collect();
        Ok(RsHashSub {
            alpha,
            f,
            q_alpha,
            q_f: Q16_16::from_real(f),
            cal: None,
            modulus: cfg.cms_mod,
            table: SlidingCountTable::new(cfg.cms_rows, cfg.cms_mod, cfg.window)?,
            ops: 0,
        })
    }

    fn set_bounds(&mut self, min: &[f64], max: &[f64]) {
        let mut inv_range = Vec::with_capacity(min.len());
        for (&lo, &hi) in min.iter().zip(max) {
            inv_range.push(1.0 / (hi - lo));
        }
        self.cal = Some(RsHashCal {
            q_min: min.iter().map(|&v| Q16_16::from_real(v)).collect(),
            q_inv_range: inv_range.iter().map(|&v| Q16_16::from_real(v)).collect(),
            min: min.to_vec(),
            inv_range,
        });
    }

    fn process(&mut self, features: &[f64], mode: NumericMode) -> Result<f64> {
        let cal = self.cal.as_ref().ok_or(Error::Uncalibrated)?;
        let d = features.len();
        let mut key = Vec::with_capacity(d);
        match mode {
            NumericMode::Real => {
                for (dim, &x) in features.iter().enumerate() {
                    let norm = ((x - cal.min[dim]) * cal.inv_range[dim]).clamp(0.0, 1.0);
                    key.push(clamp_to_i32(((norm + self.alpha[dim]) / self.f).floor()));
                }
            }
            NumericMode::Fixed => {
                for (dim, &x) in features.iter().enumerate() {
                    let norm = Q16_16::from_real(x)
                        .sub(cal.q_min[dim])
                        .mul(cal.q_inv_range[dim])
                        .clamp(Q16_16::ZERO, Q16_16::ONE);
                    key.push(norm.add(self.q_alpha[dim]).div(self.q_f).floor_int());
                }
            }
        }
        self.ops += 4 * d as u64;
        let rows = self.table.rows();
        let mut cols = Vec::with_capacity(rows);
        for row in 1..=rows {
            let code = jenkins_hash(&key, row as u32)?;
            cols.push((code % self.modulus as u32) as usize);
            self.ops += 5 * d as u64 + 11;
        }
        let before = self.table.admit(&cols)?;
        let min_count = before.iter().copied().min().unwrap_or(0);
        self.ops += 1;
        Ok(-((1.0 + f64::from(min_count)).log2()))
    }
}

#[derive(Debug, Clone)]
struct XStreamSub {
    /// prj[k][dim]
    prj: Vec<Vec<f64>>,
    q_prj: Vec<Vec<Q16_16>>,
    /// Per-projected-dimension bin-boundary shift fractions in [0, 1).
    /// Without a random shift the floor boundary at zero would bisect a
    /// zero-centered cloud in every projected dimension.
    shift: Vec<f64>,
    delta: f64,
    modulus: usize,
    table: SlidingCountTable,
    ops: u64,
}

impl XStreamSub {
    fn new(seed: u64, cfg: &EnsembleConfig) -> Result<Self> {
        let mut rng = SeededRng::new(seed);
        let prj: Vec<Vec<f64>> = (0..cfg.k)
            .map(|_| (0..cfg.dimension).map(|_| rng.normal()).collect())
            .collect();
        let q_prj = prj
            .iter()
            .map(|row| row.iter().map(|&p| Q16_16::from_real(p)).collect())
            .collect();
        let shift = (0..cfg.k).map(|_| rng.uniform()).collect();
        Ok(XStreamSub {
            prj,
            q_prj,
            shift,
            delta: 1.0,
            modulus: cfg.cms_mod,
            table: SlidingCountTable::new(cfg.cms_rows, cfg.cms_mod, cfg.window)?,
            ops: 0,
        })
    }

    fn project(&self, features: &[f64]) -> Vec<f64> {
        self.prj
            .iter()
            .map(|row| row.iter().zip(features).map(|(p, x)| p * x).sum())
            .collect()
    }

    fn calibrate(&mut self, prefix: &[Sample]) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for s in prefix {
            for v in self.project(&s.features) {
                min = min.min(v);
                max = max.max(v);
            }
        }
        // Level-1 bin width spans the calibrated projected range; each
        // subsequent row halves it (half-space-chain style multi-scale
        // bins). Dividing the range into many level-1 bins would make the
        // shallow 2-level chain score almost every sample as novel.
        let delta = max - min;
        self.delta = if delta > 0.0 { delta } else { 1.0 };
    }

    fn process(&mut self, features: &[f64], mode: NumericMode) -> Result<f64> {
        let d = features.len();
        let k = self.prj.len();
        let rows = self.table.rows();
        let mut cols = Vec::with_capacity(rows);
        match mode {
            NumericMode::Real => {
                let p = self.project(features);
                for row in 1..=rows {
                    // Bin width halves per row: multi-scale levels.
                    let delta_row = self.delta / f64::powi(2.0, row as i32 - 1);
                    let key: Vec<i32> = p
                        .iter()
                        .zip(&self.shift)
                        .map(|(&v, &s)| clamp_to_i32((v / delta_row + s).floor()))
                        .collect();
                    let code = jenkins_hash(&key, row as u32)?;
                    cols.push((code % self.modulus as u32) as usize);
                }
            }
            NumericMode::Fixed => {
                let qx: Vec<Q16_16> = features.iter().map(|&x| Q16_16::from_real(x)).collect();
                let p: Vec<Q16_16> = self
                    .q_prj
                    .iter()
                    .map(|row| {
                        let mut acc = Q16_16::ZERO;
                        for (qp, x) in row.iter().zip(&qx) {
                            acc = acc.add(qp.mul(*x));
                        }
                        acc
                    })
                    .collect();
                for row in 1..=rows {
                    let delta_row =
                        Q16_16::from_real(self.delta / f64::powi(2.0, row as i32 - 1));
                    let key: Vec<i32> = p
                        .iter()
                        .zip(&self.shift)
                        .map(|(&v, &s)| {
                            v.div(delta_row).add(Q16_16::from_real(s)).floor_int()
                        })
                        .collect();
                    let code = jenkins_hash(&key, row as u32)?;
                    cols.push((code % self.modulus as u32) as usize);
                }
            }
        }
        let before = self.table.admit(&cols)?;
        let mut min_score = f64::INFINITY;
        for (row, &c) in before.iter().enumerate() {
            let row_score = (1.0 + f64::from(c)).log2() + (row + 1) as f64;
            min_score = min_score.min(row_score);
        }
        self.ops += 2 * (d * k) as u64 + rows as u64 * (5 * d as u64 + 15) + 2;
        Ok(-min_score)
    }
}

#[derive(Debug, Clone)]
enum SubDetector {
    Loda(LodaSub),
    RsHash(RsHashSub),
    XStream(XStreamSub),
}

impl SubDetector {
    fn process(&mut self, features: &[f64], mode: NumericMode) -> Result<f64> {
        match self {
            SubDetector::Loda(s) => s.process(features, mode),
            SubDetector::RsHash(s) => s.process(features, mode),
            SubDetector::XStream(s) => s.process(features, mode),
        }
    }

    fn ops(&self) -> u64 {
        match self {
            SubDetector::Loda(s) => s.ops,
            SubDetector::RsHash(s) => s.ops,
            SubDetector::XStream(s) => s.ops,
        }
    }

    fn reset(&mut self) {
        match self {
            SubDetector::Loda(s) => {
                s.table.reset();
                s.ops = 0;
            }
            SubDetector::RsHash(s) => {
                s.table.reset();
                s.ops = 0;
            }
            SubDetector::XStream(s) => {
                s.table.reset();
                s.ops = 0;
            }
        }
    }
}

/// R independently seeded sub-detectors reduced by score averaging.
#[derive(Debug, Clone)]
pub struct EnsembleDetector {
    config: EnsembleConfig,
    subs: Vec<SubDetector>,
    samples_processed: u64,
    calibrated: bool,
}

impl EnsembleDetector {
    pub fn new(config: EnsembleConfig) -> Result<Self> {
        let seeds: Vec<u64> = (0..config.r)
            .map(|r| sub_seed(config.seed, config.seed_offset + r as u64))
            .collect();
        Self::with_sub_seeds(config, &seeds)
    }

    /// Build with explicit per-sub-detector seeds. Used by tests and by
    /// slot-partitioned pipelines that must match a monolithic ensemble.
    pub fn with_sub_seeds(config: EnsembleConfig, seeds: &[u64]) -> Result<Self> {
        config.validate()?;
        if seeds.len() != config.r {
            return Err(Error::InvalidParameter(format!(
                "expected {} sub-seeds, got {}",
                config.r,
                seeds.len()
            )));
        }
        let subs = seeds
            .iter()
            .map(|&seed| {
                Ok(match config.kind {
                    DetectorKind::Loda => SubDetector::Loda(LodaSub::new(seed, &config)?),
                    DetectorKind::RsHash => SubDetector::RsHash(RsHashSub::new(seed, &config)?),
                    DetectorKind::XStream => SubDetector::XStream(XStreamSub::new(seed, &config)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EnsembleDetector {
            config,
            subs,
            samples_processed: 0,
            calibrated: false,
        })
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn kind(&self) -> DetectorKind {
        self.config.kind
    }

    pub fn r(&self) -> usize {
        self.config.r
    }

    pub fn is_calibrated(&self) -> bool {
        self.calibrated
    }

    /// Deterministically fix the data-dependent parameters (projection
    /// ranges, per-feature bounds, bin widths) from a prefix of the stream.
    pub fn calibrate(&mut self, prefix: &[Sample]) -> Result<()> {
        if prefix.is_empty() {
            return Err(Error::EmptyPrefix);
        }
        for s in prefix {
            if s.features.len() != self.config.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.config.dimension,
                    got: s.features.len(),
                });
            }
        }
        match self.config.kind {
            DetectorKind::Loda => {
                for sub in &mut self.subs {
                    if let SubDetector::Loda(s) = sub {
                        s.calibrate(prefix);
                    }
                }
            }
            DetectorKind::RsHash => {
                let d = self.config.dimension;
                let mut min = vec![f64::INFINITY; d];
                let mut max = vec![f64::NEG_INFINITY; d];
                for s in prefix {
                    for (dim, &v) in s.features.iter().enumerate() {
                        min[dim] = min[dim].min(v);
                        max[dim] = max[dim].max(v);
                    }
                }
                for dim in 0..d {
                    let (lo, hi) = widen(min[dim], max[dim]);
                    min[dim] = lo;
                    max[dim] = hi;
                }
                for sub in &mut self.subs {
                    if let SubDetector::RsHash(s) = sub {
                        s.set_bounds(&min, &max);
                    }
                }
            }
            DetectorKind::XStream => {
                for sub in &mut self.subs {
                    if let SubDetector::XStream(s) = sub {
                        s.calibrate(prefix);
                    }
                }
            }
        }
        self.calibrated = true;
        Ok(())
    }

    /// Process one sample: every sub-detector scores it and the ensemble
    /// score is the arithmetic mean, reduced in index order so parallel and
    /// sequential execution are bit-identical.
    pub fn process(&mut self, features: &[f64]) -> Result<f64> {
        if features.len() != self.config.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.config.dimension,
                got: features.len(),
            });
        }
        let mode = self.config.mode;
        let scores: Vec<Result<f64>> = if self.config.parallel && self.subs.len() > 1 {
            use rayon::prelude::*;
            self.subs
                .par_iter_mut()
                .map(|s| s.process(features, mode))
                .collect()
        } else {
            self.subs
                .iter_mut()
                .map(|s| s.process(features, mode))
                .collect()
        };
        let mut sum = 0.0;
        for s in scores {
            sum += s?;
        }
        self.samples_processed += 1;
        Ok(sum / self.subs.len() as f64)
    }

    pub fn process_stream(&mut self, samples: &[Sample]) -> Result<Vec<f64>> {
        samples.iter().map(|s| self.process(&s.features)).collect()
    }

    /// Operations executed so far under the documented counting policy.
    pub fn ops_executed(&self) -> u64 {
        self.subs.iter().map(|s| s.ops()).sum::<u64>() + 2 * self.samples_processed
    }

    /// Clear window state and counters; calibration parameters are kept.
    pub fn reset(&mut self) {
        for s in &mut self.subs {
            s.reset();
        }
        self.samples_processed = 0;
    }
}

impl Detector for EnsembleDetector {
    fn dimension(&self) -> usize {
        self.config.dimension
    }

    fn process(&mut self, features: &[f64]) -> Result<f64> {
        EnsembleDetector::process(self, features)
    }

    fn reset(&mut self) {
        EnsembleDetector::reset(self);
    }
}
