//! Score normalization, contamination thresholding and the score/label
//! combination methods.

use crate::error::{Error, Result};

/// One score per sample, tagged with the producing slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub source: String,
    pub values: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(source: impl Into<String>, values: Vec<f64>) -> Self {
        ScoreSeries {
            source: source.into(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSeries {
    pub values: Vec<u8>,
}

impl LabelSeries {
    pub fn new(values: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|&&v| v > 1) {
            return Err(Error::NonBinaryLabel(f64::from(bad)));
        }
        Ok(LabelSeries { values })
    }
}

/// Non-negative weights summing to 1 (within 1e-9).
#[derive(Debug, Clone)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidWeights("weights must be non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(WeightVector { weights })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMethod {
    Averaging,
    Maximization,
    /// Weighted sum divided by the input count, the equation as printed.
    /// `conventional` drops the extra division and yields an ordinary
    /// weighted mean.
    Weighted { conventional: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMethod {
    Or,
    /// Majority vote; ties break toward 1 (anomaly).
    Voting,
}

/// Min-max normalization into [0,1). A constant series maps to all zeros.
pub fn normalize(scores: &ScoreSeries) -> Result<ScoreSeries> {
    if scores.is_empty() {
        return Err(Error::EmptySeries);
    }
    let min = scores.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = scores
        .values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let inv = 1.0 / (max - min + 1e-12);
    Ok(ScoreSeries::new(
        scores.source.clone(),
        scores.values.iter().map(|&s| (s - min) * inv).collect(),
    ))
}

fn check_equal_lengths<T>(series: &[T], len_of: impl Fn(&T) -> usize) -> Result<usize> {
    let mut iter = series.iter();
    let first = iter.next().ok_or(Error::EmptySeries)?;
    let n = len_of(first);
    for s in iter {
        if len_of(s) != n {
            return Err(Error::LengthMismatch(n, len_of(s)));
        }
    }
    Ok(n)
}

/// Element-wise score combination per the method's equation.
pub fn combine_scores(
    method: ScoreMethod,
    inputs: &[ScoreSeries],
    weights: Option<&WeightVector>,
) -> Result<ScoreSeries> {
    let n = check_equal_lengths(inputs, |s| s.len())?;
    let count = inputs.len() as f64;
    let values = match method {
        ScoreMethod::Averaging => (0..n)
            .map(|i| inputs.iter().map(|s| s.values[i]).sum::<f64>() / count)
            .collect(),
        ScoreMethod::Maximization => (0..n)
            .map(|i| {
                inputs
                    .iter()
                    .map(|s| s.values[i])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect(),
        ScoreMethod::Weighted { conventional } => {
            let w = weights.ok_or(Error::MissingWeights)?;
            if w.as_slice().len() != inputs.len() {
                return Err(Error::InvalidWeights(format!(
                    "{} weights for {} inputs",
                    w.as_slice().len(),
                    inputs.len()
                )));
            }
            let divisor = if conventional { 1.0 } else { count };
            (0..n)
                .map(|i| {
                    inputs
                        .iter()
                        .zip(w.as_slice())
                        .map(|(s, &wi)| wi * s.values[i])
                        .sum::<f64>()
                        / divisor
                })
                .collect()
        }
    };
    Ok(ScoreSeries::new("combo", values))
}

/// Element-wise OR or majority vote over label series.
pub fn combine_labels(method: LabelMethod, inputs: &[LabelSeries]) -> Result<LabelSeries> {
    let n = check_equal_lengths(inputs, |s| s.values.len())?;
    let values = match method {
        LabelMethod::Or => (0..n)
            .map(|i| u8::from(inputs.iter().any(|s| s.values[i] == 1)))
            .collect(),
        LabelMethod::Voting => (0..n)
            .map(|i| {
                let ones = inputs.iter().filter(|s| s.values[i] == 1).count();
                // Tie on even counts breaks toward anomaly.
                u8::from(2 * ones >= inputs.len())
            })
            .collect(),
    };
    LabelSeries::new(values)
}

/// Binarize normalized scores at the empirical (1 - contamination)-quantile.
/// A sample is labeled 1 iff its score is strictly above the threshold.
pub fn threshold_labels(scores: &ScoreSeries, contamination: f64) -> Result<LabelSeries> {
    if !(contamination > 0.0 && contamination < 1.0) {
        return Err(Error::InvalidContamination(contamination));
    }
    if scores.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = scores.len();
    let mut sorted = scores.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let q = 1.0 - contamination;
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    let threshold = sorted[idx];
    LabelSeries::new(
        scores
            .values
            .iter()
            .map(|&s| u8::from(s > threshold))
            .collect(),
    )
}
