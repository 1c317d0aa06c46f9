//! Samples and data streams.

use crate::error::{Error, Result};

/// One d-dimensional observation with an optional binary ground-truth label
/// (1 = anomaly).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Option<u8>,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: Option<u8>) -> Result<Self> {
        if let Some(l) = label {
            if l > 1 {
                return Err(Error::NonBinaryLabel(f64::from(l)));
            }
        }
        Ok(Sample { features, label })
    }

    pub fn unlabeled(features: Vec<f64>) -> Self {
        Sample {
            features,
            label: None,
        }
    }
}

/// An ordered sequence of samples sharing one dimension.
#[derive(Debug, Clone)]
pub struct DataStream {
    pub name: String,
    pub dimension: usize,
    pub samples: Vec<Sample>,
}

impl DataStream {
    pub fn new(name: impl Into<String>, dimension: usize, samples: Vec<Sample>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for s in &samples {
            if s.features.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: s.features.len(),
                });
            }
        }
        Ok(DataStream {
            name: name.into(),
            dimension,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Ground-truth labels, if every sample carries one.
    pub fn labels(&self) -> Option<Vec<u8>> {
        self.samples.iter().map(|s| s.label).collect()
    }
}
