//! Streaming ensemble anomaly detection with a composable, hot-swappable
//! pipeline.
//!
//! The library provides three streaming detectors (Loda, RS-Hash, xStream)
//! built from shared blocks (random projections, sliding-window count
//! tables, negative log-likelihood scores), score/label combiners, a
//! slot-based pipeline with runtime content swap, ROC-AUC evaluation
//! utilities and CSV ingestion. A Q16.16 fixed-point mode mirrors a
//! truncate-and-wrap hardware numeric profile.

pub mod combiners;
pub mod data;
pub mod detectors;
pub mod error;
pub mod evaluation;
pub mod hashing;
pub mod io;
pub mod num;
pub mod pipeline;

pub use combiners::{
    combine_labels, combine_scores, normalize, threshold_labels, LabelMethod, LabelSeries,
    ScoreMethod, ScoreSeries, WeightVector,
};
pub use data::{DataStream, Sample};
pub use evaluation::{
    auc_roc, bench_detector, combo_study, evaluate_detector, sweep_ensemble, sweep_means,
    BenchReport, ComboOutcome, EvalReport, SweepCell,
};
pub use io::{gen_synthetic, load_csv, write_csv, write_scores};
pub use pipeline::{
    parse_content_spec, BuildOverrides, CombinerSpec, Edge, Pipeline, PipelineConfig,
    RoutingTable, Sink, Slot, SlotContent, Violation,
};
pub use detectors::{
    op_count, windower, Detector, DetectorKind, EnsembleConfig, EnsembleDetector, NumericMode,
};
pub use error::{Error, Result};
pub use num::{Q16_16, SeededRng};
