//! Cross-validation, temporal evaluation, classification metrics and ROC
//! analysis. Standardization is refit on the training rows of every fold
//! and repeat.

mod cv;
mod metrics;
mod reports;
mod roc;

use thiserror::Error;

use crate::dataset::{DatasetError, ElectionYear};
use crate::learners::LearnerError;

pub use crate::learners::DecisionPolicy;
pub use cv::{
    kfold_cv, stratified_folds, temporal_eval, CvResult, StatePrediction, TemporalReport,
};
pub use metrics::{metrics, ClassMetrics, Confusion, MetricsReport};
pub use reports::{
    classification_rows, cv_rows, read_classification_report, read_cv_report, read_roc, roc_rows,
    write_classification_report, write_cv_report, write_roc, ClassificationRow, CvReportRow,
    RocRow, CLASSIFICATION_HEADER, CV_HEADER, ROC_HEADER,
};
pub use roc::{roc, select_threshold, RocCurve, RocPoint};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no rows to evaluate")]
    Empty,
    #[error("ROC needs both classes")]
    SingleClass,
    #[error("{rows} rows cannot fill {k} folds")]
    TooFewRows { rows: usize, k: usize },
    #[error("k must be at least 2, got {0}")]
    InvalidFolds(usize),
    #[error("repeats must be at least 1")]
    InvalidRepeats,
    #[error("dataset has no rows for {0}")]
    MissingYear(ElectionYear),
    #[error("malformed report: {0}")]
    BadReport(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
