//! State-level presidential election forecasting.
//!
//! The crate fuses census, economic, polling and tweet-sentiment features into
//! a labeled state-year dataset ([`dataset`]), aggregates per-tweet sentiment
//! probabilities into per-party scores ([`sentiment`]), fits seven from-scratch
//! classifiers plus a soft-voting ensemble ([`learners`]), evaluates them with
//! cross-validation, temporal splits, ROC analysis and asymmetric decision
//! thresholds ([`evaluation`]), and tallies winner-take-all electoral votes
//! ([`electoral`]).

pub mod dataset;
pub mod electoral;
pub mod evaluation;
pub mod learners;
pub mod matrix;
pub mod seed;
pub mod sentiment;
pub mod synthetic;

pub use dataset::{Dataset, ElectionYear, FeatureSchema, PartyLabel, StateId};
pub use matrix::FeatureMatrix;
