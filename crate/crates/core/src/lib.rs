//! Feature selection when data arrives late and in limited amounts.
//!
//! A policy decides at every step which features to acquire for a batch of
//! instances. Batches arrive after a fixed delay, and each decision is scored
//! with a classifier trained on what has arrived so far plus an exploration
//! bonus. The crate contains the delayed acquisition simulator, the store of
//! acquired data, a random forest learner, the selection policies with their
//! baselines, and the experiment harness that compares them.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod features;
pub mod learner;
pub mod matrix;
pub mod seed;
pub mod selector;
pub mod simulator;
pub mod store;

pub use dataset::{encode, load_csv, partition, synthesize, Dataset, EncodedMatrix, FeatureSchema, FeatureSpec, SynthSpec};
pub use error::{Error, Result};
pub use experiment::{run_method, run_repetitions, ExperimentConfig, ExperimentData, GridConfig, Method, RunResult};
pub use features::FeatureSet;
pub use learner::{ClassifierSpec, MetricReport};
pub use matrix::Matrix;
pub use selector::{exploration_bonus, select_features, PolicyParams};
pub use simulator::{DataBatch, DecisionRecord, Simulator};
pub use store::{AcquiredStore, SubsetView};
