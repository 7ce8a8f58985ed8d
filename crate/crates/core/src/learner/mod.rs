//! Classifier, metrics and validation used to score feature subsets.

mod forest;
mod metrics;
mod validation;

pub use forest::{weighted_gini, Forest, NodeKind, Tree, TreeNode};
pub use metrics::{f1, MetricReport};
pub use validation::{cross_validate, split_train_test, stratified_folds, CvReport, FoldResult, TrainTestSplit, MIN_SPLIT_ROWS};

use serde::{Deserialize, Serialize};

use crate::dataset::{EncodedMatrix, EncodingSignature};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    RandomForest,
}

/// Ensemble settings. Each split considers `floor(sqrt(width))` columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ModelKind,
    pub trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec {
            kind: ModelKind::RandomForest,
            trees: 50,
            max_depth: 8,
            min_samples_leaf: 2,
            seed: 0,
        }
    }
}

impl ClassifierSpec {
    pub fn with_seed(&self, seed: u64) -> Self {
        ClassifierSpec { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees < 1 {
            return Err(Error::Config("classifier needs at least one tree".into()));
        }
        if self.max_depth < 1 {
            return Err(Error::Config("classifier max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    /// Training labels had a single class.
    Constant(u8),
    Forest(Forest),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub model: Model,
    pub signature: EncodingSignature,
}

impl TrainedModel {
    pub fn forest(&self) -> Option<&Forest> {
        match &self.model {
            Model::Forest(f) => Some(f),
            Model::Constant(_) => None,
        }
    }
}

pub fn train(spec: &ClassifierSpec, x: &EncodedMatrix, y: &[u8]) -> Result<TrainedModel> {
    if y.len() < 2 {
        return Err(Error::TooFewRows { needed: 2, got: y.len() });
    }
    fit_model(spec, x, y)
}

/// `train` without the two-row minimum; CV folds may be tiny.
pub(crate) fn fit_model(spec: &ClassifierSpec, x: &EncodedMatrix, y: &[u8]) -> Result<TrainedModel> {
    spec.validate()?;
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch(x.rows(), y.len()));
    }
    if y.is_empty() {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    if x.width() == 0 {
        return Err(Error::InvalidArgument("cannot train on a matrix with no columns".into()));
    }
    if y.iter().any(|&c| c > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    let positives = y.iter().filter(|&&c| c == 1).count();
    let model = if positives == 0 || positives == y.len() {
        Model::Constant(y[0])
    } else {
        Model::Forest(Forest::fit(spec, &x.matrix, y))
    };
    Ok(TrainedModel {
        model,
        signature: x.signature.clone(),
    })
}

pub fn predict(model: &TrainedModel, x: &EncodedMatrix) -> Result<Vec<u8>> {
    if model.signature != x.signature {
        return Err(Error::SignatureMismatch {
            trained: model.signature.features.to_string(),
            given: x.signature.features.to_string(),
        });
    }
    Ok(match &model.model {
        Model::Constant(c) => vec![*c; x.rows()],
        Model::Forest(f) => f.predict(&x.matrix),
    })
}
