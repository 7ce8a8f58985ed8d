//! Stratified hold-out splits and k-fold cross-validation.

use rand::seq::SliceRandom;

use crate::dataset::EncodedMatrix;
use crate::error::{Error, Result};
use crate::seed;

use super::metrics::{f1, MetricReport};
use super::{fit_model, predict, ClassifierSpec};

pub const MIN_SPLIT_ROWS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainTestSplit {
    pub train: EncodedMatrix,
    pub train_y: Vec<u8>,
    pub test: EncodedMatrix,
    pub test_y: Vec<u8>,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

fn rows_by_class(y: &[u8]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &c) in y.iter().enumerate() {
        out[c as usize].push(i);
    }
    out
}

/// Stratified when both classes are present: each class puts
/// `round(ratio * count)` rows into training. Single-class input is split
/// the same way as one group.
pub fn split_train_test(x: &EncodedMatrix, y: &[u8], ratio: f64, seed: u64) -> Result<TrainTestSplit> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch(x.rows(), y.len()));
    }
    if y.len() < MIN_SPLIT_ROWS {
        return Err(Error::TooFewRows {
            needed: MIN_SPLIT_ROWS,
            got: y.len(),
        });
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("split ratio {ratio} not in (0,1)")));
    }
    let mut rng = seed::rng(seed);
    let groups: Vec<Vec<usize>> = match rows_by_class(y) {
        [neg, pos] if !neg.is_empty() && !pos.is_empty() => vec![neg, pos],
        _ => vec![(0..y.len()).collect()],
    };
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for mut g in groups {
        g.shuffle(&mut rng);
        let take = (ratio * g.len() as f64).round() as usize;
        train_rows.extend_from_slice(&g[..take]);
        test_rows.extend_from_slice(&g[take..]);
    }
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::TooFewRows {
            needed: MIN_SPLIT_ROWS,
            got: y.len(),
        });
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok(TrainTestSplit {
        train: x.select_rows(&train_rows),
        train_y: train_rows.iter().map(|&r| y[r]).collect(),
        test: x.select_rows(&test_rows),
        test_y: test_rows.iter().map(|&r| y[r]).collect(),
        train_rows,
        test_rows,
    })
}

/// Assigns each row a fold: rows of each class are shuffled, the classes
/// are laid end to end, and position `i` goes to fold `i % folds`.
pub fn stratified_folds(y: &[u8], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed);
    let mut assignment = vec![0; y.len()];
    let mut pos = 0;
    for mut rows in rows_by_class(y) {
        rows.shuffle(&mut rng);
        for r in rows {
            assignment[r] = pos % folds;
            pos += 1;
        }
    }
    assignment
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult {
    pub test_rows: Vec<usize>,
    pub predictions: Vec<u8>,
    pub report: MetricReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub folds: Vec<FoldResult>,
    /// Set when there were too few rows to cross-validate; scores are zero.
    pub insufficient: bool,
}

impl CvReport {
    fn insufficient() -> Self {
        CvReport {
            f1: 0.0,
            precision: 0.0,
            recall: 0.0,
            folds: Vec::new(),
            insufficient: true,
        }
    }
}

/// Mean per-fold scores over stratified folds. Fold `i` trains with a seed
/// derived from `spec.seed` and `i`.
pub fn cross_validate(spec: &ClassifierSpec, x: &EncodedMatrix, y: &[u8], folds: usize) -> Result<CvReport> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch(x.rows(), y.len()));
    }
    if folds < 2 || y.len() < folds {
        return Ok(CvReport::insufficient());
    }
    let assignment = stratified_folds(y, folds, seed::derive_seed(spec.seed, &[u64::MAX]));
    let mut results = Vec::with_capacity(folds);
    for fold in 0..folds {
        let (test_rows, train_rows): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&r| assignment[r] == fold);
        let train_y: Vec<u8> = train_rows.iter().map(|&r| y[r]).collect();
        let test_y: Vec<u8> = test_rows.iter().map(|&r| y[r]).collect();
        let fold_spec = spec.with_seed(seed::derive_seed(spec.seed, &[fold as u64]));
        let model = fit_model(&fold_spec, &x.select_rows(&train_rows), &train_y)?;
        let predictions = predict(&model, &x.select_rows(&test_rows))?;
        let report = f1(&test_y, &predictions)?;
        results.push(FoldResult {
            test_rows,
            predictions,
            report,
        });
    }
    let k = folds as f64;
    Ok(CvReport {
        f1: results.iter().map(|r| r.report.f1).sum::<f64>() / k,
        precision: results.iter().map(|r| r.report.precision).sum::<f64>() / k,
        recall: results.iter().map(|r| r.report.recall).sum::<f64>() / k,
        folds: results,
        insufficient: false,
    })
}
