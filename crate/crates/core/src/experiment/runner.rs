use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::dataset::{encode, load_csv, partition, Dataset, FeatureSchema, Partition};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::learner::{cross_validate, f1, predict, train, CvReport, MetricReport};
use crate::seed::{self, derive_seed};
use crate::selector::{best_subset, importance_topk, random_policy, select_features, BestSubset, Importance, RewardContext, Selection};
use crate::simulator::{drain, step, DeliveryStatus, Simulator};
use crate::store::AcquiredStore;

/// A dataset split once into acquisition pool and test set. Every run of an
/// experiment shares the split; runs differ in what they acquire.
pub struct ExperimentData {
    pool: Arc<Dataset>,
    test: Dataset,
    partition_seed: u64,
}

impl ExperimentData {
    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        let schema = Arc::new(FeatureSchema::load(&config.schema)?);
        let dataset = load_csv(&config.dataset, schema)?;
        Self::from_dataset(&dataset, config.test_fraction, config.seed)
    }

    pub fn from_dataset(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<Self> {
        let Partition {
            acquisition_pool,
            test_set,
            ..
        } = partition(dataset, test_fraction, seed)?;
        Ok(ExperimentData {
            pool: Arc::new(acquisition_pool),
            test: test_set,
            partition_seed: seed,
        })
    }

    pub fn pool(&self) -> &Arc<Dataset> {
        &self.pool
    }

    pub fn test(&self) -> &Dataset {
        &self.test
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        self.pool.schema()
    }

    pub fn partition_seed(&self) -> u64 {
        self.partition_seed
    }
}

/// One row of `runs.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub method: Method,
    pub seed: u64,
    pub steps: u64,
    pub delay: u64,
    pub instances: usize,
    pub k: usize,
    #[serde(with = "set_as_string")]
    pub subset: FeatureSet,
    /// Rows behind the final subset.
    pub subset_rows: usize,
    pub cv_f1: f64,
    pub cv_precision: f64,
    pub cv_recall: f64,
    pub test_f1: f64,
    pub test_precision: f64,
    pub test_recall: f64,
    pub test_tp: usize,
    pub test_fp: usize,
    pub test_fn: usize,
    pub test_tn: usize,
    pub instances_collected: usize,
    pub decisions: usize,
    pub last_decision_step: u64,
    pub last_delivery_step: u64,
    #[serde(skip)]
    pub seconds: f64,
}

impl RunResult {
    pub fn test_report(&self) -> MetricReport {
        MetricReport::from_counts(self.test_tp, self.test_fp, self.test_fn, self.test_tn)
    }
}

mod set_as_string {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use crate::features::FeatureSet;

    pub fn serialize<S: Serializer>(set: &FeatureSet, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(set)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FeatureSet, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}

/// A finished run with everything needed for its trace.
pub struct RunOutcome {
    pub result: RunResult,
    pub store: AcquiredStore,
    /// Step and trace of every feedback decision.
    pub selections: Vec<(u64, Selection)>,
    pub best: Option<BestSubset>,
    pub importance: Option<Importance>,
    pub cv: CvReport,
}

/// Draws `rows` pool rows, each class contributing in proportion to its size.
fn stratified_sample(pool: &Dataset, rows: usize, seed: u64) -> Result<Vec<usize>> {
    if rows > pool.rows() {
        return Err(Error::TooFewRows {
            needed: rows,
            got: pool.rows(),
        });
    }
    let mut rng = seed::rng(seed);
    let by_class = pool.rows_by_class();
    let negatives = (rows as f64 * by_class[0].len() as f64 / pool.rows() as f64).round() as usize;
    let mut out = Vec::with_capacity(rows);
    for (class, mut members) in by_class.into_iter().enumerate() {
        let take = if class == 0 { negatives } else { rows - negatives };
        members.shuffle(&mut rng);
        out.extend_from_slice(&members[..take.min(members.len())]);
    }
    out.sort_unstable();
    Ok(out)
}

/// Acquires data under the method's schedule and evaluates the final subset.
pub fn run_method(config: &ExperimentConfig, data: &ExperimentData, seed: u64) -> Result<RunOutcome> {
    let started = Instant::now();
    let schema = data.schema().clone();
    let d = schema.d();
    config.validate(d)?;
    let pool = data.pool();
    let classifier = &config.classifier;
    let params = config.policy();
    let mut policy_rng = seed::rng(derive_seed(seed, &[seed::POLICY]));

    let mut pool_rows: Vec<usize> = (0..pool.rows()).collect();
    let mut importance = None;
    if config.method == Method::C3 {
        let pre = stratified_sample(pool, config.precollect_rows, derive_seed(seed, &[seed::PRECOLLECT]))?;
        let spec = classifier.with_seed(derive_seed(seed, &[seed::PRECOLLECT, 1]));
        importance = Some(importance_topk(&pool.select_rows(&pre), config.k, &spec)?);
        pool_rows.retain(|r| pre.binary_search(r).is_err());
    }

    let mut sim = Simulator::new(pool.clone(), Some(pool_rows), config.delay, derive_seed(seed, &[seed::ACQUISITION]));
    let mut store = AcquiredStore::new(schema.clone());
    let mut selections = Vec::new();
    let full = schema.all_features();

    match config.method {
        Method::Fbfs | Method::C1 | Method::C3 | Method::UC1 | Method::UC2 => {
            let count = if config.method == Method::UC1 {
                config.n_uc1(d)
            } else {
                config.instances
            };
            for t in 1..=config.steps {
                let features = match config.method {
                    Method::Fbfs => {
                        let ctx = RewardContext {
                            store: &store,
                            classifier,
                            run_seed: seed,
                        };
                        let sel = select_features(&ctx, t, &params, &mut policy_rng);
                        let f = sel.features.clone();
                        selections.push((t, sel));
                        f
                    }
                    Method::C1 => random_policy(&mut policy_rng, config.k, d),
                    Method::C3 => importance.as_ref().expect("set above").features.clone(),
                    _ => full.clone(),
                };
                store.record_submission(sim.submit(features, count)?);
                step(&mut sim, &mut store);
            }
        }
        Method::C2 | Method::UC3 => {
            let (rounds, count) = if config.method == Method::C2 {
                (config.c2_rounds(), config.n_c2())
            } else {
                (config.steps, config.instances)
            };
            for _ in 0..rounds {
                let t = sim.clock();
                let ctx = RewardContext {
                    store: &store,
                    classifier,
                    run_seed: seed,
                };
                let sel = select_features(&ctx, t, &params, &mut policy_rng);
                store.record_submission(sim.submit(sel.features.clone(), count)?);
                selections.push((t, sel));
                for _ in 0..=config.delay {
                    step(&mut sim, &mut store);
                }
            }
        }
    }
    drain(&mut sim, &mut store);

    let mut best = None;
    let subset = match config.method {
        m if m.uses_best_subset() => {
            let b = best_subset(&store, classifier, config.cv_folds, seed)?;
            let f = b.features.clone();
            best = Some(b);
            f
        }
        Method::C3 => importance.as_ref().expect("set above").features.clone(),
        _ => full,
    };

    let view = store.extract_subset(&subset);
    let x = encode(&view.table, &subset, &schema)?;
    let cv = cross_validate(&classifier.with_seed(derive_seed(seed, &[seed::EVAL_CV])), &x, &view.labels, config.cv_folds)?;
    let test_x = encode(data.test().table(), &subset, &schema)?;
    let test_pred = if view.rows() >= 2 {
        let model = train(&classifier.with_seed(derive_seed(seed, &[seed::EVAL_TEST])), &x, &view.labels)?;
        predict(&model, &test_x)?
    } else {
        vec![0; data.test().rows()]
    };
    let test = f1(data.test().labels(), &test_pred)?;

    let decisions = store.decisions();
    let result = RunResult {
        method: config.method,
        seed,
        steps: config.steps,
        delay: config.delay,
        instances: config.instances,
        k: config.k,
        subset,
        subset_rows: view.rows(),
        cv_f1: cv.f1,
        cv_precision: cv.precision,
        cv_recall: cv.recall,
        test_f1: test.f1,
        test_precision: test.precision,
        test_recall: test.recall,
        test_tp: test.tp,
        test_fp: test.fp,
        test_fn: test.fn_,
        test_tn: test.tn,
        instances_collected: store.delivered_rows(),
        decisions: decisions.len(),
        last_decision_step: decisions.iter().map(|r| r.step_submitted).max().unwrap_or(0),
        last_delivery_step: decisions.iter().filter_map(|r| r.step_delivered).max().unwrap_or(0),
        seconds: started.elapsed().as_secs_f64(),
    };
    let outcome = RunOutcome {
        result,
        store,
        selections,
        best,
        importance,
        cv,
    };
    check_accounting(config, d, &outcome)?;
    Ok(outcome)
}

/// Instances and decision horizon a method must produce.
pub fn expected_budget(config: &ExperimentConfig, d: usize) -> (usize, u64) {
    let t = config.steps;
    match config.method {
        Method::C2 => (config.c2_rounds() as usize * config.n_c2(), config.c2_rounds()),
        Method::UC1 => (config.n_uc1(d) * t as usize, t),
        _ => (config.instances * t as usize, t),
    }
}

/// Checks collected instances, decision count, horizon and delivery delay.
pub fn check_accounting(config: &ExperimentConfig, d: usize, outcome: &RunOutcome) -> Result<()> {
    let fail = |detail: String| {
        Err(Error::Accounting {
            method: config.method.to_string(),
            seed: outcome.result.seed,
            detail,
        })
    };
    let (instances, decisions) = expected_budget(config, d);
    let r = &outcome.result;
    if r.instances_collected != instances {
        return fail(format!("collected {} instances, expected {instances}", r.instances_collected));
    }
    if r.decisions as u64 != decisions {
        return fail(format!("made {} decisions, expected {decisions}", r.decisions));
    }
    let horizon = match config.method {
        Method::UC3 => config.steps * (config.delay + 1),
        _ => config.steps,
    };
    if r.last_decision_step > horizon {
        return fail(format!("last decision at step {}, horizon is {horizon}", r.last_decision_step));
    }
    if config.method == Method::UC3 {
        let end = r.last_delivery_step;
        if end != horizon {
            return fail(format!("last delivery at step {end}, expected {horizon}"));
        }
    }
    for rec in outcome.store.decisions() {
        if rec.status != DeliveryStatus::Delivered {
            return fail(format!("decision {} never delivered", rec.decision_id));
        }
        if rec.step_delivered != Some(rec.step_submitted + config.delay) {
            return fail(format!("decision {} delivered off schedule", rec.decision_id));
        }
        if rec.features.len() != config.k && !matches!(config.method, Method::UC1 | Method::UC2) {
            return fail(format!("decision {} has {} features", rec.decision_id, rec.features.len()));
        }
    }
    Ok(())
}

/// Runs seeds `config.seed .. config.seed + repetitions`. Results come back
/// in seed order. With `log_dir` set, each run writes `run-<seed>.log`.
pub fn run_repetitions(config: &ExperimentConfig, data: &ExperimentData, log_dir: Option<&Path>) -> Result<Vec<RunResult>> {
    config.validate(data.schema().d())?;
    let seeds: Vec<u64> = (0..config.repetitions as u64).map(|i| config.seed + i).collect();
    seeds
        .par_iter()
        .map(|&s| {
            let tag = |e: Error| Error::Run {
                seed: s,
                source: Box::new(e),
            };
            let outcome = run_method(config, data, s).map_err(tag)?;
            if let Some(dir) = log_dir {
                super::report::write_run_log(&dir.join(format!("run-{s}.log")), config, &outcome).map_err(tag)?;
            }
            Ok(outcome.result)
        })
        .collect()
}
