//! Feature-selection policies.
//!
//! The feedback policy builds each decision one feature at a time. At every
//! stage each remaining feature `a` is scored as
//! `r = r_m + r_e`, where `r_m` is the hold-out f1 of a model trained on the
//! rows already collected for `chosen ∪ {a}` and `r_e` is a UCB-style bonus
//! that shrinks as more instances carrying `a` are requested. The best
//! feature is taken with probability `1 - ε`, a uniformly random remaining
//! feature otherwise.

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::{encode, Dataset};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::learner::{cross_validate, f1, fit_model, predict, split_train_test, ClassifierSpec, CvReport, MIN_SPLIT_ROWS};
use crate::seed::{self, Rng};
use crate::store::AcquiredStore;

/// Share of subset rows used for training when computing `r_m`.
pub const REWARD_TRAIN_RATIO: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub epsilon: f64,
    /// Weight `c` on the exploration bonus.
    pub exploration_weight: f64,
    pub k: usize,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            epsilon: 0.1,
            exploration_weight: 1.0,
            k: 3,
        }
    }
}

impl PolicyParams {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon {} not in [0,1]", self.epsilon)));
        }
        if !(self.exploration_weight >= 0.0 && self.exploration_weight.is_finite()) {
            return Err(Error::Config(format!("exploration weight {} must be >= 0", self.exploration_weight)));
        }
        if self.k < 1 || self.k > d {
            return Err(Error::Config(format!("k = {} must be in 1..={d}", self.k)));
        }
        Ok(())
    }
}

/// `c * sqrt(ln(t) / (N + 1))`.
pub fn exploration_bonus(t: u64, n: u64, c: f64) -> f64 {
    assert!(t >= 1, "steps start at 1");
    c * ((t as f64).ln() / (n as f64 + 1.0)).sqrt()
}

/// Seeds for the hold-out split and the model fit behind one `r_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewardSeeds {
    pub split: u64,
    pub model: u64,
}

pub fn reward_seeds(run_seed: u64, t: u64, stage: usize, action: usize) -> RewardSeeds {
    let base = seed::derive_seed(run_seed, &[seed::REWARD, t, stage as u64, action as u64]);
    RewardSeeds {
        split: seed::derive_seed(base, &[0]),
        model: seed::derive_seed(base, &[1]),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub action: usize,
    pub r_m: f64,
    pub r_e: f64,
    pub r: f64,
    pub exploration_count: u64,
    pub rows: usize,
    pub covering: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: usize,
    pub chosen_before: FeatureSet,
    pub available: FeatureSet,
    pub rewards: Vec<RewardBreakdown>,
    pub greedy: usize,
    pub explored: bool,
    pub action: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub features: FeatureSet,
    pub stages: Vec<StageTrace>,
}

/// What the reward computation reads.
#[derive(Clone, Copy)]
pub struct RewardContext<'a> {
    pub store: &'a AcquiredStore,
    pub classifier: &'a ClassifierSpec,
    pub run_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MlReward {
    pub r_m: f64,
    pub rows: usize,
    pub covering: usize,
}

/// Hold-out f1 for `chosen ∪ {action}` on the delivered data, or zero
/// when fewer than `MIN_SPLIT_ROWS` rows cover the subset.
pub fn reward_ml(ctx: &RewardContext<'_>, chosen: &FeatureSet, action: usize, t: u64, stage: usize) -> MlReward {
    let s_prime = chosen.with(action);
    let view = ctx.store.extract_subset(&s_prime);
    let mut out = MlReward {
        r_m: 0.0,
        rows: view.rows(),
        covering: view.covering_count,
    };
    if view.rows() < MIN_SPLIT_ROWS {
        return out;
    }
    let seeds = reward_seeds(ctx.run_seed, t, stage, action);
    let score = || -> Result<f64> {
        let x = encode(&view.table, &s_prime, ctx.store.schema())?;
        let split = split_train_test(&x, &view.labels, REWARD_TRAIN_RATIO, seeds.split)?;
        let model = fit_model(&ctx.classifier.with_seed(seeds.model), &split.train, &split.train_y)?;
        let pred = predict(&model, &split.test)?;
        Ok(f1(&split.test_y, &pred)?.f1)
    };
    out.r_m = score().unwrap_or(0.0);
    out
}

/// One decision at step `t`, grown from the empty set over `k` stages.
/// Greedy ties go to the lowest feature index.
pub fn select_features(ctx: &RewardContext<'_>, t: u64, params: &PolicyParams, rng: &mut Rng) -> Selection {
    let d = ctx.store.schema().d();
    let mut chosen = FeatureSet::new();
    let mut available = FeatureSet::full(d);
    let mut stages = Vec::with_capacity(params.k);
    for stage in 1..=params.k {
        available = available.difference(&chosen);
        let rewards: Vec<RewardBreakdown> = available
            .iter()
            .map(|a| {
                let ml = reward_ml(ctx, &chosen, a, t, stage);
                let n = ctx.store.exploration_count(a);
                let r_e = exploration_bonus(t, n, params.exploration_weight);
                RewardBreakdown {
                    action: a,
                    r_m: ml.r_m,
                    r_e,
                    r: ml.r_m + r_e,
                    exploration_count: n,
                    rows: ml.rows,
                    covering: ml.covering,
                }
            })
            .collect();
        let greedy = greedy_action(&rewards);
        let explored = rng.gen::<f64>() < params.epsilon;
        let action = if explored {
            available.as_slice()[rng.gen_range(0..available.len())]
        } else {
            greedy
        };
        stages.push(StageTrace {
            stage,
            chosen_before: chosen.clone(),
            available: available.clone(),
            rewards,
            greedy,
            explored,
            action,
        });
        chosen.insert(action);
    }
    Selection {
        features: chosen,
        stages,
    }
}

/// Action with the highest total reward; ties go to the lowest feature index.
pub fn greedy_action(rewards: &[RewardBreakdown]) -> usize {
    let mut best = &rewards[0];
    for r in &rewards[1..] {
        if r.r > best.r {
            best = r;
        }
    }
    best.action
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateScore {
    pub features: FeatureSet,
    pub rows: usize,
    pub cv: CvReport,
    /// `cv.f1 * rows`.
    pub weighted: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestSubset {
    pub features: FeatureSet,
    pub candidates: Vec<CandidateScore>,
}

/// Highest weighted score; ties go to more rows, then to the
/// lexicographically smallest set.
pub fn choose_best(candidates: &[CandidateScore]) -> Option<&CandidateScore> {
    candidates.iter().reduce(|best, c| {
        let better = c.weighted > best.weighted
            || (c.weighted == best.weighted && c.rows > best.rows)
            || (c.weighted == best.weighted && c.rows == best.rows && c.features < best.features);
        if better {
            c
        } else {
            best
        }
    })
}

/// Scores every distinct decision set by cross-validated f1 on its covering
/// rows, weighted by the row count, and keeps the best.
pub fn best_subset(store: &AcquiredStore, classifier: &ClassifierSpec, folds: usize, seed: u64) -> Result<BestSubset> {
    if store.batches().is_empty() {
        return Err(Error::NoData);
    }
    let mut candidates = Vec::new();
    for features in store.distinct_decisions() {
        let view = store.extract_subset(&features);
        let cv = if view.is_empty() {
            CvReport {
                f1: 0.0,
                precision: 0.0,
                recall: 0.0,
                folds: Vec::new(),
                insufficient: true,
            }
        } else {
            let x = encode(&view.table, &features, store.schema())?;
            let parts: Vec<u64> = std::iter::once(seed::BEST_SUBSET)
                .chain(features.iter().map(|f| f as u64))
                .collect();
            cross_validate(&classifier.with_seed(seed::derive_seed(seed, &parts)), &x, &view.labels, folds)?
        };
        candidates.push(CandidateScore {
            weighted: cv.f1 * view.rows() as f64,
            rows: view.rows(),
            features,
            cv,
        });
    }
    let features = choose_best(&candidates).expect("at least one decision").features.clone();
    Ok(BestSubset { features, candidates })
}

/// Uniform random `k`-subset of `0..d`.
pub fn random_policy(rng: &mut Rng, k: usize, d: usize) -> FeatureSet {
    index::sample(rng, d, k).into_iter().collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Importance {
    pub features: FeatureSet,
    /// Total impurity decrease per raw feature; one-hot columns are summed
    /// into their feature.
    pub per_feature: Vec<f64>,
}

/// Top-`k` features by forest impurity decrease on fully encoded data;
/// ties go to the lower index.
pub fn importance_topk(precollected: &Dataset, k: usize, classifier: &ClassifierSpec) -> Result<Importance> {
    let schema = precollected.schema();
    if precollected.rows() == 0 {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    if k < 1 || k > schema.d() {
        return Err(Error::InvalidArgument(format!("k = {k} must be in 1..={}", schema.d())));
    }
    let all = schema.all_features();
    let x = encode(precollected.table(), &all, schema)?;
    let model = fit_model(classifier, &x, precollected.labels())?;
    let mut per_feature = vec![0.0; schema.d()];
    if let Some(forest) = model.forest() {
        for (col, imp) in forest.importances().into_iter().enumerate() {
            per_feature[x.column_owner[col]] += imp;
        }
    }
    let mut order: Vec<usize> = (0..schema.d()).collect();
    order.sort_by(|&a, &b| per_feature[b].total_cmp(&per_feature[a]).then(a.cmp(&b)));
    Ok(Importance {
        features: order.into_iter().take(k).collect(),
        per_feature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::dataset::{synthesize, SynthSpec};
    use crate::simulator::{step, Simulator};

    fn synth(rows: usize, d_num: usize, d_cat: usize, informative: usize, seed: u64) -> Arc<Dataset> {
        Arc::new(
            synthesize(
                &SynthSpec {
                    rows,
                    numeric: d_num,
                    categorical: d_cat,
                    informative,
                    noise: 0.0,
                },
                seed,
            )
            .unwrap(),
        )
    }

    #[test]
    fn bonus_values() {
        assert_eq!(exploration_bonus(1, 0, 3.0), 0.0);
        assert_eq!(exploration_bonus(1, 17, 0.5), 0.0);
        // independent evaluations of c*sqrt(ln t/(N+1))
        assert!((exploration_bonus(10, 9, 2.0) - 0.959_705_182_437_616_3).abs() < 1e-12);
        assert!((exploration_bonus(100, 0, 1.0) - 2.145_966_026_289_347).abs() < 1e-12);
    }

    #[test]
    fn empty_store_picks_lowest_indices() {
        let src = synth(100, 3, 3, 4, 0);
        let store = AcquiredStore::new(src.schema().clone());
        let spec = ClassifierSpec::default();
        let ctx = RewardContext {
            store: &store,
            classifier: &spec,
            run_seed: 0,
        };
        let params = PolicyParams {
            epsilon: 0.0,
            exploration_weight: 1.0,
            k: 3,
        };
        let sel = select_features(&ctx, 5, &params, &mut seed::rng(1));
        assert_eq!(sel.features, FeatureSet::from([0, 1, 2]));
        for st in &sel.stages {
            assert!(st.rewards.iter().all(|r| r.r_m == 0.0));
        }
    }

    #[test]
    fn perfect_feature_wins_stage_one() {
        let src = synth(600, 4, 2, 2, 3);
        let mut sim = Simulator::new(src.clone(), None, 0, 1);
        let mut store = AcquiredStore::new(src.schema().clone());
        for s in [[0usize, 1], [2, 3], [4, 5], [1, 2]] {
            store.record_submission(sim.submit(FeatureSet::from(s), 50).unwrap());
            step(&mut sim, &mut store);
        }
        let spec = ClassifierSpec { trees: 15, ..Default::default() };
        let ctx = RewardContext {
            store: &store,
            classifier: &spec,
            run_seed: 9,
        };
        let params = PolicyParams {
            epsilon: 0.0,
            exploration_weight: 0.0,
            k: 2,
        };
        let sel = select_features(&ctx, 10, &params, &mut seed::rng(0));
        assert_eq!(sel.stages[0].action, 2);
        let r2 = sel.stages[0].rewards.iter().find(|r| r.action == 2).unwrap();
        assert_eq!(r2.r_m, 1.0);
        assert_eq!(r2.rows, 100);
    }

    #[test]
    fn uniform_exploration_frequencies() {
        // with eps = 1 every stage draws uniformly from the remaining
        // features, so each of d = 5 features is included with prob 2/5
        let src = synth(20, 5, 0, 0, 0);
        let store = AcquiredStore::new(src.schema().clone());
        let spec = ClassifierSpec::default();
        let ctx = RewardContext {
            store: &store,
            classifier: &spec,
            run_seed: 0,
        };
        let params = PolicyParams {
            epsilon: 1.0,
            exploration_weight: 1.0,
            k: 2,
        };
        let mut rng = seed::rng(77);
        let mut counts = [0usize; 5];
        let draws = 10_000;
        for _ in 0..draws {
            let s = select_features(&ctx, 3, &params, &mut rng);
            assert_eq!(s.features.len(), 2);
            for f in s.features.iter() {
                counts[f] += 1;
            }
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.4).abs() <= 0.02, "freq {freq}");
        }
    }

    #[test]
    fn choose_best_weighting_and_ties() {
        let cand = |f: &[usize], f1: f64, rows: usize| CandidateScore {
            features: FeatureSet::from(f),
            rows,
            cv: CvReport {
                f1,
                precision: 0.0,
                recall: 0.0,
                folds: vec![],
                insufficient: false,
            },
            weighted: f1 * rows as f64,
        };
        let c = [cand(&[0, 1], 0.6, 100), cand(&[2, 3], 0.9, 50)];
        assert_eq!(choose_best(&c).unwrap().features, FeatureSet::from([0, 1]));
        // 0.5*100 == 1.0*50: more rows wins
        let c = [cand(&[2], 1.0, 50), cand(&[3], 0.5, 100)];
        assert_eq!(choose_best(&c).unwrap().features, FeatureSet::from([3]));
        let c = [cand(&[4], 0.5, 10), cand(&[1], 0.5, 10)];
        assert_eq!(choose_best(&c).unwrap().features, FeatureSet::from([1]));
    }

    #[test]
    fn best_subset_single_decision() {
        let src = synth(300, 3, 0, 0, 1);
        let mut sim = Simulator::new(src.clone(), None, 0, 1);
        let mut store = AcquiredStore::new(src.schema().clone());
        assert!(matches!(best_subset(&store, &ClassifierSpec::default(), 5, 0), Err(Error::NoData)));
        for _ in 0..3 {
            store.record_submission(sim.submit(FeatureSet::from([1, 2]), 20).unwrap());
            step(&mut sim, &mut store);
        }
        let b = best_subset(&store, &ClassifierSpec::default(), 5, 0).unwrap();
        assert_eq!(b.features, FeatureSet::from([1, 2]));
        assert_eq!(b.candidates.len(), 1);
        assert_eq!(b.candidates[0].rows, 60);
    }

    #[test]
    fn random_policy_properties() {
        let mut rng = seed::rng(3);
        assert_eq!(random_policy(&mut rng, 5, 5), FeatureSet::full(5));
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            let s = random_policy(&mut rng, 1, 5);
            counts[s.as_slice()[0]] += 1;
        }
        // binomial(10000, 0.2): sd = 40, so 140 is 3.5 sd
        for c in counts {
            assert!((c as i64 - 2000).abs() <= 140, "count {c}");
        }
        let a: Vec<_> = (0..20).map({
            let mut r = seed::rng(8);
            move |_| random_policy(&mut r, 3, 9)
        }).collect();
        let b: Vec<_> = (0..20).map({
            let mut r = seed::rng(8);
            move |_| random_policy(&mut r, 3, 9)
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn importance_finds_informative_feature() {
        let src = synth(400, 3, 3, 4, 2);
        let imp = importance_topk(&src, 1, &ClassifierSpec::default()).unwrap();
        assert_eq!(imp.features, FeatureSet::from([4]));
        let all = importance_topk(&src, 6, &ClassifierSpec::default()).unwrap();
        assert_eq!(all.features, FeatureSet::full(6));
    }

    #[test]
    fn importance_accounting_identity() {
        let src = Arc::new(
            synthesize(
                &SynthSpec {
                    rows: 300,
                    numeric: 2,
                    categorical: 2,
                    informative: 2,
                    noise: 0.2,
                },
                4,
            )
            .unwrap(),
        );
        let spec = ClassifierSpec { trees: 10, ..Default::default() };
        let imp = importance_topk(&src, 2, &spec).unwrap();
        let x = encode(src.table(), &src.schema().all_features(), src.schema()).unwrap();
        let model = fit_model(&spec, &x, src.labels()).unwrap();
        let mut total = 0.0;
        for t in model.forest().unwrap().trees() {
            for n in t.nodes() {
                total += n.impurity_decrease;
            }
        }
        let summed: f64 = imp.per_feature.iter().sum();
        assert!((summed - total).abs() < 1e-9);
    }
}
