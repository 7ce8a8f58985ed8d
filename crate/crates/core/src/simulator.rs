//! The delayed acquisition channel.
//!
//! A decision submitted at step `t` reserves its rows from the pool at once
//! and is delivered when step `t + D` closes, so the policy first sees it at
//! step `t + D + 1`. Rows are drawn without replacement from a seeded
//! permutation of the pool.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Table};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::seed;
use crate::store::AcquiredStore;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryStatus {
    InFlight,
    Delivered,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub decision_id: u64,
    pub step_submitted: u64,
    pub features: FeatureSet,
    pub instance_count: usize,
    pub status: DeliveryStatus,
    pub step_delivered: Option<u64>,
}

/// Instances for one decision, restricted to its features.
#[derive(Clone, Debug, PartialEq)]
pub struct DataBatch {
    pub decision_id: u64,
    pub features: FeatureSet,
    pub step_delivered: u64,
    pub table: Table,
    pub labels: Vec<u8>,
    /// Row indices into the dataset the simulator samples from.
    pub source_rows: Vec<usize>,
}

impl DataBatch {
    pub fn rows(&self) -> usize {
        self.labels.len()
    }
}

pub struct Simulator {
    source: Arc<Dataset>,
    permutation: Vec<usize>,
    consumed: usize,
    clock: u64,
    delay: u64,
    next_id: u64,
    in_flight: VecDeque<(DecisionRecord, Vec<usize>)>,
}

impl Simulator {
    /// `pool_rows` selects which rows of `source` may be sampled; `None`
    /// means all of them. The clock starts at step 1.
    pub fn new(source: Arc<Dataset>, pool_rows: Option<Vec<usize>>, delay: u64, seed: u64) -> Self {
        let mut permutation = pool_rows.unwrap_or_else(|| (0..source.rows()).collect());
        permutation.shuffle(&mut seed::rng(seed));
        Simulator {
            source,
            permutation,
            consumed: 0,
            clock: 1,
            delay,
            next_id: 0,
            in_flight: VecDeque::new(),
        }
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn delay(&self) -> u64 {
        self.delay
    }

    pub fn remaining(&self) -> usize {
        self.permutation.len() - self.consumed
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    pub fn source(&self) -> &Arc<Dataset> {
        &self.source
    }

    pub fn submit(&mut self, features: FeatureSet, count: usize) -> Result<DecisionRecord> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("decision has no features".into()));
        }
        if let Some(m) = features.last() {
            if m >= self.source.schema().d() {
                return Err(Error::InvalidArgument(format!("feature {m} outside the schema")));
            }
        }
        if count > self.remaining() {
            return Err(Error::BudgetExceeded {
                step: self.clock,
                requested: count,
                remaining: self.remaining(),
            });
        }
        let rows = self.permutation[self.consumed..self.consumed + count].to_vec();
        self.consumed += count;
        let record = DecisionRecord {
            decision_id: self.next_id,
            step_submitted: self.clock,
            features,
            instance_count: count,
            status: DeliveryStatus::InFlight,
            step_delivered: None,
        };
        self.next_id += 1;
        self.in_flight.push_back((record.clone(), rows));
        Ok(record)
    }

    /// Closes the current step: returns every batch due at this step, in
    /// decision order, then moves the clock forward by one.
    pub fn advance(&mut self) -> Vec<DataBatch> {
        let mut out = Vec::new();
        // constant delay keeps the queue ordered by due step
        while let Some((rec, _)) = self.in_flight.front() {
            if rec.step_submitted + self.delay > self.clock {
                break;
            }
            let (rec, rows) = self.in_flight.pop_front().unwrap();
            out.push(DataBatch {
                decision_id: rec.decision_id,
                table: self.source.table().gather(&rec.features, &rows),
                labels: rows.iter().map(|&r| self.source.labels()[r]).collect(),
                features: rec.features,
                step_delivered: self.clock,
                source_rows: rows,
            });
        }
        self.clock += 1;
        out
    }
}

/// Scalars of a clocked acquisition run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClockedConfig {
    pub steps: u64,
    pub delay: u64,
    pub instances: usize,
    pub k: usize,
}

impl ClockedConfig {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if self.instances < 1 {
            return Err(Error::Config("instances per step must be at least 1".into()));
        }
        if self.k < 1 || self.k > d {
            return Err(Error::Config(format!("k = {} must be in 1..={d}", self.k)));
        }
        Ok(())
    }
}

/// Delivers everything due at the current step into `store` and advances.
pub fn step(sim: &mut Simulator, store: &mut AcquiredStore) {
    for batch in sim.advance() {
        store.record_delivery(batch);
    }
}

/// Advances until nothing is in flight.
pub fn drain(sim: &mut Simulator, store: &mut AcquiredStore) {
    while sim.in_flight() > 0 {
        step(sim, store);
    }
}

/// One decision per step for `t = 1..=steps`, each of `instances` rows, then
/// runs the clock out until every batch has arrived. The policy sees the
/// store as of the start of its step.
pub fn run_clocked_policy<P>(sim: &mut Simulator, config: &ClockedConfig, mut policy: P) -> Result<AcquiredStore>
where
    P: FnMut(u64, &AcquiredStore) -> Result<FeatureSet>,
{
    let schema = sim.source().schema().clone();
    config.validate(schema.d())?;
    if sim.delay() != config.delay {
        return Err(Error::Config("simulator delay differs from run config".into()));
    }
    let mut store = AcquiredStore::new(schema);
    for t in 1..=config.steps {
        debug_assert_eq!(sim.clock(), t);
        let features = policy(t, &store)?;
        if features.len() != config.k {
            return Err(Error::InvalidArgument(format!(
                "policy returned {} features at step {t}, expected {}",
                features.len(),
                config.k
            )));
        }
        let record = sim.submit(features, config.instances)?;
        store.record_submission(record);
        step(sim, &mut store);
    }
    drain(sim, &mut store);
    Ok(store)
}
