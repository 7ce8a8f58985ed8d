//! Everything acquired so far: all decisions (in flight or delivered) and
//! the delivered batches.

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::dataset::{FeatureSchema, Table};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::simulator::{DataBatch, DecisionRecord, DeliveryStatus};

pub struct AcquiredStore {
    schema: Arc<FeatureSchema>,
    decisions: Vec<DecisionRecord>,
    batches: Vec<DataBatch>,
    /// Instances requested per feature, delivered or not.
    requested: Vec<u64>,
}

/// Rows gathered for a candidate subset from every delivered batch whose
/// decision covers it.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetView {
    pub features: FeatureSet,
    pub table: Table,
    pub labels: Vec<u8>,
    /// Number of delivered decisions whose feature set contains `features`.
    pub covering_count: usize,
    pub source_rows: Vec<usize>,
}

impl SubsetView {
    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl AcquiredStore {
    pub fn new(schema: Arc<FeatureSchema>) -> Self {
        let d = schema.d();
        AcquiredStore {
            schema,
            decisions: Vec::new(),
            batches: Vec::new(),
            requested: vec![0; d],
        }
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn decisions(&self) -> &[DecisionRecord] {
        &self.decisions
    }

    pub fn batches(&self) -> &[DataBatch] {
        &self.batches
    }

    pub fn delivered_rows(&self) -> usize {
        self.batches.iter().map(DataBatch::rows).sum()
    }

    /// Decision ids are expected to be issued densely from zero.
    pub fn record_submission(&mut self, record: DecisionRecord) {
        assert_eq!(record.decision_id as usize, self.decisions.len(), "decision ids must be sequential");
        for f in record.features.iter() {
            self.requested[f] += record.instance_count as u64;
        }
        self.decisions.push(record);
    }

    pub fn record_delivery(&mut self, batch: DataBatch) {
        let rec = &mut self.decisions[batch.decision_id as usize];
        assert_eq!(rec.status, DeliveryStatus::InFlight, "batch delivered twice");
        assert_eq!(rec.instance_count, batch.rows());
        rec.status = DeliveryStatus::Delivered;
        rec.step_delivered = Some(batch.step_delivered);
        let pos = self.batches.partition_point(|b| b.decision_id < batch.decision_id);
        self.batches.insert(pos, batch);
    }

    /// Concatenates, in decision order, the `s_prime` columns of every
    /// delivered batch whose feature set contains `s_prime`.
    pub fn extract_subset(&self, s_prime: &FeatureSet) -> SubsetView {
        let mut table = Table::empty(&self.schema, s_prime);
        let mut labels = Vec::new();
        let mut source_rows = Vec::new();
        let mut covering_count = 0;
        for b in self.batches.iter().filter(|b| s_prime.is_subset(&b.features)) {
            table.append_restricted(&b.table);
            labels.extend_from_slice(&b.labels);
            source_rows.extend_from_slice(&b.source_rows);
            covering_count += 1;
        }
        SubsetView {
            features: s_prime.clone(),
            table,
            labels,
            covering_count,
            source_rows,
        }
    }

    /// Instances collected or in flight whose decision includes `feature`.
    pub fn exploration_count(&self, feature: usize) -> u64 {
        self.requested[feature]
    }

    /// Distinct decision feature sets, in ascending set order.
    pub fn distinct_decisions(&self) -> Vec<FeatureSet> {
        self.decisions
            .iter()
            .map(|d| d.features.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Line-delimited JSON dump of the decision and batch history.
    pub fn write_history<W: Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        #[serde(tag = "event", rename_all = "snake_case")]
        enum Line<'a> {
            Decision(&'a DecisionRecord),
            Batch {
                decision_id: u64,
                step_delivered: u64,
                source_rows: &'a [usize],
                labels: &'a [u8],
            },
        }
        let io = |e| Error::io("<history>", e);
        for d in &self.decisions {
            serde_json::to_writer(&mut w, &Line::Decision(d))?;
            w.write_all(b"\n").map_err(io)?;
        }
        for b in &self.batches {
            serde_json::to_writer(
                &mut w,
                &Line::Batch {
                    decision_id: b.decision_id,
                    step_delivered: b.step_delivered,
                    source_rows: &b.source_rows,
                    labels: &b.labels,
                },
            )?;
            w.write_all(b"\n").map_err(io)?;
        }
        Ok(())
    }
}
