//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use delayfs::simulator::{step, Simulator};
use delayfs::{encode, synthesize, AcquiredStore, Dataset, EncodedMatrix, FeatureSet, SynthSpec};

/// Synthetic data with six numeric and four categorical features, label
/// driven by feature 0 with 5% noise.
pub fn dataset(rows: usize, seed: u64) -> Arc<Dataset> {
    let spec = SynthSpec {
        rows,
        numeric: 6,
        categorical: 4,
        informative: 0,
        noise: 0.05,
    };
    Arc::new(synthesize(&spec, seed).expect("valid synthetic spec"))
}

/// The whole dataset encoded over every feature.
pub fn encoded(ds: &Dataset) -> EncodedMatrix {
    let all = ds.schema().all_features();
    encode(ds.table(), &all, ds.schema()).expect("encodable")
}

/// A store after `decisions` delivered batches of `per_batch` rows, cycling
/// through overlapping three-feature sets.
pub fn store(ds: &Arc<Dataset>, decisions: usize, per_batch: usize) -> AcquiredStore {
    let d = ds.schema().d();
    let mut sim = Simulator::new(ds.clone(), None, 0, 1);
    let mut store = AcquiredStore::new(ds.schema().clone());
    for i in 0..decisions {
        let set: FeatureSet = [i % d, (i + 1) % d, (i * 3 + 2) % d].into_iter().collect();
        store.record_submission(sim.submit(set, per_batch).expect("pool large enough"));
        step(&mut sim, &mut store);
    }
    store
}
