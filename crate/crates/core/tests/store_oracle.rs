//! `extract_subset` against a brute-force scan, plus the store's
//! monotonicity properties, on randomized decision histories.

use std::collections::HashSet;
use std::sync::Arc;

use delayfs::dataset::Column;
use delayfs::simulator::{step, Simulator};
use delayfs::{synthesize, AcquiredStore, Dataset, FeatureSet, SynthSpec};
use proptest::prelude::*;

fn pool(d: usize, seed: u64) -> Arc<Dataset> {
    let numeric = d.div_ceil(2);
    Arc::new(
        synthesize(
            &SynthSpec {
                rows: 2_000,
                numeric,
                categorical: d - numeric,
                informative: 0,
                noise: 0.1,
            },
            seed,
        )
        .unwrap(),
    )
}

fn cell(c: &Column, r: usize) -> f64 {
    match c {
        Column::Numeric(v) => v[r],
        Column::Categorical(v) => v[r] as f64,
    }
}

#[derive(Clone, Debug)]
struct History {
    d: usize,
    delay: u64,
    /// Feature mask and row count per step.
    decisions: Vec<(Vec<bool>, usize)>,
    query: Vec<bool>,
    seed: u64,
}

fn history() -> impl Strategy<Value = History> {
    (2usize..=8, 0u64..4, any::<u64>()).prop_flat_map(|(d, delay, seed)| {
        let decision = (prop::collection::vec(any::<bool>(), d), 1usize..=12)
            .prop_filter("non-empty decision", |(m, _)| m.iter().any(|&b| b));
        (
            prop::collection::vec(decision, 1..=50),
            prop::collection::vec(any::<bool>(), d).prop_filter("non-empty query", |m| m.iter().any(|&b| b)),
        )
            .prop_map(move |(decisions, query)| History {
                d,
                delay,
                decisions,
                query,
                seed,
            })
    })
}

fn mask_set(m: &[bool]) -> FeatureSet {
    m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// Runs the history and returns the store plus the pool.
fn replay(h: &History) -> (AcquiredStore, Arc<Dataset>) {
    let src = pool(h.d, h.seed % 7);
    let mut sim = Simulator::new(src.clone(), None, h.delay, h.seed);
    let mut store = AcquiredStore::new(src.schema().clone());
    for (mask, n) in &h.decisions {
        store.record_submission(sim.submit(mask_set(mask), *n).unwrap());
        step(&mut sim, &mut store);
    }
    (store, src)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn extraction_matches_brute_force(h in history()) {
        let (store, src) = replay(&h);
        let query = mask_set(&h.query);
        let wanted: HashSet<usize> = query.iter().collect();
        let view = store.extract_subset(&query);

        let mut rows = Vec::new();
        let mut covering = 0;
        for b in store.batches() {
            let have: HashSet<usize> = b.features.iter().collect();
            if wanted.is_subset(&have) {
                covering += 1;
                rows.extend_from_slice(&b.source_rows);
            }
        }
        prop_assert_eq!(view.covering_count, covering);
        prop_assert_eq!(&view.source_rows, &rows);
        let labels: Vec<u8> = rows.iter().map(|&r| src.labels()[r]).collect();
        prop_assert_eq!(&view.labels, &labels);
        for f in query.iter() {
            let got = view.table.column(f).unwrap();
            let raw = src.table().column(f).unwrap();
            for (i, &r) in rows.iter().enumerate() {
                prop_assert_eq!(cell(got, i).to_bits(), cell(raw, r).to_bits());
            }
        }
    }

    #[test]
    fn supersets_are_covered_by_fewer_decisions(h in history(), extra in 0usize..8) {
        let (store, _) = replay(&h);
        let small = mask_set(&h.query);
        let big = small.with(extra % h.d);
        let a = store.extract_subset(&small);
        let b = store.extract_subset(&big);
        prop_assert!(a.rows() >= b.rows());
        prop_assert!(a.covering_count >= b.covering_count);
        let rows: HashSet<usize> = a.source_rows.iter().copied().collect();
        prop_assert!(b.source_rows.iter().all(|r| rows.contains(r)));
    }

    #[test]
    fn rows_grow_with_time_and_counts_bound_deliveries(h in history()) {
        let src = pool(h.d, h.seed % 7);
        let query = mask_set(&h.query);
        let mut sim = Simulator::new(src.clone(), None, h.delay, h.seed);
        let mut store = AcquiredStore::new(src.schema().clone());
        let mut last = 0;
        for (mask, n) in &h.decisions {
            store.record_submission(sim.submit(mask_set(mask), *n).unwrap());
            step(&mut sim, &mut store);
            let now = store.extract_subset(&query).rows();
            prop_assert!(now >= last);
            last = now;
            for f in 0..h.d {
                let delivered: usize = store
                    .batches()
                    .iter()
                    .filter(|b| b.features.contains(f))
                    .map(|b| b.rows())
                    .sum();
                prop_assert!(store.exploration_count(f) >= delivered as u64);
            }
        }
    }
}
