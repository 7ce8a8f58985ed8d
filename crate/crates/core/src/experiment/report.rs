use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::runner::{RunOutcome, RunResult};
use crate::error::{Error, Result};

/// Descriptive statistics of one metric over runs. `std` is the sample
/// standard deviation (zero for a single run); quartiles interpolate
/// linearly between order statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Stats {
    /// Statistics of `values`, which must be non-empty.
    pub fn of(values: &[f64]) -> Stats {
        assert!(!values.is_empty());
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Stats {
            mean,
            std,
            median: quantile(&sorted, 0.5),
            q1: quantile(&sorted, 0.25),
            q3: quantile(&sorted, 0.75),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        }
    }
}

/// The parameter point and method a run belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub steps: u64,
    pub delay: u64,
    pub instances: usize,
    pub k: usize,
    pub method: Method,
}

impl GroupKey {
    pub fn of(r: &RunResult) -> Self {
        GroupKey {
            steps: r.steps,
            delay: r.delay,
            instances: r.instances,
            k: r.k,
            method: r.method,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Cv,
    Test,
}

/// Per-run precision/recall for box and scatter plots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRecord {
    pub method: Method,
    pub steps: u64,
    pub delay: u64,
    pub instances: usize,
    pub k: usize,
    pub seed: u64,
    pub mode: EvalMode,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateResult {
    pub key: GroupKey,
    pub seeds: Vec<u64>,
    pub cv_f1: Stats,
    pub cv_precision: Stats,
    pub cv_recall: Stats,
    pub test_f1: Stats,
    pub test_precision: Stats,
    pub test_recall: Stats,
    pub points: Vec<PlotRecord>,
}

impl AggregateResult {
    pub fn runs(&self) -> usize {
        self.seeds.len()
    }
}

/// Groups runs by parameter point and method, in order of first appearance.
/// Within a group runs are taken in seed order, so the statistics do not
/// depend on the order runs finished in.
pub fn aggregate(results: &[RunResult]) -> Vec<AggregateResult> {
    let mut keys: Vec<GroupKey> = Vec::new();
    for r in results {
        let k = GroupKey::of(r);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|key| {
            let mut group: Vec<&RunResult> = results.iter().filter(|r| GroupKey::of(r) == key).collect();
            group.sort_by_key(|r| r.seed);
            let stat = |f: fn(&RunResult) -> f64| Stats::of(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            AggregateResult {
                key,
                seeds: group.iter().map(|r| r.seed).collect(),
                cv_f1: stat(|r| r.cv_f1),
                cv_precision: stat(|r| r.cv_precision),
                cv_recall: stat(|r| r.cv_recall),
                test_f1: stat(|r| r.test_f1),
                test_precision: stat(|r| r.test_precision),
                test_recall: stat(|r| r.test_recall),
                points: emit_plot_data(group.iter().copied()),
            }
        })
        .collect()
}

/// Two records per run, CV then test.
pub fn emit_plot_data<'a>(results: impl IntoIterator<Item = &'a RunResult>) -> Vec<PlotRecord> {
    results
        .into_iter()
        .flat_map(|r| {
            let rec = |mode, precision, recall, f1| PlotRecord {
                method: r.method,
                steps: r.steps,
                delay: r.delay,
                instances: r.instances,
                k: r.k,
                seed: r.seed,
                mode,
                precision,
                recall,
                f1,
            };
            [
                rec(EvalMode::Cv, r.cv_precision, r.cv_recall, r.cv_f1),
                rec(EvalMode::Test, r.test_precision, r.test_recall, r.test_f1),
            ]
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

pub fn write_runs<W: Write>(results: &[RunResult], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in results {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<runs>", e))?;
    Ok(())
}

pub fn read_runs<R: Read>(r: R) -> Result<Vec<RunResult>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunResult>> {
    read_runs(File::open(path).map_err(|e| Error::io(path, e))?)
}

const TABLE_HEADER: [&str; 10] = [
    "steps", "delay", "instances", "k", "method", "runs", "cv_mean", "cv_std", "test_mean", "test_std",
];

/// One row per parameter point and method: f1 mean and std for both
/// evaluation modes.
pub fn emit_tables<W: Write>(aggregates: &[AggregateResult], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(TABLE_HEADER)?;
    for a in aggregates {
        let k = &a.key;
        w.write_record([
            k.steps.to_string(),
            k.delay.to_string(),
            k.instances.to_string(),
            k.k.to_string(),
            k.method.to_string(),
            a.runs().to_string(),
            a.cv_f1.mean.to_string(),
            a.cv_f1.std.to_string(),
            a.test_f1.mean.to_string(),
            a.test_f1.std.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<table>", e))?;
    Ok(())
}

/// Every statistic of every metric, long format.
pub fn write_summary<W: Write>(aggregates: &[AggregateResult], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "steps", "delay", "instances", "k", "method", "metric", "mean", "std", "median", "q1", "q3", "min", "max",
    ])?;
    for a in aggregates {
        let metrics = [
            ("cv_f1", a.cv_f1),
            ("cv_precision", a.cv_precision),
            ("cv_recall", a.cv_recall),
            ("test_f1", a.test_f1),
            ("test_precision", a.test_precision),
            ("test_recall", a.test_recall),
        ];
        for (metric, s) in metrics {
            let k = a.key;
            let mut rec = vec![
                k.steps.to_string(),
                k.delay.to_string(),
                k.instances.to_string(),
                k.k.to_string(),
                k.method.to_string(),
                metric.to_string(),
            ];
            rec.extend([s.mean, s.std, s.median, s.q1, s.q3, s.min, s.max].map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io("<summary>", e))?;
    Ok(())
}

pub fn write_plot_data<W: Write>(records: &[PlotRecord], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<plotdata>", e))?;
    Ok(())
}

pub fn read_plot_data<R: Read>(r: R) -> Result<Vec<PlotRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes `runs.csv`, `aggregate.csv`, `summary.csv`, `plotdata.csv` and
/// `timing.csv` into `dir`. Only `timing.csv` carries wall-clock data.
pub fn write_outputs(dir: &Path, results: &[RunResult]) -> Result<Vec<AggregateResult>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_runs(results, create(&dir.join("runs.csv"))?)?;
    let aggregates = write_reports(dir, results)?;
    let mut t = csv_writer(&dir.join("timing.csv"))?;
    t.write_record(["method", "steps", "delay", "instances", "k", "seed", "seconds"])?;
    for r in results {
        t.write_record([
            r.method.to_string(),
            r.steps.to_string(),
            r.delay.to_string(),
            r.instances.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            format!("{:.3}", r.seconds),
        ])?;
    }
    t.flush().map_err(|e| Error::io(dir, e))?;
    Ok(aggregates)
}

/// The files derivable from `runs.csv` alone.
pub fn write_reports(dir: &Path, results: &[RunResult]) -> Result<Vec<AggregateResult>> {
    let aggregates = aggregate(results);
    emit_tables(&aggregates, create(&dir.join("aggregate.csv"))?)?;
    write_summary(&aggregates, create(&dir.join("summary.csv"))?)?;
    let points: Vec<PlotRecord> = aggregates.iter().flat_map(|a| a.points.iter().cloned()).collect();
    write_plot_data(&points, create(&dir.join("plotdata.csv"))?)?;
    Ok(aggregates)
}

/// JSON lines: the run header, every selection stage with its reward
/// breakdown, the decision and delivery history, best-subset candidates,
/// and the result. Contains no timing, so reruns are byte-identical.
pub fn write_run_log(path: &Path, config: &ExperimentConfig, outcome: &RunOutcome) -> Result<()> {
    #[derive(Serialize)]
    #[serde(tag = "event", rename_all = "snake_case")]
    enum Line<'a> {
        Run {
            method: Method,
            seed: u64,
            steps: u64,
            delay: u64,
            instances: usize,
            k: usize,
            epsilon: f64,
            exploration_weight: f64,
        },
        Stage {
            step: u64,
            #[serde(flatten)]
            trace: &'a crate::selector::StageTrace,
        },
        Importance {
            per_feature: &'a [f64],
        },
        Candidate {
            features: &'a crate::features::FeatureSet,
            rows: usize,
            cv_f1: f64,
            weighted: f64,
        },
        Result(&'a RunResult),
    }
    let mut w = create(path)?;
    let line = |w: &mut BufWriter<File>, l: &Line| -> Result<()> {
        serde_json::to_writer(&mut *w, l)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))
    };
    let r = &outcome.result;
    line(
        &mut w,
        &Line::Run {
            method: r.method,
            seed: r.seed,
            steps: r.steps,
            delay: r.delay,
            instances: r.instances,
            k: r.k,
            epsilon: config.epsilon,
            exploration_weight: config.exploration_weight,
        },
    )?;
    for (step, sel) in &outcome.selections {
        for trace in &sel.stages {
            line(&mut w, &Line::Stage { step: *step, trace })?;
        }
    }
    if let Some(imp) = &outcome.importance {
        line(
            &mut w,
            &Line::Importance {
                per_feature: &imp.per_feature,
            },
        )?;
    }
    outcome.store.write_history(&mut w)?;
    if let Some(best) = &outcome.best {
        for c in &best.candidates {
            line(
                &mut w,
                &Line::Candidate {
                    features: &c.features,
                    rows: c.rows,
                    cv_f1: c.cv.f1,
                    weighted: c.weighted,
                },
            )?;
        }
    }
    line(&mut w, &Line::Result(r))?;
    w.flush().map_err(|e| Error::io(path, e))
}
