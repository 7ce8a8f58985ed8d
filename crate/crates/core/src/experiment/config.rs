use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::ClassifierSpec;
use crate::selector::PolicyParams;
use crate::simulator::ClockedConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Feedback-based selection, one decision per step.
    #[serde(rename = "FBFS")]
    Fbfs,
    /// Random k-subset per step.
    C1,
    /// Feedback selection that waits for each batch, with larger batches.
    C2,
    /// Fixed top-k by importance on pre-collected data.
    C3,
    /// All features, `n*k/d` instances per step.
    UC1,
    /// All features, `n` instances per step.
    UC2,
    /// Feedback selection that waits for each batch, for `T_f` rounds.
    UC3,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Fbfs,
        Method::C1,
        Method::C2,
        Method::C3,
        Method::UC1,
        Method::UC2,
        Method::UC3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fbfs => "FBFS",
            Method::C1 => "C1",
            Method::C2 => "C2",
            Method::C3 => "C3",
            Method::UC1 => "UC1",
            Method::UC2 => "UC2",
            Method::UC3 => "UC3",
        }
    }

    /// Methods whose final subset comes from best-subset selection.
    pub fn uses_best_subset(self) -> bool {
        matches!(self, Method::Fbfs | Method::C1 | Method::C2 | Method::UC3)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

fn default_test_fraction() -> f64 {
    0.2
}
fn default_repetitions() -> usize {
    1
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_folds() -> usize {
    5
}
fn default_precollect() -> usize {
    1000
}

/// Every scalar of one experiment. `epsilon` and `exploration_weight` have
/// no defaults and must be given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub schema: PathBuf,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Decision steps `T_f`.
    pub steps: u64,
    /// Process delay `D` in steps.
    pub delay: u64,
    /// Instances per decision `n`.
    pub instances: usize,
    /// Features per decision.
    pub k: usize,
    pub epsilon: f64,
    pub exploration_weight: f64,
    pub method: Method,
    #[serde(default)]
    pub classifier: ClassifierSpec,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    /// Rows set aside for the importance ranking of C3.
    #[serde(default = "default_precollect")]
    pub precollect_rows: usize,
    #[serde(default)]
    pub verbose: bool,
}

impl ExperimentConfig {
    /// A config over an in-memory dataset; paths are left empty.
    pub fn in_memory(method: Method, steps: u64, delay: u64, instances: usize, k: usize) -> Self {
        let p = PolicyParams::default();
        ExperimentConfig {
            dataset: PathBuf::new(),
            schema: PathBuf::new(),
            test_fraction: default_test_fraction(),
            steps,
            delay,
            instances,
            k,
            epsilon: p.epsilon,
            exploration_weight: p.exploration_weight,
            method,
            classifier: ClassifierSpec::default(),
            repetitions: default_repetitions(),
            seed: 0,
            output: default_output(),
            cv_folds: default_folds(),
            precollect_rows: default_precollect(),
            verbose: false,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    /// Parses a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::from_toml_str(&text)?;
        c.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(c)
    }

    pub(crate) fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.dataset, &mut self.schema, &mut self.output] {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn policy(&self) -> PolicyParams {
        PolicyParams {
            epsilon: self.epsilon,
            exploration_weight: self.exploration_weight,
            k: self.k,
        }
    }

    pub fn clocked(&self) -> ClockedConfig {
        ClockedConfig {
            steps: self.steps,
            delay: self.delay,
            instances: self.instances,
            k: self.k,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        self.clocked().validate(d)?;
        self.policy().validate(d)?;
        self.classifier.validate()?;
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!("test_fraction {} not in (0,1)", self.test_fraction)));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if self.method == Method::C2 && self.steps < self.delay + 1 {
            return Err(Error::Config(format!(
                "C2 needs steps >= delay + 1 to make any decision (steps = {}, delay = {})",
                self.steps, self.delay
            )));
        }
        if self.method == Method::C3 && self.precollect_rows < 2 {
            return Err(Error::Config("C3 needs at least 2 pre-collected rows".into()));
        }
        Ok(())
    }

    /// Instances per round for C2: `round(n * T_f * (D+1) / (T_f + D))`, at least 1.
    pub fn n_c2(&self) -> usize {
        let n = self.instances as f64;
        let t = self.steps as f64;
        let d = self.delay as f64;
        ((n * t * (d + 1.0) / (t + d)).round() as usize).max(1)
    }

    /// Instances per step for UC1: `round(n * k / d)`, at least 1.
    pub fn n_uc1(&self, d: usize) -> usize {
        ((self.instances as f64 * self.k as f64 / d as f64).round() as usize).max(1)
    }

    /// Decision rounds for C2: `floor(T_f / (D+1))`.
    pub fn c2_rounds(&self) -> u64 {
        self.steps / (self.delay + 1)
    }
}

/// One parameter point of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub steps: u64,
    pub delay: u64,
    pub instances: usize,
    pub k: usize,
}

/// A base config swept over points and methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub base: ExperimentConfig,
    #[serde(default)]
    pub methods: Option<Vec<Method>>,
    #[serde(default)]
    pub points: Vec<GridPoint>,
}

impl GridConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut g = Self::from_toml_str(&text)?;
        g.base.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(g)
    }

    /// Configs in point-major, method-minor order.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        let methods = self.methods.clone().unwrap_or_else(|| vec![self.base.method]);
        self.points
            .iter()
            .flat_map(|p| {
                methods.iter().map(move |&m| ExperimentConfig {
                    steps: p.steps,
                    delay: p.delay,
                    instances: p.instances,
                    k: p.k,
                    method: m,
                    ..self.base.clone()
                })
            })
            .collect()
    }
}
