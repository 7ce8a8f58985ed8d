use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A set of feature indices (0-based), kept sorted and duplicate-free.
///
/// Sorted order doubles as the canonical column order whenever a set is
/// materialized into a table or an encoded matrix. The derived `Ord` is the
/// lexicographic order on the sorted index lists.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSet(Vec<usize>);

impl FeatureSet {
    pub fn new() -> Self {
        FeatureSet(Vec::new())
    }

    /// All features `0..d`.
    pub fn full(d: usize) -> Self {
        FeatureSet((0..d).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.0.binary_search(&feature).is_ok()
    }

    /// Returns `false` if the feature was already present.
    pub fn insert(&mut self, feature: usize) -> bool {
        match self.0.binary_search(&feature) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, feature);
                true
            }
        }
    }

    pub fn with(&self, feature: usize) -> Self {
        let mut s = self.clone();
        s.insert(feature);
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Position of `feature` within the set, i.e. its column in a
    /// table restricted to this set.
    pub fn position(&self, feature: usize) -> Option<usize> {
        self.0.binary_search(&feature).ok()
    }

    pub fn is_subset(&self, other: &FeatureSet) -> bool {
        // both sorted: merge walk
        let mut it = other.0.iter();
        'outer: for &f in &self.0 {
            for &g in it.by_ref() {
                if g == f {
                    continue 'outer;
                }
                if g > f {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn difference(&self, other: &FeatureSet) -> FeatureSet {
        FeatureSet(self.0.iter().copied().filter(|f| !other.contains(*f)).collect())
    }

    pub fn is_disjoint(&self, other: &FeatureSet) -> bool {
        self.0.iter().all(|f| !other.contains(*f))
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl FromIterator<usize> for FeatureSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FeatureSet(v)
    }
}

impl From<&[usize]> for FeatureSet {
    fn from(v: &[usize]) -> Self {
        v.iter().copied().collect()
    }
}

impl<const N: usize> From<[usize; N]> for FeatureSet {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

/// Formats as `{0,3,5}`.
impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::InvalidArgument(format!("feature set `{s}` is not of the form {{i,j,..}}")))?;
        if inner.trim().is_empty() {
            return Ok(FeatureSet::new());
        }
        inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad feature index `{t}` in `{s}`")))
            })
            .collect()
    }
}
