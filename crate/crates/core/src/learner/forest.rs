//! Bagged CART ensemble with Gini splits.
//!
//! Columns are ranked once per fit: each value is replaced by the index of
//! its distinct value, so split search over a node is a histogram pass
//! (or a sort, for nodes much smaller than the column's distinct count).
//! Both paths consider the same cut points and pick the same split.

use rand::Rng as _;

use crate::matrix::Matrix;
use crate::seed::{self, Rng};

use super::ClassifierSpec;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Leaf {
        class: u8,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub kind: NodeKind,
    /// Bootstrap samples reaching the node (with multiplicity).
    pub samples: u32,
    pub positives: u32,
    /// `samples * gini(node)` minus the same quantity summed over the
    /// children; zero for leaves.
    pub impurity_decrease: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

/// `n * gini` for a node with `n` samples of which `pos` are positive.
#[inline]
pub fn weighted_gini(n: u32, pos: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let p = pos as f64;
    2.0 * p * (n - p) / n
}

impl Tree {
    /// A single leaf predicting `class`.
    pub fn constant(class: u8) -> Self {
        Tree {
            nodes: vec![TreeNode {
                kind: NodeKind::Leaf { class },
                samples: 0,
                positives: 0,
                impurity_decrease: 0.0,
            }],
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let mut i = 0;
        loop {
            match &self.nodes[i].kind {
                NodeKind::Leaf { class } => return *class,
                NodeKind::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    trees: Vec<Tree>,
    width: usize,
}

impl Forest {
    pub fn from_trees(trees: Vec<Tree>, width: usize) -> Self {
        assert!(!trees.is_empty());
        Forest { trees, width }
    }

    pub fn fit(spec: &ClassifierSpec, x: &Matrix, y: &[u8]) -> Self {
        assert_eq!(x.rows(), y.len());
        assert!(x.rows() > 0 && x.cols() > 0);
        let ranked = Ranked::new(x);
        let mtry = ((x.cols() as f64).sqrt().floor() as usize).max(1);
        let max_bins = ranked.values.iter().map(Vec::len).max().unwrap_or(1);
        let mut scratch = Scratch {
            hist_n: vec![0; max_bins],
            hist_p: vec![0; max_bins],
            pairs: Vec::with_capacity(x.rows()),
            order: (0..x.cols()).collect(),
        };
        let trees = (0..spec.trees)
            .map(|t| {
                let mut rng = seed::rng(seed::derive_seed(spec.seed, &[t as u64]));
                let m = x.rows();
                let mut samples: Vec<u32> = (0..m).map(|_| rng.gen_range(0..m as u32)).collect();
                let mut b = Builder {
                    ranked: &ranked,
                    y,
                    max_depth: spec.max_depth,
                    min_leaf: spec.min_samples_leaf.max(1) as u32,
                    mtry,
                    rng,
                    scratch: &mut scratch,
                    nodes: Vec::new(),
                };
                b.build(&mut samples, 0);
                Tree { nodes: b.nodes }
            })
            .collect();
        Forest { trees, width: x.cols() }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Majority vote; an even split goes to class 0.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let ones = self.trees.iter().filter(|t| t.predict_row(row) == 1).count();
        u8::from(2 * ones > self.trees.len())
    }

    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        assert_eq!(x.cols(), self.width);
        (0..x.rows()).map(|r| self.predict_row(x.row(r))).collect()
    }

    /// Total impurity decrease per encoded column, summed over trees.
    pub fn importances(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.width];
        for t in &self.trees {
            for n in &t.nodes {
                if let NodeKind::Split { feature, .. } = n.kind {
                    out[feature] += n.impurity_decrease;
                }
            }
        }
        out
    }
}

struct Ranked {
    /// Distinct sorted values per column.
    values: Vec<Vec<f64>>,
    /// Rank of each row's value, column-major.
    ranks: Vec<Vec<u32>>,
}

impl Ranked {
    fn new(x: &Matrix) -> Self {
        let mut values = Vec::with_capacity(x.cols());
        let mut ranks = Vec::with_capacity(x.cols());
        let mut idx: Vec<usize> = Vec::with_capacity(x.rows());
        for c in 0..x.cols() {
            let col: Vec<f64> = x.column(c).collect();
            idx.clear();
            idx.extend(0..x.rows());
            idx.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
            let mut distinct = Vec::new();
            let mut rank = vec![0u32; x.rows()];
            for &i in &idx {
                if distinct.last() != Some(&col[i]) {
                    distinct.push(col[i]);
                }
                rank[i] = (distinct.len() - 1) as u32;
            }
            values.push(distinct);
            ranks.push(rank);
        }
        Ranked { values, ranks }
    }
}

struct Scratch {
    hist_n: Vec<u32>,
    hist_p: Vec<u32>,
    pairs: Vec<(u32, u8)>,
    order: Vec<usize>,
}

struct Builder<'a> {
    ranked: &'a Ranked,
    y: &'a [u8],
    max_depth: usize,
    min_leaf: u32,
    mtry: usize,
    rng: Rng,
    scratch: &'a mut Scratch,
    nodes: Vec<TreeNode>,
}

#[derive(Clone, Copy)]
struct Cut {
    feature: usize,
    /// Rows with rank < `rank` go left.
    rank: u32,
    /// Rank of the largest value on the left.
    left_rank: u32,
    score: f64,
    left_n: u32,
    left_p: u32,
}

impl Builder<'_> {
    fn build(&mut self, samples: &mut [u32], depth: usize) -> usize {
        let n = samples.len() as u32;
        let pos = samples.iter().map(|&s| self.y[s as usize] as u32).sum::<u32>();
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            kind: NodeKind::Leaf {
                class: u8::from(2 * pos > n),
            },
            samples: n,
            positives: pos,
            impurity_decrease: 0.0,
        });
        if depth >= self.max_depth || pos == 0 || pos == n || n < 2 * self.min_leaf {
            return id;
        }
        let Some(cut) = self.best_cut(samples, n, pos) else {
            return id;
        };
        let ranks = &self.ranked.ranks[cut.feature];
        let mut split = 0;
        for i in 0..samples.len() {
            if ranks[samples[i] as usize] < cut.rank {
                samples.swap(i, split);
                split += 1;
            }
        }
        debug_assert_eq!(split as u32, cut.left_n);
        let (l, r) = samples.split_at_mut(split);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);

        let vals = &self.ranked.values[cut.feature];
        let lo = vals[cut.left_rank as usize];
        let hi = vals[cut.rank as usize];
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi {
            threshold = lo;
        }
        let node = &mut self.nodes[id];
        node.kind = NodeKind::Split {
            feature: cut.feature,
            threshold,
            left,
            right,
        };
        node.impurity_decrease =
            weighted_gini(n, pos) - weighted_gini(cut.left_n, cut.left_p) - weighted_gini(n - cut.left_n, pos - cut.left_p);
        id
    }

    /// Visits columns in random order until `mtry` columns that vary within
    /// the node have been scored.
    fn best_cut(&mut self, samples: &[u32], n: u32, pos: u32) -> Option<Cut> {
        let width = self.scratch.order.len();
        let mut best: Option<Cut> = None;
        let mut scored = 0;
        for i in 0..width {
            if scored == self.mtry {
                break;
            }
            let j = self.rng.gen_range(i..width);
            self.scratch.order.swap(i, j);
            let f = self.scratch.order[i];
            if self.ranked.values[f].len() < 2 {
                continue;
            }
            if self.scan(f, samples, n, pos, &mut best) {
                scored += 1;
            }
        }
        best
    }

    /// Scores every cut of column `f`; returns false if the column is
    /// constant within the node.
    fn scan(&mut self, f: usize, samples: &[u32], n: u32, pos: u32, best: &mut Option<Cut>) -> bool {
        let ranks = &self.ranked.ranks[f];
        let bins = self.ranked.values[f].len();
        let min_leaf = self.min_leaf;
        let mut distinct = 0usize;
        let consider = |rank: u32, left_rank: u32, ln: u32, lp: u32, best: &mut Option<Cut>| {
            let rn = n - ln;
            if ln < min_leaf || rn < min_leaf {
                return;
            }
            let score = weighted_gini(ln, lp) + weighted_gini(rn, pos - lp);
            if best.map_or(true, |b| score < b.score) {
                *best = Some(Cut {
                    feature: f,
                    rank,
                    left_rank,
                    score,
                    left_n: ln,
                    left_p: lp,
                });
            }
        };

        if bins <= 4 * samples.len() {
            let s = &mut *self.scratch;
            for &i in samples {
                let r = ranks[i as usize] as usize;
                s.hist_n[r] += 1;
                s.hist_p[r] += self.y[i as usize] as u32;
            }
            let (mut cn, mut cp) = (0u32, 0u32);
            let mut prev: Option<u32> = None;
            for r in 0..bins {
                let hn = s.hist_n[r];
                if hn == 0 {
                    continue;
                }
                if let Some(p) = prev {
                    consider(r as u32, p, cn, cp, best);
                }
                distinct += 1;
                cn += hn;
                cp += s.hist_p[r];
                s.hist_n[r] = 0;
                s.hist_p[r] = 0;
                prev = Some(r as u32);
            }
        } else {
            let pairs = &mut self.scratch.pairs;
            pairs.clear();
            pairs.extend(samples.iter().map(|&i| (ranks[i as usize], self.y[i as usize])));
            pairs.sort_unstable_by_key(|p| p.0);
            let (mut cn, mut cp) = (0u32, 0u32);
            let mut i = 0;
            while i < pairs.len() {
                let r = pairs[i].0;
                if i > 0 {
                    consider(r, pairs[i - 1].0, cn, cp, best);
                }
                distinct += 1;
                while i < pairs.len() && pairs[i].0 == r {
                    cn += 1;
                    cp += pairs[i].1 as u32;
                    i += 1;
                }
            }
        }
        distinct >= 2
    }
}
