//! Random-forest regression: CART trees on bootstrap resamples with a random
//! feature subset considered at every split.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per split, capped at the number of columns.
    pub features_per_split: usize,
    /// Minimum number of samples in a leaf.
    pub min_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 500, features_per_split: 21, min_leaf: 2, bootstrap: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Nodes in pre-order; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Features used by at least one split.
    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub params: ForestParams,
    pub training_seed: u64,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Arithmetic mean of the tree predictions.
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ForestModel = serde_json::from_str(text)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::Inconsistent(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                model.version
            )));
        }
        Ok(model)
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a ForestParams,
    n_features: usize,
    nodes: Vec<Node>,
    // scratch buffer reused across split searches
    scratch: Vec<(f64, f64)>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    sse: f64,
}

fn sse(y: &[f64], idx: &[usize]) -> (f64, f64) {
    let n = idx.len() as f64;
    let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / n;
    (mean, idx.iter().map(|&i| (y[i] - mean).powi(2)).sum())
}

impl TreeBuilder<'_> {
    fn best_split_on(&mut self, feature: usize, idx: &[usize]) -> Option<BestSplit> {
        let min_leaf = self.params.min_leaf.max(1);
        self.scratch.clear();
        self.scratch.extend(idx.iter().map(|&i| (self.x[i][feature], self.y[i])));
        self.scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.scratch.len();
        let (total, total_sq) = self.scratch.iter().fold((0.0, 0.0), |(s, q), &(_, y)| (s + y, q + y * y));
        let (mut left, mut left_sq) = (0.0, 0.0);
        let mut best: Option<BestSplit> = None;
        for k in 1..n {
            let (xv, yv) = self.scratch[k - 1];
            left += yv;
            left_sq += yv * yv;
            if k < min_leaf || n - k < min_leaf || xv == self.scratch[k].0 {
                continue;
            }
            let (kl, kr) = (k as f64, (n - k) as f64);
            let right = total - left;
            let cost = (left_sq - left * left / kl) + ((total_sq - left_sq) - right * right / kr);
            if best.as_ref().is_none_or(|b| cost < b.sse) {
                let upper = self.scratch[k].0;
                let mid = xv + (upper - xv) / 2.0;
                // adjacent floats: the midpoint can round up onto `upper`
                let threshold = if mid < upper { mid } else { xv };
                best = Some(BestSplit { feature, threshold, sse: cost });
            }
        }
        best
    }

    fn is_constant(&self, feature: usize, idx: &[usize]) -> bool {
        let first = self.x[idx[0]][feature];
        idx.iter().all(|&i| self.x[i][feature] == first)
    }

    fn grow<R: Rng>(&mut self, idx: &mut [usize], rng: &mut R) -> usize {
        let (mean, node_sse) = sse(self.y, idx);
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { value: mean });
        if idx.len() < 2 * self.params.min_leaf.max(1) || node_sse <= 0.0 {
            return slot;
        }
        let mut order: Vec<usize> = (0..self.n_features).collect();
        order.shuffle(rng);
        let wanted = self.params.features_per_split.clamp(1, self.n_features);
        let mut tried = 0;
        let mut best: Option<BestSplit> = None;
        for feature in order {
            if tried >= wanted {
                break;
            }
            if self.is_constant(feature, idx) {
                continue;
            }
            tried += 1;
            if let Some(s) = self.best_split_on(feature, idx) {
                if best.as_ref().is_none_or(|b| s.sse < b.sse) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { return slot };
        let (x, feature, threshold) = (self.x, split.feature, split.threshold);
        let mut cut = 0;
        for k in 0..idx.len() {
            if x[idx[k]][feature] <= threshold {
                idx.swap(cut, k);
                cut += 1;
            }
        }
        let (l, r) = idx.split_at_mut(cut);
        let left = self.grow(l, rng);
        let right = self.grow(r, rng);
        self.nodes[slot] = Node::Split { feature, threshold, left, right };
        slot
    }
}

fn check_shape(x: &[Vec<f64>], y: &[f64], params: &ForestParams) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::Inconsistent(format!("{} feature rows for {} targets", x.len(), y.len())));
    }
    if params.n_trees == 0 {
        return Err(Error::InvalidParameter("a forest needs at least one tree".into()));
    }
    if x.is_empty() || x.len() < params.min_leaf {
        return Err(Error::NotEnoughSamples(format!("{} samples with min_leaf {}", x.len(), params.min_leaf)));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(Error::Inconsistent("feature rows must be non-empty and equally long".into()));
    }
    Ok(d)
}

pub fn train_tree<R: Rng>(x: &[Vec<f64>], y: &[f64], params: &ForestParams, rng: &mut R) -> Result<Tree> {
    let n_features = check_shape(x, y, params)?;
    let mut idx: Vec<usize> = if params.bootstrap {
        (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect()
    } else {
        (0..x.len()).collect()
    };
    let mut builder = TreeBuilder { x, y, params, n_features, nodes: Vec::new(), scratch: Vec::with_capacity(x.len()) };
    builder.grow(&mut idx, rng);
    Ok(Tree { nodes: builder.nodes })
}

/// Trains `params.n_trees` trees; tree `t` draws from a stream derived from
/// `(seed, t)`, so the result does not depend on the thread count.
pub fn train_forest(
    x: &[Vec<f64>],
    y: &[f64],
    feature_names: &[String],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    let d = check_shape(x, y, params)?;
    if feature_names.len() != d {
        return Err(Error::Inconsistent(format!("{} names for {d} features", feature_names.len())));
    }
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| train_tree(x, y, params, &mut seeds::rng(seed, &[t as u64])))
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        version: MODEL_FORMAT_VERSION,
        feature_names: feature_names.to_vec(),
        params: *params,
        training_seed: seed,
        trees,
    })
}
