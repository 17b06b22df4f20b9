//! The 62 structural features used as regression inputs.
//!
//! The roster is frozen: names, order and categories never change, so
//! feature CSVs and trained models stay comparable across runs.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{density, reciprocity, strong_components, weak_components, BrowseGraph, NodeId};
use crate::pagerank::RankVector;
use crate::stats;

pub const FEATURE_COUNT: usize = 62;
pub const DEFAULT_CLOSENESS_SAMPLE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    /// Size and connectivity.
    S,
    /// Degree assortativity.
    A,
    /// Degree distribution.
    D,
    /// Strength (weighted degree) distribution.
    W,
    /// Local PageRank distribution.
    P,
    /// Harmonic closeness.
    C,
}

impl Category {
    pub const ALL: [Category; 6] = [Category::S, Category::A, Category::D, Category::W, Category::P, Category::C];

    pub fn letter(self) -> &'static str {
        match self {
            Category::S => "S",
            Category::A => "A",
            Category::D => "D",
            Category::W => "W",
            Category::P => "P",
            Category::C => "C",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Category::S => "size and connectivity",
            Category::A => "degree assortativity",
            Category::D => "degree distribution",
            Category::W => "strength distribution",
            Category::P => "local PageRank distribution",
            Category::C => "harmonic closeness",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

impl std::str::FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.letter().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown feature category {s:?}")))
    }
}

const SUMMARY: [&str; 5] = ["mean", "median", "std", "min", "max"];
const SIDES: [&str; 3] = ["in", "out", "total"];
const ASSORT_PAIRS: [(DegreeMode, DegreeMode); 4] = [
    (DegreeMode::In, DegreeMode::In),
    (DegreeMode::In, DegreeMode::Out),
    (DegreeMode::Out, DegreeMode::In),
    (DegreeMode::Out, DegreeMode::Out),
];

/// The frozen `(name, category)` table, in feature order.
pub fn schema() -> Vec<(String, Category)> {
    let mut rows: Vec<(String, Category)> = [
        "nodes",
        "edges",
        "density",
        "reciprocity",
        "wcc_count",
        "gcc_fraction",
        "scc_count",
        "giant_scc_fraction",
        "self_loops",
    ]
    .iter()
    .map(|n| (n.to_string(), Category::S))
    .collect();
    for weighted in [false, true] {
        for (s, t) in ASSORT_PAIRS {
            let suffix = if weighted { "_weighted" } else { "" };
            rows.push((format!("assort_{s}_{t}{suffix}"), Category::A));
        }
    }
    for (prefix, cat) in [("degree", Category::D), ("strength", Category::W)] {
        for side in SIDES {
            for stat in SUMMARY {
                rows.push((format!("{side}_{prefix}_{stat}"), cat));
            }
        }
    }
    for stat in SUMMARY.iter().chain(&["skewness", "kurtosis", "gini", "entropy", "top1pct_mass"]) {
        rows.push((format!("pagerank_{stat}"), Category::P));
    }
    for stat in SUMMARY {
        rows.push((format!("closeness_{stat}"), Category::C));
    }
    rows
}

pub fn feature_names() -> Vec<String> {
    schema().into_iter().map(|(n, _)| n).collect()
}

pub fn feature_categories() -> Vec<Category> {
    schema().into_iter().map(|(_, c)| c).collect()
}

/// Indices of the features in `category`.
pub fn category_indices(category: Category) -> Vec<usize> {
    feature_categories().into_iter().enumerate().filter(|&(_, c)| c == category).map(|(i, _)| i).collect()
}

pub fn write_schema<W: Write>(mut out: W) -> Result<()> {
    writeln!(out, "index,name,category,description")?;
    for (i, (name, cat)) in schema().iter().enumerate() {
        writeln!(out, "{i},{name},{cat},{}", cat.description())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn category(&self, category: Category) -> Vec<f64> {
        category_indices(category).into_iter().map(|i| self.values[i]).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_names().iter().position(|n| n == name).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegreeMode {
    In,
    Out,
    Total,
}

impl fmt::Display for DegreeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DegreeMode::In => "in",
            DegreeMode::Out => "out",
            DegreeMode::Total => "total",
        })
    }
}

fn degree(g: &BrowseGraph, v: NodeId, mode: DegreeMode) -> f64 {
    (match mode {
        DegreeMode::In => g.in_degree(v),
        DegreeMode::Out => g.out_degree(v),
        DegreeMode::Total => g.in_degree(v) + g.out_degree(v),
    }) as f64
}

fn strength(g: &BrowseGraph, v: NodeId, mode: DegreeMode) -> f64 {
    (match mode {
        DegreeMode::In => g.in_strength(v),
        DegreeMode::Out => g.out_strength(v),
        DegreeMode::Total => g.in_strength(v) + g.out_strength(v),
    }) as f64
}

/// Pearson correlation over edges between the source's `source_mode` degree
/// and the target's `target_mode` degree. The weighted variant weights each
/// edge by its transition count.
pub fn assortativity(g: &BrowseGraph, source_mode: DegreeMode, target_mode: DegreeMode, weighted: bool) -> f64 {
    let m = g.edge_count();
    let (mut xs, mut ys, mut ws) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
    for (u, v, w) in g.edges() {
        xs.push(degree(g, u, source_mode));
        ys.push(degree(g, v, target_mode));
        ws.push(if weighted { w as f64 } else { 1.0 });
    }
    stats::weighted_pearson(&xs, &ys, &ws)
}

fn summary(xs: &[f64]) -> [f64; 5] {
    [stats::mean(xs), stats::median(xs), stats::std_dev(xs), stats::min(xs), stats::max(xs)]
}

/// Harmonic closeness `Σ_{u≠v} 1/d(v, u)` over out-going shortest paths.
pub fn harmonic_closeness(g: &BrowseGraph, source: NodeId) -> f64 {
    let mut dist = vec![u32::MAX; g.node_count()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    let mut total = 0.0;
    while let Some(u) = queue.pop_front() {
        for &(v, _) in g.out_edges(u) {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                total += 1.0 / dist[v] as f64;
                queue.push_back(v);
            }
        }
    }
    total
}

/// Closeness sources: every node when `sample_size >= n`, otherwise a
/// uniform sample without replacement, sorted by id.
pub fn closeness_sources<R: Rng + ?Sized>(n: usize, sample_size: usize, rng: &mut R) -> Vec<NodeId> {
    if sample_size >= n {
        return (0..n).collect();
    }
    let mut picked = sample(rng, n, sample_size).into_vec();
    picked.sort_unstable();
    picked
}

pub fn extract_features<R: Rng + ?Sized>(
    g: &BrowseGraph,
    local_pr: &RankVector,
    closeness_sample: usize,
    rng: &mut R,
) -> Result<FeatureVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if local_pr.scores.len() != n {
        return Err(Error::Inconsistent(format!(
            "rank vector has {} entries for a graph of {n} nodes",
            local_pr.scores.len()
        )));
    }
    let mut values = Vec::with_capacity(FEATURE_COUNT);

    let wcc = weak_components(g);
    let scc = strong_components(g);
    values.extend([
        n as f64,
        g.edge_count() as f64,
        density(n, g.edge_count()),
        reciprocity(g),
        wcc.count() as f64,
        wcc.largest() as f64 / n as f64,
        scc.count() as f64,
        scc.largest() as f64 / n as f64,
        g.self_loop_count() as f64,
    ]);

    for weighted in [false, true] {
        for (s, t) in ASSORT_PAIRS {
            values.push(assortativity(g, s, t, weighted));
        }
    }

    for per_node in [degree as fn(&BrowseGraph, NodeId, DegreeMode) -> f64, strength] {
        for mode in [DegreeMode::In, DegreeMode::Out, DegreeMode::Total] {
            let xs: Vec<f64> = g.nodes().map(|v| per_node(g, v, mode)).collect();
            values.extend(summary(&xs));
        }
    }

    let pr = &local_pr.scores;
    let mut sorted = pr.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top = (n as f64 * 0.01).ceil() as usize;
    values.extend(summary(pr));
    values.extend([
        stats::skewness(pr),
        stats::excess_kurtosis(pr),
        stats::gini(pr),
        stats::entropy(pr),
        sorted[..top].iter().sum(),
    ]);

    let sources = closeness_sources(n, closeness_sample, rng);
    let closeness: Vec<f64> = sources.par_iter().map(|&s| harmonic_closeness(g, s)).collect();
    values.extend(summary(&closeness));

    debug_assert_eq!(values.len(), FEATURE_COUNT);
    Ok(FeatureVector { values })
}

/// CSV with a `graph` column followed by the 62 named features.
pub fn write_features_csv<W: Write>(rows: &[(&str, &FeatureVector)], mut out: W) -> Result<()> {
    write!(out, "graph")?;
    for name in feature_names() {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for (id, fv) in rows {
        write!(out, "{id}")?;
        for v in &fv.values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
