//! Weighted PageRank by power iteration.
//!
//! With `P` the row-normalised weight matrix, `α` the damping factor and `n`
//! the node count, each iteration computes
//!
//! ```text
//! p'(v) = (1 − α)/n + α · ( Σ_{u→v} p(u)·w(u,v)/s(u) + D/n )
//! ```
//!
//! where `s(u)` is the out-strength of `u` and `D` the total mass sitting on
//! dangling nodes (out-strength zero), spread uniformly. Iteration starts
//! from the uniform vector and stops once the L1 change drops to `tol`.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BrowseGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self { alpha: 0.85, tol: 1e-10, max_iter: 200 }
    }
}

impl PageRankParams {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    /// Score per node id.
    pub scores: Vec<f64>,
    pub alpha: f64,
    pub iterations_used: usize,
    /// L1 change of the last iteration.
    pub residual: f64,
    /// False when `max_iter` ran out before reaching `tol`.
    pub converged: bool,
    /// L1 change after each iteration.
    pub residuals: Vec<f64>,
}

impl RankVector {
    pub fn score(&self, id: NodeId) -> f64 {
        self.scores[id]
    }
}

const PARALLEL_THRESHOLD: usize = 8192;

pub fn pagerank(g: &BrowseGraph, params: &PageRankParams) -> Result<RankVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let PageRankParams { alpha, tol, max_iter } = *params;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }

    let nf = n as f64;
    let inv_out: Vec<f64> = g
        .nodes()
        .map(|u| match g.out_strength(u) {
            0 => 0.0,
            s => 1.0 / s as f64,
        })
        .collect();
    let dangling: Vec<NodeId> = g.nodes().filter(|&u| g.out_strength(u) == 0).collect();

    let mut current = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residuals = Vec::new();
    let mut converged = false;

    for _ in 0..max_iter {
        let dangling_mass: f64 = dangling.iter().map(|&u| current[u]).sum();
        let base = (1.0 - alpha) / nf + alpha * dangling_mass / nf;
        let update = |v: NodeId| -> f64 {
            let inflow: f64 = g.in_edges(v).iter().map(|&(u, w)| current[u] * w as f64 * inv_out[u]).sum();
            base + alpha * inflow
        };
        if n >= PARALLEL_THRESHOLD {
            next.par_iter_mut().enumerate().for_each(|(v, x)| *x = update(v));
        } else {
            for (v, x) in next.iter_mut().enumerate() {
                *x = update(v);
            }
        }
        let delta: f64 = current.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut current, &mut next);
        residuals.push(delta);
        if delta <= tol {
            converged = true;
            break;
        }
    }

    Ok(RankVector {
        scores: current,
        alpha,
        iterations_used: residuals.len(),
        residual: residuals.last().copied().unwrap_or(0.0),
        converged,
        residuals,
    })
}

/// Probability that a walker following edges moves from `u` to `v`:
/// `w(u,v) / s(u)`, or 0 when there is no such edge or `u` is dangling.
pub fn transition_prob(g: &BrowseGraph, u: NodeId, v: NodeId) -> Result<f64> {
    if !g.contains(u) {
        return Err(Error::UnknownNode(u));
    }
    let s = g.out_strength(u);
    if s == 0 || !g.contains(v) {
        return Ok(0.0);
    }
    Ok(g.weight(u, v).map_or(0.0, |w| w as f64 / s as f64))
}

/// Writes `url<TAB>score`, highest score first, ties by URL.
pub fn write_ranks<W: Write>(g: &BrowseGraph, ranks: &RankVector, mut out: W) -> Result<()> {
    let mut rows: Vec<(NodeId, f64)> = ranks.scores.iter().copied().enumerate().collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| g.url(a.0).cmp(g.url(b.0))));
    for (id, s) in rows {
        writeln!(out, "{}\t{}", g.url(id), s)?;
    }
    Ok(())
}

pub fn read_ranks<R: BufRead>(input: R) -> Result<Vec<(String, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let malformed = |r: &str| Error::Malformed { line: i + 1, reason: r.to_owned() };
        let (url, score) = line.split_once('\t').ok_or_else(|| malformed("expected url<TAB>score"))?;
        let score: f64 = score.parse().map_err(|_| malformed("score is not a number"))?;
        rows.push((url.to_owned(), score));
    }
    Ok(rows)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphBuilder};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_weighted(n: usize, m: usize, seed: u64) -> BrowseGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.add_node(&format!("n{i}"));
        }
        for _ in 0..m {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            b.add_transition(&format!("n{u}"), &format!("n{v}"), rng.gen_range(1..6));
        }
        b.build()
    }

    /// Dense oracle: iterate the full Google matrix until the fixed point.
    pub(crate) fn dense_oracle(g: &BrowseGraph, alpha: f64) -> Vec<f64> {
        let n = g.node_count();
        let mut m = vec![vec![0.0; n]; n];
        for u in 0..n {
            let s = g.out_strength(u) as f64;
            for v in 0..n {
                let follow = if s == 0.0 { 1.0 / n as f64 } else { g.weight(u, v).unwrap_or(0) as f64 / s };
                m[u][v] = alpha * follow + (1.0 - alpha) / n as f64;
            }
        }
        let mut p = vec![1.0 / n as f64; n];
        for _ in 0..5000 {
            let mut q = vec![0.0; n];
            for u in 0..n {
                for v in 0..n {
                    q[v] += p[u] * m[u][v];
                }
            }
            let d: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum();
            p = q;
            if d < 1e-15 {
                break;
            }
        }
        p
    }

    #[test]
    fn two_cycle_is_uniform() {
        let g = build_graph([("a", "b"), ("b", "a")]);
        let r = pagerank(&g, &PageRankParams::default()).unwrap();
        assert!((r.scores[0] - 0.5).abs() < 1e-12);
        assert!((r.scores[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn isolated_node_has_full_mass() {
        let mut b = GraphBuilder::new();
        b.add_node("solo");
        let r = pagerank(&b.build(), &PageRankParams::default()).unwrap();
        assert!((r.scores[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_graph_and_bad_params() {
        assert!(matches!(pagerank(&BrowseGraph::empty(), &PageRankParams::default()), Err(Error::EmptyGraph)));
        let g = build_graph([("a", "b")]);
        assert!(pagerank(&g, &PageRankParams::with_alpha(1.0)).is_err());
        assert!(pagerank(&g, &PageRankParams { tol: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn matches_dense_oracle() {
        for seed in 0..10 {
            let g = random_weighted(5, 8, seed);
            let r = pagerank(&g, &PageRankParams::default()).unwrap();
            let o = dense_oracle(&g, 0.85);
            for (a, b) in r.scores.iter().zip(&o) {
                assert!((a - b).abs() < 1e-8, "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let g = random_weighted(30, 60, 1);
        let r = pagerank(&g, &PageRankParams { max_iter: 2, ..Default::default() }).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_used, 2);
        assert!(r.residual > 1e-10);
    }

    #[test]
    fn transition_probabilities() {
        let mut b = GraphBuilder::new();
        b.add_transition("u", "v", 3);
        b.add_transition("u", "x", 1);
        b.add_transition("v", "x", 1);
        let g = b.build();
        let (u, v, x) = (0, 1, 2);
        assert_eq!(transition_prob(&g, u, v).unwrap(), 0.75);
        assert_eq!(transition_prob(&g, v, x).unwrap(), 1.0);
        assert_eq!(transition_prob(&g, x, u).unwrap(), 0.0);
        assert!(transition_prob(&g, 9, u).is_err());
        for seed in 0..5 {
            let g = random_weighted(20, 40, seed);
            for u in g.nodes() {
                let row: f64 = g.nodes().map(|v| transition_prob(&g, u, v).unwrap()).sum();
                assert!(row == 0.0 || (row - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_file_order() {
        let g = build_graph([("a", "c"), ("b", "c")]);
        let r = pagerank(&g, &PageRankParams::default()).unwrap();
        let mut buf = Vec::new();
        write_ranks(&g, &r, &mut buf).unwrap();
        let rows = read_ranks(&buf[..]).unwrap();
        assert_eq!(rows[0].0, "c");
        assert_eq!(rows[1].0, "a");
        assert_eq!(rows[2].0, "b");
        assert_eq!(rows[0].1, r.scores[g.node_id("c").unwrap()]);
    }
}
