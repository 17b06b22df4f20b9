//! Identifying a surfer's source graph from its walk.
//!
//! A random surfer walks one candidate graph (the true one): with
//! probability `α` it follows an out-edge chosen proportionally to its
//! weight, otherwise (or when stuck on a dangling page) it teleports to a
//! uniformly random page of that graph. An observer that sees only the
//! visited URLs scores every candidate by the log-likelihood of each
//! observed move:
//!
//! - if the previous page is missing from the candidate or dangling there,
//!   the move has probability `1/n`;
//! - otherwise it has probability `(1 − α)/n`, plus `α·P(prev, next)` when
//!   `next` is a successor of `prev` in the candidate.
//!
//! `n` is the size of the page universe: by default the number of distinct
//! URLs over all candidates, or each candidate's own node count.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BrowseGraph, NodeId};
use crate::pagerank::transition_prob;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum UniverseSize {
    /// Distinct URLs over all candidates, shared by every candidate.
    #[default]
    Global,
    /// Each candidate's own node count.
    PerCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurferParams {
    pub alpha: f64,
    pub max_steps: usize,
    /// Stop once the best log-likelihood leads the runner-up by this much.
    pub margin_threshold: f64,
    pub universe: UniverseSize,
}

impl Default for SurferParams {
    fn default() -> Self {
        Self { alpha: 0.85, max_steps: 20, margin_threshold: std::f64::consts::LN_2, universe: UniverseSize::Global }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurferTrace {
    pub true_graph_index: usize,
    /// Visited URLs, starting node first.
    pub visited: Vec<String>,
    /// Running log-likelihood per candidate after the last step.
    pub log_probs: Vec<f64>,
    /// `history[s]` holds the log-likelihoods after `s` steps; `history[0]`
    /// is all zeros.
    pub history: Vec<Vec<f64>>,
}

impl SurferTrace {
    /// Gap between the true candidate and the best other one, per step.
    pub fn gaps(&self) -> Vec<f64> {
        self.history.iter().map(|lp| gap(lp, self.true_graph_index)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurferVerdict {
    pub identified_index: usize,
    pub steps_taken: usize,
    /// Best minus second-best log-likelihood; infinite with one candidate.
    pub margin: f64,
    pub correct: bool,
}

/// One move of the surfer on `g` from `current`.
pub fn walk_step<R: Rng + ?Sized>(g: &BrowseGraph, current: NodeId, alpha: f64, rng: &mut R) -> Result<NodeId> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if !g.contains(current) {
        return Err(Error::UnknownNode(current));
    }
    let strength = g.out_strength(current);
    if strength > 0 && rng.gen::<f64>() < alpha {
        let mut pick = rng.gen_range(0..strength);
        for &(v, w) in g.out_edges(current) {
            if pick < w {
                return Ok(v);
            }
            pick -= w;
        }
        unreachable!("weights sum to out-strength");
    }
    Ok(rng.gen_range(0..n))
}

/// Likelihood of observing `prev → next` for a surfer on `g`, with the
/// moves given as node ids of `g` (`None` when the URL is not in `g`).
pub fn step_likelihood_ids(
    g: &BrowseGraph,
    prev: Option<NodeId>,
    next: Option<NodeId>,
    alpha: f64,
    n_universe: usize,
) -> f64 {
    let n = n_universe as f64;
    let prev = match prev {
        Some(p) if g.contains(p) && g.out_strength(p) > 0 => p,
        _ => return 1.0 / n,
    };
    let mut p = (1.0 - alpha) / n;
    if let Some(next) = next {
        p += alpha * transition_prob(g, prev, next).unwrap_or(0.0);
    }
    p
}

/// Likelihood of observing the move `prev_url → next_url` on `g`.
pub fn step_likelihood(g: &BrowseGraph, prev_url: &str, next_url: &str, alpha: f64, n_universe: usize) -> f64 {
    step_likelihood_ids(g, g.node_id(prev_url), g.node_id(next_url), alpha, n_universe)
}

/// `log p_true − max_{j≠true} log p_j`; 0 when there is no other candidate.
fn gap(log_probs: &[f64], true_index: usize) -> f64 {
    let best_other = log_probs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != true_index)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if best_other == f64::NEG_INFINITY {
        0.0
    } else {
        log_probs[true_index] - best_other
    }
}

/// True candidate strictly ahead of every other one.
fn strictly_ahead(log_probs: &[f64], true_index: usize) -> bool {
    log_probs.iter().enumerate().all(|(i, &v)| i == true_index || log_probs[true_index] > v)
}

fn top_two(log_probs: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in log_probs.iter().enumerate() {
        if v > log_probs[best] {
            best = i;
        }
    }
    let second =
        log_probs.iter().enumerate().filter(|&(i, _)| i != best).map(|(_, &v)| v).fold(f64::NEG_INFINITY, f64::max);
    (best, log_probs[best] - second)
}

/// Precomputed URL translation from the true graph into every candidate.
struct Observer<'a> {
    candidates: &'a [&'a BrowseGraph],
    true_index: usize,
    /// `maps[c][v]`: id in candidate `c` of true-graph node `v`.
    maps: Vec<Vec<Option<NodeId>>>,
    universe: Vec<usize>,
}

impl<'a> Observer<'a> {
    fn new(candidates: &'a [&'a BrowseGraph], true_index: usize, universe: UniverseSize) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidParameter("no candidate graphs".into()));
        }
        let truth = *candidates
            .get(true_index)
            .ok_or_else(|| Error::InvalidParameter(format!("true index {true_index} out of range")))?;
        if truth.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let maps = candidates.iter().map(|c| truth.urls().iter().map(|u| c.node_id(u)).collect()).collect();
        let universe = match universe {
            UniverseSize::Global => {
                let all: HashSet<&str> = candidates.iter().flat_map(|c| c.urls().iter().map(String::as_str)).collect();
                vec![all.len(); candidates.len()]
            }
            UniverseSize::PerCandidate => candidates.iter().map(|c| c.node_count().max(1)).collect(),
        };
        Ok(Self { candidates, true_index, maps, universe })
    }

    fn run<R: Rng + ?Sized>(&self, params: &SurferParams, rng: &mut R) -> Result<(SurferTrace, SurferVerdict)> {
        let truth = self.candidates[self.true_index];
        let k = self.candidates.len();
        let mut current = rng.gen_range(0..truth.node_count());
        let mut visited = vec![truth.url(current).to_owned()];
        let mut log_probs = vec![0.0; k];
        let mut history = vec![log_probs.clone()];
        let mut steps = 0;
        while steps < params.max_steps {
            let next = walk_step(truth, current, params.alpha, rng)?;
            for (c, lp) in log_probs.iter_mut().enumerate() {
                let p = step_likelihood_ids(
                    self.candidates[c],
                    self.maps[c][current],
                    self.maps[c][next],
                    params.alpha,
                    self.universe[c],
                );
                *lp += p.ln();
            }
            steps += 1;
            current = next;
            visited.push(truth.url(current).to_owned());
            history.push(log_probs.clone());
            let (_, margin) = top_two(&log_probs);
            if margin >= params.margin_threshold {
                break;
            }
        }
        let (identified_index, margin) = top_two(&log_probs);
        let verdict = SurferVerdict {
            identified_index,
            steps_taken: steps,
            margin,
            correct: identified_index == self.true_index && strictly_ahead(&log_probs, self.true_index),
        };
        let trace = SurferTrace { true_graph_index: self.true_index, visited, log_probs, history };
        Ok((trace, verdict))
    }
}

/// Walks `candidates[true_index]` from a uniformly random page and scores
/// every candidate after each move, stopping early once the leader's margin
/// reaches `params.margin_threshold`.
pub fn identify_referrer<R: Rng + ?Sized>(
    candidates: &[&BrowseGraph],
    true_index: usize,
    params: &SurferParams,
    rng: &mut R,
) -> Result<(SurferTrace, SurferVerdict)> {
    Observer::new(candidates, true_index, params.universe)?.run(params, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurferCurves {
    /// `mean_gap[t][s]`: mean over runs of the true-vs-best-other gap after
    /// `s` steps, surfer on graph `t`.
    pub mean_gap: Vec<Vec<f64>>,
    /// Fraction of runs with the true graph strictly ahead after `s` steps.
    pub accuracy: Vec<Vec<f64>>,
    /// `run_gaps[t][r][s]`.
    pub run_gaps: Vec<Vec<Vec<f64>>>,
}

/// Full-length walks (no early stop), `runs` per true graph. Run `r` on
/// graph `t` draws from `seeds::rng(seed, &[t, r])`.
pub fn surfer_curves(
    candidates: &[&BrowseGraph],
    runs: usize,
    params: &SurferParams,
    seed: u64,
) -> Result<SurferCurves> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let full = SurferParams { margin_threshold: f64::INFINITY, ..*params };
    let k = candidates.len();
    let mut mean_gap = Vec::with_capacity(k);
    let mut accuracy = Vec::with_capacity(k);
    let mut run_gaps = Vec::with_capacity(k);
    for t in 0..k {
        let observer = Observer::new(candidates, t, params.universe)?;
        let traces: Vec<SurferTrace> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let mut rng = seeds::rng(seed, &[t as u64, r as u64]);
                observer.run(&full, &mut rng).map(|(trace, _)| trace)
            })
            .collect::<Result<_>>()?;
        let steps = params.max_steps + 1;
        let mut mg = vec![0.0; steps];
        let mut acc = vec![0.0; steps];
        for tr in &traces {
            for (s, lp) in tr.history.iter().enumerate() {
                mg[s] += gap(lp, t);
                if k == 1 || strictly_ahead(lp, t) && s > 0 {
                    acc[s] += 1.0;
                }
            }
        }
        mg.iter_mut().for_each(|x| *x /= runs as f64);
        acc.iter_mut().for_each(|x| *x /= runs as f64);
        mean_gap.push(mg);
        accuracy.push(acc);
        run_gaps.push(traces.iter().map(SurferTrace::gaps).collect());
    }
    Ok(SurferCurves { mean_gap, accuracy, run_gaps })
}

/// CSV rows `true_graph,step,mean_gap,accuracy_at_step`.
pub fn write_curves<W: std::io::Write>(names: &[&str], curves: &SurferCurves, mut out: W) -> Result<()> {
    writeln!(out, "true_graph,step,mean_gap,accuracy_at_step")?;
    for (t, name) in names.iter().enumerate() {
        for (s, (g, a)) in curves.mean_gap[t].iter().zip(&curves.accuracy[t]).enumerate() {
            writeln!(out, "{name},{s},{g},{a}")?;
        }
    }
    Ok(())
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::graph::GraphBuilder;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn likelihood_in_unit_interval(
            edges in prop::collection::vec((0u8..10, 0u8..10, 1u64..5), 1..30),
            prev in 0u8..12, next in 0u8..12,
            alpha in 0.01..0.99f64,
            extra in 0usize..50,
        ) {
            let mut b = GraphBuilder::new();
            for (s, t, w) in edges { b.add_transition(&format!("p{s}"), &format!("p{t}"), w); }
            let g = b.build();
            let n = g.node_count() + extra;
            let p = step_likelihood(&g, &format!("p{prev}"), &format!("p{next}"), alpha, n);
            prop_assert!(p > 0.0 && p <= 1.0);
        }
    }
}
