//! Growing rings: expanding a local graph toward the global one.
//!
//! Starting from an initial graph `H0` whose pages all exist in the global
//! graph `G`, every ring adds out-neighbours of the current node set and
//! takes the subgraph of `G` induced on the result. The full strategy adds
//! the whole out-frontier; the top-percent strategy ranks the frontier by
//! PageRank on the current ring extended with the frontier and adds only the
//! best `percent` of it. After each ring the local PageRank is compared with
//! the global PageRank on the ring's pages by Kendall tau-b.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, out_frontier, BrowseGraph, NodeId, NodeSet};
use crate::pagerank::{pagerank, PageRankParams, RankVector};
use crate::rank_compare::{compare_scores, kendall_tau};

pub const DEFAULT_MAX_RINGS: usize = 10;
pub const SRB_TOLERANCE: f64 = 0.094;
pub const SRB_RETRY_BUDGET: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    Full,
    TopPercent(f64),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Full => write!(f, "full"),
            Strategy::TopPercent(p) => write!(f, "top:{p}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(Strategy::Full);
        }
        let bad = || Error::InvalidParameter(format!("strategy must be `full` or `top:<percent>`, got {s:?}"));
        let p: f64 = s.strip_prefix("top:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if !(p > 0.0 && p <= 100.0) {
            return Err(bad());
        }
        Ok(Strategy::TopPercent(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    /// Node ids in the global graph.
    pub nodes: NodeSet,
    pub edges: usize,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingSequence {
    pub strategy: Strategy,
    pub rings: Vec<Ring>,
}

impl RingSequence {
    pub fn taus(&self) -> Vec<f64> {
        self.rings.iter().map(|r| r.tau).collect()
    }

    pub fn last_tau(&self) -> f64 {
        self.rings.last().map_or(f64::NAN, |r| r.tau)
    }
}

/// `nodes ∪ Γ_out(nodes)`.
pub fn expand_full(g: &BrowseGraph, nodes: &NodeSet) -> Result<NodeSet> {
    let mut next = nodes.clone();
    next.extend(out_frontier(g, nodes)?);
    Ok(next)
}

/// Adds the `ceil(|Y| · percent / 100)` frontier pages with the highest
/// PageRank on the graph induced by `nodes ∪ Y`; ties go to the smaller URL.
pub fn expand_top_percent(g: &BrowseGraph, nodes: &NodeSet, percent: f64, params: &PageRankParams) -> Result<NodeSet> {
    if !(percent > 0.0 && percent <= 100.0) {
        return Err(Error::InvalidParameter(format!("percent must lie in (0, 100], got {percent}")));
    }
    let frontier = out_frontier(g, nodes)?;
    if frontier.is_empty() {
        return Ok(nodes.clone());
    }
    let keep = ((frontier.len() as f64 * percent / 100.0).ceil() as usize).min(frontier.len());
    let mut next = nodes.clone();
    if keep == frontier.len() {
        next.extend(frontier);
        return Ok(next);
    }
    let mut extended = nodes.clone();
    extended.extend(frontier.iter().copied());
    let sub = induced_subgraph(g, &extended)?;
    let ranks = pagerank(&sub, params)?;
    // induced ids follow ascending global ids
    let local_id: std::collections::HashMap<NodeId, usize> =
        extended.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut ranked: Vec<NodeId> = frontier.into_iter().collect();
    ranked.sort_by(|&a, &b| {
        ranks.scores[local_id[&b]].total_cmp(&ranks.scores[local_id[&a]]).then_with(|| g.url(a).cmp(g.url(b)))
    });
    next.extend(ranked.into_iter().take(keep));
    Ok(next)
}

fn expand(g: &BrowseGraph, nodes: &NodeSet, strategy: Strategy, params: &PageRankParams) -> Result<NodeSet> {
    match strategy {
        Strategy::Full => expand_full(g, nodes),
        Strategy::TopPercent(p) => expand_top_percent(g, nodes, p, params),
    }
}

fn ring_tau(local: &BrowseGraph, g: &BrowseGraph, global: &RankVector, params: &PageRankParams) -> Result<f64> {
    let local_ranks = pagerank(local, params)?;
    Ok(kendall_tau(local, &local_ranks, g, global)?.kendall_tau)
}

/// Runs the expansion from `h0` (with its own edges) for up to `max_rings`
/// expansions, stopping early when a ring no longer grows. `global` must be
/// the PageRank of `g` under `params`.
pub fn run_rings_with_global(
    g: &BrowseGraph,
    global: &RankVector,
    h0: &BrowseGraph,
    strategy: Strategy,
    params: &PageRankParams,
    max_rings: usize,
) -> Result<RingSequence> {
    if h0.is_empty() {
        return Err(Error::InvalidParameter("initial ring is empty".into()));
    }
    let mut nodes = h0.node_set_in(g)?;
    let mut rings = vec![Ring { nodes: nodes.clone(), edges: h0.edge_count(), tau: ring_tau(h0, g, global, params)? }];
    for _ in 0..max_rings {
        let next = expand(g, &nodes, strategy, params)?;
        if next.len() == nodes.len() {
            break;
        }
        nodes = next;
        let ring_graph = induced_subgraph(g, &nodes)?;
        let local = pagerank(&ring_graph, params)?;
        let reference: Vec<f64> = nodes.iter().map(|&u| global.scores[u]).collect();
        let tau = compare_scores(&local.scores, &reference)?.kendall_tau;
        rings.push(Ring { nodes: nodes.clone(), edges: ring_graph.edge_count(), tau });
    }
    Ok(RingSequence { strategy, rings })
}

pub fn run_rings(
    g: &BrowseGraph,
    h0: &BrowseGraph,
    strategy: Strategy,
    params: &PageRankParams,
    max_rings: usize,
) -> Result<RingSequence> {
    let global = pagerank(g, params)?;
    run_rings_with_global(g, &global, h0, strategy, params, max_rings)
}

/// Initial-set regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// The referrer graphs as they are.
    Rb,
    /// Same-size BFS samples of each referrer graph.
    Srb,
    /// BFS samples of the global graph with the referrer graphs' sizes.
    R,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RB" => Ok(Regime::Rb),
            "SRB" => Ok(Regime::Srb),
            "R" => Ok(Regime::R),
            _ => Err(Error::InvalidParameter(format!("regime must be RB, SRB or R, got {s:?}"))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Rb => "RB",
            Regime::Srb => "SRB",
            Regime::R => "R",
        })
    }
}

/// Breadth-first sample over edges in both directions from `start`, with
/// the last level shuffled and cut so that at most `target` nodes are kept.
pub fn bfs_sample<R: Rng + ?Sized>(g: &BrowseGraph, start: NodeId, target: usize, rng: &mut R) -> NodeSet {
    let mut seen = NodeSet::new();
    seen.insert(start);
    let mut level = vec![start];
    while !level.is_empty() && seen.len() < target {
        let mut next = Vec::new();
        for &u in &level {
            let neighbours = g.out_edges(u).iter().chain(g.in_edges(u)).map(|&(v, _)| v);
            for v in neighbours {
                if !seen.contains(&v) && !next.contains(&v) {
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        let room = target - seen.len();
        if next.len() > room {
            next.shuffle(rng);
            next.truncate(room);
        }
        seen.extend(next.iter().copied());
        level = next;
    }
    seen
}

/// Initial graphs for a regime. `target_size` is the SRB sample size; the
/// R regime reuses the referrer graphs' node counts.
pub fn make_initial_sets<R: Rng + ?Sized>(
    g: &BrowseGraph,
    referrer_graphs: &[BrowseGraph],
    regime: Regime,
    target_size: Option<usize>,
    rng: &mut R,
) -> Result<Vec<BrowseGraph>> {
    match regime {
        Regime::Rb => Ok(referrer_graphs.to_vec()),
        Regime::Srb => {
            let target = target_size.ok_or_else(|| Error::InvalidParameter("SRB needs a target size".into()))?;
            let lower = (target as f64 * (1.0 - SRB_TOLERANCE)).ceil() as usize;
            referrer_graphs
                .iter()
                .map(|rg| {
                    if rg.is_empty() {
                        return Err(Error::EmptyGraph);
                    }
                    let mut achieved = Vec::new();
                    for _ in 0..SRB_RETRY_BUDGET {
                        let start = rng.gen_range(0..rg.node_count());
                        let sample = bfs_sample(rg, start, target, rng);
                        if sample.len() >= lower {
                            return induced_subgraph(rg, &sample);
                        }
                        achieved.push(sample.len());
                    }
                    Err(Error::RetryBudgetExhausted { attempts: SRB_RETRY_BUDGET, achieved })
                })
                .collect()
        }
        Regime::R => {
            if g.is_empty() {
                return Err(Error::EmptyGraph);
            }
            referrer_graphs
                .iter()
                .map(|rg| {
                    let size = rg.node_count().min(g.node_count());
                    let mut achieved = Vec::new();
                    for _ in 0..SRB_RETRY_BUDGET {
                        let start = rng.gen_range(0..g.node_count());
                        let sample = bfs_sample(g, start, size, rng);
                        if sample.len() == size {
                            return induced_subgraph(g, &sample);
                        }
                        achieved.push(sample.len());
                    }
                    Err(Error::RetryBudgetExhausted { attempts: SRB_RETRY_BUDGET, achieved })
                })
                .collect()
        }
    }
}

/// CSV rows `graph,strategy,ring_index,nodes,edges,tau`.
pub fn write_rings_csv<W: Write>(runs: &[(&str, &RingSequence)], mut out: W) -> Result<()> {
    writeln!(out, "graph,strategy,ring_index,nodes,edges,tau")?;
    for (name, seq) in runs {
        for (i, r) in seq.rings.iter().enumerate() {
            writeln!(out, "{name},{},{i},{},{},{}", seq.strategy, r.nodes.len(), r.edges, r.tau)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphBuilder};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, m: usize, seed: u64) -> BrowseGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.add_node(&format!("v{i:03}"));
        }
        for _ in 0..m {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            b.add_transition(&format!("v{u:03}"), &format!("v{v:03}"), rng.gen_range(1..4));
        }
        b.build()
    }

    fn bfs_levels(g: &BrowseGraph, start: &NodeSet, k: usize) -> NodeSet {
        let mut dist = vec![usize::MAX; g.node_count()];
        let mut queue = std::collections::VecDeque::new();
        for &s in start {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            for &(v, _) in g.out_edges(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        g.nodes().filter(|&v| dist[v] <= k).collect()
    }

    #[test]
    fn full_expansion_basics() {
        let g = build_graph([("a", "b"), ("b", "c")]);
        let a: NodeSet = [0].into_iter().collect();
        assert_eq!(expand_full(&g, &a).unwrap(), [0, 1].into_iter().collect());
        let all: NodeSet = g.nodes().collect();
        assert_eq!(expand_full(&g, &all).unwrap(), all);
    }

    #[test]
    fn full_rings_are_bfs_levels() {
        for seed in 0..10 {
            let g = random_graph(60, 90, seed);
            let start: NodeSet = [0, 1].into_iter().collect();
            let mut ring = start.clone();
            for k in 1..6 {
                ring = expand_full(&g, &ring).unwrap();
                assert_eq!(ring, bfs_levels(&g, &start, k));
            }
        }
    }

    #[test]
    fn hundred_percent_equals_full() {
        let p = PageRankParams::default();
        for seed in 0..10 {
            let g = random_graph(50, 100, seed);
            let start: NodeSet = [seed as usize % 50].into_iter().collect();
            let mut a = start.clone();
            for _ in 0..4 {
                let full = expand_full(&g, &a).unwrap();
                assert_eq!(expand_top_percent(&g, &a, 100.0, &p).unwrap(), full);
                a = full;
            }
        }
    }

    #[test]
    fn saturated_frontier_is_unchanged() {
        let g = build_graph([("a", "b"), ("b", "a")]);
        let all: NodeSet = g.nodes().collect();
        assert_eq!(expand_top_percent(&g, &all, 5.0, &PageRankParams::default()).unwrap(), all);
    }

    #[test]
    fn hub_is_selected_first() {
        // start -> hub, start -> l1..l4 ; l1..l4 -> hub
        let mut b = GraphBuilder::new();
        b.add_transition("start", "hub", 1);
        for i in 1..=4 {
            b.add_transition("start", &format!("l{i}"), 1);
            b.add_transition(&format!("l{i}"), "hub", 1);
        }
        let g = b.build();
        let start: NodeSet = [g.node_id("start").unwrap()].into_iter().collect();
        // dense oracle on the 6-node extended graph: hub collects everything
        let extended = induced_subgraph(&g, &g.nodes().collect()).unwrap();
        let oracle = crate::pagerank::tests::dense_oracle(&extended, 0.85);
        let hub = g.node_id("hub").unwrap();
        assert!(g.nodes().filter(|&v| v != hub).all(|v| oracle[v] < oracle[hub]));
        let next = expand_top_percent(&g, &start, 10.0, &PageRankParams::default()).unwrap();
        assert_eq!(next, [g.node_id("start").unwrap(), hub].into_iter().collect());
    }

    #[test]
    fn identity_initial_set_has_tau_one() {
        let g = random_graph(40, 120, 3);
        let seq = run_rings(&g, &g, Strategy::Full, &PageRankParams::default(), 10).unwrap();
        assert_eq!(seq.taus(), vec![1.0]);
    }

    #[test]
    fn chain_converges_to_one() {
        let g = build_graph([("a", "b"), ("b", "c"), ("c", "d")]);
        let h0 = build_graph([("a", "b")]);
        let seq = run_rings(&g, &h0, Strategy::Full, &PageRankParams::default(), 10).unwrap();
        // On a path every later node outscores the previous one, locally
        // and globally, so each ring agrees perfectly.
        assert_eq!(seq.taus(), vec![1.0; 3]);
        assert_eq!(seq.rings.iter().map(|r| r.nodes.len()).collect::<Vec<_>>(), vec![2, 3, 4]);
    }

    #[test]
    fn saturation_reaches_global_ranking() {
        for seed in 0..5 {
            let g = random_graph(80, 400, seed);
            let mut b = GraphBuilder::new();
            b.add_transition(g.url(0), g.url(1), 1);
            let h0 = b.build();
            let seq = run_rings(&g, &h0, Strategy::Full, &PageRankParams::default(), 20).unwrap();
            let last = seq.rings.last().unwrap();
            for w in seq.rings.windows(2) {
                assert!(w[0].nodes.is_subset(&w[1].nodes));
            }
            if last.nodes.len() == g.node_count() {
                assert!((last.tau - 1.0).abs() < 1e-9, "seed {seed}: {}", last.tau);
            }
        }
    }

    #[test]
    fn regimes() {
        let g = random_graph(300, 1500, 1);
        let subs: Vec<BrowseGraph> =
            [0usize, 100].iter().map(|&s| induced_subgraph(&g, &(s..s + 120).collect()).unwrap()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rb = make_initial_sets(&g, &subs, Regime::Rb, None, &mut rng).unwrap();
        assert_eq!(rb, subs);
        let r = make_initial_sets(&g, &subs, Regime::R, None, &mut rng).unwrap();
        assert_eq!(r.iter().map(BrowseGraph::node_count).collect::<Vec<_>>(), vec![120, 120]);
        let srb = make_initial_sets(&g, &subs, Regime::Srb, Some(50), &mut rng).unwrap();
        for s in &srb {
            assert!((46..=55).contains(&s.node_count()));
        }
        assert!(make_initial_sets(&g, &subs, Regime::Srb, None, &mut rng).is_err());
    }

    #[test]
    fn srb_budget_exhaustion_reports_sizes() {
        let g = build_graph([("a", "b"), ("c", "d")]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match make_initial_sets(&g, &[g.clone()], Regime::Srb, Some(4), &mut rng) {
            Err(Error::RetryBudgetExhausted { attempts, achieved }) => {
                assert_eq!(attempts, SRB_RETRY_BUDGET);
                assert!(achieved.iter().all(|&s| s == 2));
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("full".parse::<Strategy>().unwrap(), Strategy::Full);
        assert_eq!("top:5".parse::<Strategy>().unwrap(), Strategy::TopPercent(5.0));
        assert!("top:0".parse::<Strategy>().is_err());
        assert!("half".parse::<Strategy>().is_err());
        assert_eq!("srb".parse::<Regime>().unwrap(), Regime::Srb);
    }
}
