//! Weighted directed browse graphs.
//!
//! Nodes are pages, identified by a dense [`NodeId`] in `0..n` and by their
//! URL through a bijective symbol table carried by the graph. Edge weights
//! count observed transitions, so repeated `(source, target)` pairs collapse
//! into one edge with an accumulated weight. Graphs are immutable once built.

mod components;
pub mod tsv;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use components::{strong_components, weak_components, Components};

/// Dense node index, contiguous within one graph.
pub type NodeId = usize;

/// Ordered node set; iteration order is ascending id.
pub type NodeSet = BTreeSet<NodeId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrowseGraph {
    urls: Vec<String>,
    index: HashMap<String, NodeId>,
    out_adj: Vec<Vec<(NodeId, u64)>>,
    in_adj: Vec<Vec<(NodeId, u64)>>,
    out_strength: Vec<u64>,
    in_strength: Vec<u64>,
    edge_count: usize,
}

/// Incremental constructor. Node ids are handed out in first-seen order.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    urls: Vec<String>,
    index: HashMap<String, NodeId>,
    weights: BTreeMap<(NodeId, NodeId), u64>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, url: &str) -> NodeId {
        if let Some(&id) = self.index.get(url) {
            return id;
        }
        let id = self.urls.len();
        self.urls.push(url.to_owned());
        self.index.insert(url.to_owned(), id);
        id
    }

    /// Adds `weight` observations of the transition `source -> target`.
    /// A zero weight only registers the two nodes.
    pub fn add_transition(&mut self, source: &str, target: &str, weight: u64) {
        let s = self.add_node(source);
        let t = self.add_node(target);
        if weight > 0 {
            *self.weights.entry((s, t)).or_insert(0) += weight;
        }
    }

    pub fn build(self) -> BrowseGraph {
        let n = self.urls.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut out_strength = vec![0u64; n];
        let mut in_strength = vec![0u64; n];
        // BTreeMap order gives out lists sorted by target and in lists sorted by source.
        for (&(s, t), &w) in &self.weights {
            out_adj[s].push((t, w));
            in_adj[t].push((s, w));
            out_strength[s] += w;
            in_strength[t] += w;
        }
        BrowseGraph {
            urls: self.urls,
            index: self.index,
            out_adj,
            in_adj,
            out_strength,
            in_strength,
            edge_count: self.weights.len(),
        }
    }
}

impl BrowseGraph {
    pub fn empty() -> Self {
        GraphBuilder::new().build()
    }

    pub fn node_count(&self) -> usize {
        self.urls.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.urls.is_empty()
    }

    pub fn url(&self, id: NodeId) -> &str {
        &self.urls[id]
    }

    pub fn urls(&self) -> &[String] {
        &self.urls
    }

    pub fn node_id(&self, url: &str) -> Option<NodeId> {
        self.index.get(url).copied()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id < self.urls.len()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.urls.len()
    }

    /// Out-edges of `u` as `(target, weight)`, sorted by target.
    pub fn out_edges(&self, u: NodeId) -> &[(NodeId, u64)] {
        &self.out_adj[u]
    }

    /// In-edges of `v` as `(source, weight)`, sorted by source.
    pub fn in_edges(&self, v: NodeId) -> &[(NodeId, u64)] {
        &self.in_adj[v]
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_adj[u].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v].len()
    }

    pub fn out_strength(&self, u: NodeId) -> u64 {
        self.out_strength[u]
    }

    pub fn in_strength(&self, v: NodeId) -> u64 {
        self.in_strength[v]
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<u64> {
        let adj = &self.out_adj[u];
        adj.binary_search_by_key(&v, |&(t, _)| t).ok().map(|i| adj[i].1)
    }

    pub fn total_weight(&self) -> u64 {
        self.out_strength.iter().sum()
    }

    /// All edges as `(source, target, weight)` in `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, u64)> + '_ {
        self.out_adj.iter().enumerate().flat_map(|(s, adj)| adj.iter().map(move |&(t, w)| (s, t, w)))
    }

    pub fn self_loop_count(&self) -> usize {
        self.nodes().filter(|&u| self.weight(u, u).is_some()).count()
    }

    fn check(&self, id: NodeId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownNode(id))
        }
    }

    /// Checks that the adjacency indexes agree with each other and with the
    /// symbol table.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        let bad = |msg: String| Err(Error::Inconsistent(msg));
        if self.index.len() != n
            || self.out_adj.len() != n
            || self.in_adj.len() != n
            || self.out_strength.len() != n
            || self.in_strength.len() != n
        {
            return bad("index lengths differ from node count".into());
        }
        for (url, &id) in &self.index {
            if id >= n || self.urls[id] != *url {
                return bad(format!("symbol table broken at {url:?}"));
            }
        }
        let mut from_out = BTreeMap::new();
        for u in self.nodes() {
            let adj = &self.out_adj[u];
            if adj.windows(2).any(|p| p[0].0 >= p[1].0) {
                return bad(format!("out list of {u} unsorted or duplicated"));
            }
            let mut s = 0;
            for &(v, w) in adj {
                if v >= n || w == 0 {
                    return bad(format!("bad out edge {u}->{v} weight {w}"));
                }
                s += w;
                from_out.insert((u, v), w);
            }
            if s != self.out_strength[u] {
                return bad(format!("out strength of {u}"));
            }
        }
        let mut from_in = BTreeMap::new();
        for v in self.nodes() {
            let adj = &self.in_adj[v];
            if adj.windows(2).any(|p| p[0].0 >= p[1].0) {
                return bad(format!("in list of {v} unsorted or duplicated"));
            }
            let mut s = 0;
            for &(u, w) in adj {
                s += w;
                from_in.insert((u, v), w);
            }
            if s != self.in_strength[v] {
                return bad(format!("in strength of {v}"));
            }
        }
        if from_out != from_in || from_out.len() != self.edge_count {
            return bad("in and out indexes disagree".into());
        }
        Ok(())
    }

    /// Maps a node set of this graph to URLs.
    pub fn urls_of<'a>(&'a self, nodes: impl IntoIterator<Item = &'a NodeId>) -> Vec<&'a str> {
        nodes.into_iter().map(|&id| self.url(id)).collect()
    }

    /// Translates this graph's nodes into ids of `other` by URL.
    pub fn node_set_in(&self, other: &BrowseGraph) -> Result<NodeSet> {
        self.urls.iter().map(|u| other.node_id(u).ok_or_else(|| Error::UnknownUrl(u.clone()))).collect()
    }
}

/// Builds a graph from observed `(source_url, target_url)` transitions; each
/// occurrence adds one to the edge weight.
pub fn build_graph<I, S>(transitions: I) -> BrowseGraph
where
    I: IntoIterator<Item = (S, S)>,
    S: AsRef<str>,
{
    let mut b = GraphBuilder::new();
    for (s, t) in transitions {
        b.add_transition(s.as_ref(), t.as_ref(), 1);
    }
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub gcc_fraction: f64,
    pub reciprocity: f64,
}

/// `edges / (nodes * (nodes - 1))`, zero for fewer than two nodes.
pub fn density(nodes: usize, edges: usize) -> f64 {
    if nodes < 2 {
        0.0
    } else {
        edges as f64 / (nodes as f64 * (nodes as f64 - 1.0))
    }
}

/// Fraction of non-loop edges `(u, v)` whose reverse `(v, u)` is present.
pub fn reciprocity(g: &BrowseGraph) -> f64 {
    let mut total = 0usize;
    let mut mutual = 0usize;
    for (u, v, _) in g.edges() {
        if u == v {
            continue;
        }
        total += 1;
        if g.weight(v, u).is_some() {
            mutual += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        mutual as f64 / total as f64
    }
}

pub fn stats(g: &BrowseGraph) -> GraphStats {
    let n = g.node_count();
    let gcc_fraction = if n == 0 { 0.0 } else { weak_components(g).largest() as f64 / n as f64 };
    GraphStats {
        nodes: n,
        edges: g.edge_count(),
        density: density(n, g.edge_count()),
        gcc_fraction,
        reciprocity: reciprocity(g),
    }
}

/// Subgraph with exactly the edges of `g` whose endpoints both lie in
/// `nodes`. New ids follow ascending old ids, so the identity restriction
/// reproduces `g` exactly.
pub fn induced_subgraph(g: &BrowseGraph, nodes: &NodeSet) -> Result<BrowseGraph> {
    if let Some(&bad) = nodes.iter().find(|&&id| !g.contains(id)) {
        return Err(Error::UnknownNode(bad));
    }
    // ascending ids keep the adjacency lists sorted after relabelling
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, &u) in nodes.iter().enumerate() {
        local[u] = i;
    }
    let restrict = |adj: &[(NodeId, u64)]| -> Vec<(NodeId, u64)> {
        adj.iter().filter(|&&(v, _)| local[v] != usize::MAX).map(|&(v, w)| (local[v], w)).collect()
    };
    let urls: Vec<String> = nodes.iter().map(|&u| g.urls[u].clone()).collect();
    let index = urls.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
    let out_adj: Vec<_> = nodes.iter().map(|&u| restrict(&g.out_adj[u])).collect();
    let in_adj: Vec<_> = nodes.iter().map(|&u| restrict(&g.in_adj[u])).collect();
    let out_strength = out_adj.iter().map(|a| a.iter().map(|&(_, w)| w).sum()).collect();
    let in_strength = in_adj.iter().map(|a| a.iter().map(|&(_, w)| w).sum()).collect();
    let edge_count = out_adj.iter().map(Vec::len).sum();
    Ok(BrowseGraph { urls, index, out_adj, in_adj, out_strength, in_strength, edge_count })
}

/// Targets of edges leaving `nodes`, excluding `nodes` itself.
pub fn out_frontier(g: &BrowseGraph, nodes: &NodeSet) -> Result<NodeSet> {
    let mut frontier = NodeSet::new();
    for &u in nodes {
        g.check(u)?;
        for &(v, _) in g.out_edges(u) {
            if !nodes.contains(&v) {
                frontier.insert(v);
            }
        }
    }
    Ok(frontier)
}
