//! Graph TSV format: one edge per line, `source_url<TAB>target_url<TAB>weight`.
//!
//! The writer sorts edges by `(source_url, target_url)` so files diff
//! cleanly. An optional node file lists one URL per line and preserves
//! isolated nodes, which the edge file alone cannot represent.

use std::io::{BufRead, Write};

use super::{BrowseGraph, GraphBuilder};
use crate::error::{Error, Result};

pub fn write_graph<W: Write>(g: &BrowseGraph, mut out: W) -> Result<()> {
    let mut edges: Vec<(&str, &str, u64)> = g.edges().map(|(u, v, w)| (g.url(u), g.url(v), w)).collect();
    edges.sort_unstable();
    for (s, t, w) in edges {
        writeln!(out, "{s}\t{t}\t{w}")?;
    }
    Ok(())
}

pub fn write_nodes<W: Write>(g: &BrowseGraph, mut out: W) -> Result<()> {
    let mut urls: Vec<&str> = g.urls().iter().map(String::as_str).collect();
    urls.sort_unstable();
    for u in urls {
        writeln!(out, "{u}")?;
    }
    Ok(())
}

/// Reads an edge file, optionally preceded by a node file. Node ids follow
/// the node file first, then first appearance in the edge file.
pub fn read_graph<R: BufRead>(edges: R, nodes: Option<&mut dyn BufRead>) -> Result<BrowseGraph> {
    let mut b = GraphBuilder::new();
    if let Some(nodes) = nodes {
        for line in nodes.lines() {
            let line = line?;
            let url = line.trim_end_matches('\r');
            if !url.is_empty() {
                b.add_node(url);
            }
        }
    }
    for (i, line) in edges.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let malformed = |reason: &str| Error::Malformed { line: i + 1, reason: reason.to_owned() };
        let mut fields = line.split('\t');
        let (s, t, w) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(t), Some(w), None) => (s, t, w),
            _ => return Err(malformed("expected 3 tab-separated fields")),
        };
        if s.is_empty() || t.is_empty() {
            return Err(malformed("empty url"));
        }
        let w: u64 = w.parse().map_err(|_| malformed("weight is not a positive integer"))?;
        if w == 0 {
            return Err(malformed("weight must be at least 1"));
        }
        b.add_transition(s, t, w);
    }
    Ok(b.build())
}

pub fn read_graph_file(path: &std::path::Path) -> Result<BrowseGraph> {
    let edges = std::io::BufReader::new(std::fs::File::open(path)?);
    let node_path = node_file_path(path);
    if node_path.exists() {
        let mut nodes = std::io::BufReader::new(std::fs::File::open(node_path)?);
        read_graph(edges, Some(&mut nodes))
    } else {
        read_graph(edges, None)
    }
}

/// Writes `path` and, when the graph has isolated nodes, the companion
/// node file next to it.
pub fn write_graph_file(g: &BrowseGraph, path: &std::path::Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_graph(g, &mut f)?;
    f.flush()?;
    let isolated = g.nodes().any(|u| g.out_degree(u) == 0 && g.in_degree(u) == 0);
    if isolated {
        let mut f = std::io::BufWriter::new(std::fs::File::create(node_file_path(path))?);
        write_nodes(g, &mut f)?;
        f.flush()?;
    }
    Ok(())
}

pub fn node_file_path(path: &std::path::Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".nodes");
    s.into()
}
