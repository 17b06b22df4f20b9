//! Rank agreement between two score vectors.
//!
//! Kendall's tau-b is computed with Knight's `O(m log m)` algorithm: sort the
//! pairs by `(x, y)`, count ties, then merge-sort by `y` while counting the
//! exchanges, which equal the number of discordant pairs. Two rankings are
//! compared on the URLs their graphs have in common.
//!
//! Ties are exact float equality. When one side is entirely tied the
//! coefficient is 0; when both are, it is 1.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BrowseGraph;
use crate::pagerank::RankVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankAgreement {
    pub kendall_tau: f64,
    pub spearman_rho: f64,
    pub common_nodes: usize,
    /// Set when one of the two sides has no spread at all.
    pub degenerate: bool,
}

struct TieCounts {
    n0: u64,
    x_ties: u64,
    y_ties: u64,
    joint_ties: u64,
    discordant: u64,
}

fn tied_pairs(run: u64) -> u64 {
    run * (run.saturating_sub(1)) / 2
}

fn count_runs<T, F: Fn(&T, &T) -> bool>(v: &[T], same: F) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for i in 1..v.len() {
        if same(&v[i - 1], &v[i]) {
            run += 1;
        } else {
            total += tied_pairs(run);
            run = 1;
        }
    }
    total + tied_pairs(run)
}

/// Bottom-up merge sort by the second coordinate, returning the number of
/// exchanges (strict inversions).
fn merge_sort_inversions(v: &mut Vec<(f64, f64)>) -> u64 {
    let n = v.len();
    let mut buf = v.clone();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if v[j].1 < v[i].1 {
                    buf[k] = v[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + (end - j)].copy_from_slice(&v[j..end]);
            start = end;
        }
        std::mem::swap(v, &mut buf);
        width *= 2;
    }
    swaps
}

fn tie_counts(x: &[f64], y: &[f64]) -> TieCounts {
    let n = x.len() as u64;
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let x_ties = count_runs(&pairs, |a, b| a.0 == b.0);
    let joint_ties = count_runs(&pairs, |a, b| a.0 == b.0 && a.1 == b.1);
    let discordant = merge_sort_inversions(&mut pairs);
    let y_ties = count_runs(&pairs, |a, b| a.1 == b.1);
    TieCounts { n0: n * n.saturating_sub(1) / 2, x_ties, y_ties, joint_ties, discordant }
}

/// Kendall's tau-b of two equally long score vectors.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "kendall_tau_b needs equal lengths");
    if x.len() < 2 {
        return 0.0;
    }
    let t = tie_counts(x, y);
    let (nx, ny) = (t.n0 - t.x_ties, t.n0 - t.y_ties);
    if nx == 0 && ny == 0 {
        return 1.0;
    }
    if nx == 0 || ny == 0 {
        return 0.0;
    }
    // concordant - discordant = n0 - n1 - n2 + n3 - 2 * discordant
    let numerator = t.n0 as f64 - t.x_ties as f64 - t.y_ties as f64 + t.joint_ties as f64 - 2.0 * t.discordant as f64;
    (numerator / (nx as f64 * ny as f64).sqrt()).clamp(-1.0, 1.0)
}

/// Ranks starting at 1, ties receiving the average of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

fn has_ties(x: &[f64]) -> bool {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2).any(|w| w[0] == w[1])
}

fn all_tied(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

pub fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman_rho needs equal lengths");
    if x.len() < 2 {
        return 0.0;
    }
    match (all_tied(x), all_tied(y)) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => {
            let (rx, ry) = (average_ranks(x), average_ranks(y));
            if has_ties(x) || has_ties(y) {
                crate::stats::pearson(&rx, &ry)
            } else {
                let n = x.len() as f64;
                let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
                1.0 - 6.0 * d2 / (n * (n * n - 1.0))
            }
        }
    }
}

/// Agreement of two raw score vectors, position by position.
pub fn compare_scores(x: &[f64], y: &[f64]) -> Result<RankAgreement> {
    if x.len() < 2 {
        return Err(Error::TooFewCommonNodes(x.len()));
    }
    Ok(RankAgreement {
        kendall_tau: kendall_tau_b(x, y),
        spearman_rho: spearman_rho(x, y),
        common_nodes: x.len(),
        degenerate: all_tied(x) || all_tied(y),
    })
}

/// Scores of `a` and `b` on the URLs both graphs contain, in `a`'s id order.
pub fn common_scores(ga: &BrowseGraph, ra: &RankVector, gb: &BrowseGraph, rb: &RankVector) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for u in ga.nodes() {
        if let Some(v) = gb.node_id(ga.url(u)) {
            xs.push(ra.scores[u]);
            ys.push(rb.scores[v]);
        }
    }
    (xs, ys)
}

/// Kendall tau-b and Spearman rho of two PageRank vectors over the URLs
/// their graphs share.
pub fn kendall_tau(ga: &BrowseGraph, ra: &RankVector, gb: &BrowseGraph, rb: &RankVector) -> Result<RankAgreement> {
    let (xs, ys) = common_scores(ga, ra, gb, rb);
    compare_scores(&xs, &ys)
}

/// Pairwise tau matrix over named ranked graphs. Cells whose graphs share
/// fewer than two URLs are `None`.
pub fn tau_matrix(graphs: &[(&str, &BrowseGraph, &RankVector)]) -> Vec<Vec<Option<f64>>> {
    let k = graphs.len();
    let mut m = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let (_, gi, ri) = graphs[i];
            let (_, gj, rj) = graphs[j];
            let tau = kendall_tau(gi, ri, gj, rj).ok().map(|a| a.kendall_tau);
            m[i][j] = tau;
            m[j][i] = tau;
        }
    }
    m
}

/// CSV with the graph names as header row and first column.
pub fn write_tau_matrix<W: Write>(names: &[&str], m: &[Vec<Option<f64>>], mut out: W) -> Result<()> {
    write!(out, "graph")?;
    for n in names {
        write!(out, ",{n}")?;
    }
    writeln!(out)?;
    for (name, row) in names.iter().zip(m) {
        write!(out, "{name}")?;
        for cell in row {
            match cell {
                Some(v) => write!(out, ",{v}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}



#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..60).prop_flat_map(|n| {
            (
                prop::collection::vec(0u8..10, n).prop_map(|v| v.into_iter().map(f64::from).collect()),
                prop::collection::vec(-1.0e3..1.0e3f64, n),
            )
        })
    }

    proptest! {
        #[test]
        fn symmetric((x, y) in arb_pairs()) {
            prop_assert_eq!(kendall_tau_b(&x, &y).to_bits(), kendall_tau_b(&y, &x).to_bits());
        }

        #[test]
        fn monotone_transform_invariant((x, y) in arb_pairs()) {
            let tx: Vec<f64> = x.iter().map(|v| (v * 0.5).exp() + 3.0).collect();
            prop_assert!((kendall_tau_b(&x, &y) - kendall_tau_b(&tx, &y)).abs() < 1e-12);
        }

        #[test]
        fn tau_b_equals_tau_a_without_ties(y in prop::collection::hash_set(-100000i32..100000, 2..80)) {
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let x: Vec<f64> = (0..y.len()).map(|i| ((i * 7919) % 1009) as f64 + i as f64 * 1e-3).collect();
            let n = x.len() as f64;
            let mut s = 0i64;
            for i in 0..x.len() {
                for j in i + 1..x.len() {
                    s += ((x[i] - x[j]).signum() * (y[i] - y[j]).signum()) as i64;
                }
            }
            let tau_a = s as f64 / (n * (n - 1.0) / 2.0);
            prop_assert!((kendall_tau_b(&x, &y) - tau_a).abs() < 1e-12);
        }
    }
}
