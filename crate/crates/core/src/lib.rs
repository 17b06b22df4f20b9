//! Local ranking on browse graphs.
//!
//! Browse graphs are weighted directed graphs whose nodes are pages and whose
//! edge weights count user transitions. This crate builds them from pageview
//! logs, splits the traffic by the referrer domain a session started from,
//! and studies how PageRank computed on such a local graph differs from
//! PageRank on the global one:
//!
//! - [`ingest`] parses logs, filters crawlers, sessionizes and extracts
//!   referrer subgraphs;
//! - [`pagerank`] is weighted PageRank by power iteration;
//! - [`rank_compare`] measures rank agreement (Kendall tau-b, Spearman);
//! - [`surfer`] identifies a walker's source graph from walk likelihoods;
//! - [`rings`] expands a local graph toward the global one ring by ring;
//! - [`features`] and [`predictor`] regress the local/global agreement on
//!   structural features with a random forest;
//! - [`synth`] generates referrer-conditioned browse logs with known ground
//!   truth.
//!
//! The accompanying book (under `book/` in the repository) walks through each
//! of these with runnable snippets.

pub mod error;
pub mod features;
pub mod graph;
pub mod ingest;
pub mod pagerank;
pub mod predictor;
pub mod rank_compare;
pub mod rings;
pub mod seeds;
pub mod stats;
pub mod surfer;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{build_graph, BrowseGraph, GraphStats, NodeId, NodeSet};
pub use pagerank::{pagerank, PageRankParams, RankVector};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/sessions.md")]
    mod sessions {}
    #[doc = include_str!("../../../book/src/pagerank.md")]
    mod pagerank {}
    #[doc = include_str!("../../../book/src/rank_agreement.md")]
    mod rank_agreement {}
    #[doc = include_str!("../../../book/src/surfer.md")]
    mod surfer {}
    #[doc = include_str!("../../../book/src/rings.md")]
    mod rings {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/predictor.md")]
    mod predictor {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
}
