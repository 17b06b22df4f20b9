//! Predicting local-versus-global rank agreement from structural features.
//!
//! Training data comes from jackknife resampling: random node bulks are
//! removed from each graph and the Kendall tau between the PageRank of the
//! full graph and that of the reduced graph becomes the target for the
//! reduced graph's features.

pub mod forest;

use std::io::{BufRead, Write};

use rand::seq::{index::sample, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{category_indices, extract_features, feature_names, Category, FeatureVector, FEATURE_COUNT};
use crate::graph::{induced_subgraph, BrowseGraph, NodeSet};
use crate::pagerank::{pagerank, PageRankParams, RankVector};
use crate::rank_compare::{compare_scores, kendall_tau};
use crate::{seeds, stats};

pub use forest::{train_forest, ForestModel, ForestParams, Node, Tree};

pub const DEFAULT_FRACTIONS: [f64; 4] = [0.01, 0.05, 0.10, 0.20];
pub const DEFAULT_SAMPLES_PER_CELL: usize = 30;
pub const MIN_JACKKNIFE_NODES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeSample {
    pub source_graph: String,
    pub removal_fraction: f64,
    pub features: FeatureVector,
    pub target_tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JackknifeSet {
    pub samples: Vec<JackknifeSample>,
    /// Draws whose reduced graph was empty or shared fewer than two nodes.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JackknifeParams {
    pub fractions: Vec<f64>,
    pub samples_per_cell: usize,
    pub pagerank: PageRankParams,
    pub closeness_sample: usize,
}

impl Default for JackknifeParams {
    fn default() -> Self {
        Self {
            fractions: DEFAULT_FRACTIONS.to_vec(),
            samples_per_cell: DEFAULT_SAMPLES_PER_CELL,
            pagerank: PageRankParams::default(),
            closeness_sample: crate::features::DEFAULT_CLOSENESS_SAMPLE,
        }
    }
}

/// Number of nodes left after removing `fraction` of `n`.
pub fn reduced_size(n: usize, fraction: f64) -> usize {
    (n as f64 * (1.0 - fraction)).round() as usize
}

/// One jackknife draw. `None` when the reduced graph cannot be compared.
fn jackknife_draw(
    g: &BrowseGraph,
    full_pr: &RankVector,
    fraction: f64,
    params: &JackknifeParams,
    rng: &mut seeds::Rng,
) -> Result<Option<(FeatureVector, f64)>> {
    let n = g.node_count();
    let keep = reduced_size(n, fraction);
    let kept: NodeSet = if keep == n { g.nodes().collect() } else { sample(rng, n, keep).into_iter().collect() };
    if kept.len() < 2 {
        return Ok(None);
    }
    let reduced = induced_subgraph(g, &kept)?;
    let reduced_pr = pagerank(&reduced, &params.pagerank)?;
    let tau = match kendall_tau(&reduced, &reduced_pr, g, full_pr) {
        Ok(a) => a.kendall_tau,
        Err(Error::TooFewCommonNodes(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let features = extract_features(&reduced, &reduced_pr, params.closeness_sample, rng)?;
    Ok(Some((features, tau)))
}

/// Jackknife dataset over `graphs`. Draw `(g, f, s)` uses its own random
/// stream derived from `seed`, and samples come out in `(g, f, s)` order.
pub fn build_jackknife(graphs: &[(String, BrowseGraph)], params: &JackknifeParams, seed: u64) -> Result<JackknifeSet> {
    for (name, g) in graphs {
        if g.node_count() < MIN_JACKKNIFE_NODES {
            return Err(Error::InvalidParameter(format!(
                "graph {name} has {} nodes; jackknife needs at least {MIN_JACKKNIFE_NODES}",
                g.node_count()
            )));
        }
    }
    if let Some(f) = params.fractions.iter().find(|f| !(0.0..1.0).contains(*f)) {
        return Err(Error::InvalidParameter(format!("removal fraction {f} outside [0, 1)")));
    }
    let full_ranks: Vec<RankVector> =
        graphs.iter().map(|(_, g)| pagerank(g, &params.pagerank)).collect::<Result<_>>()?;
    let units: Vec<(usize, usize, usize)> = (0..graphs.len())
        .flat_map(|gi| {
            (0..params.fractions.len()).flat_map(move |fi| (0..params.samples_per_cell).map(move |s| (gi, fi, s)))
        })
        .collect();
    let draws = units
        .par_iter()
        .map(|&(gi, fi, s)| {
            let mut rng = seeds::rng(seed, &[gi as u64, fi as u64, s as u64]);
            let fraction = params.fractions[fi];
            jackknife_draw(&graphs[gi].1, &full_ranks[gi], fraction, params, &mut rng).map(|d| {
                d.map(|(features, target_tau)| JackknifeSample {
                    source_graph: graphs[gi].0.clone(),
                    removal_fraction: fraction,
                    features,
                    target_tau,
                })
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let skipped = draws.iter().filter(|d| d.is_none()).count();
    Ok(JackknifeSet { samples: draws.into_iter().flatten().collect(), skipped })
}

/// CSV `graph,fraction,target_tau,<62 features>`.
pub fn write_samples_csv<W: Write>(samples: &[JackknifeSample], mut out: W) -> Result<()> {
    write!(out, "graph,fraction,target_tau")?;
    for name in feature_names() {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for s in samples {
        write!(out, "{},{},{}", s.source_graph, s.removal_fraction, s.target_tau)?;
        for v in &s.features.values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_samples_csv<R: BufRead>(input: R) -> Result<Vec<JackknifeSample>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.ok_or_else(|| Error::Malformed { line: 1, reason: "empty file".into() })?;
    let expected: Vec<String> =
        ["graph", "fraction", "target_tau"].iter().map(|s| s.to_string()).chain(feature_names()).collect();
    if header.split(',').ne(expected.iter().map(String::as_str)) {
        return Err(Error::Malformed { line: 1, reason: "unexpected sample header".into() });
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let malformed = |reason: &str| Error::Malformed { line: i + 2, reason: reason.into() };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != FEATURE_COUNT + 3 {
            return Err(malformed("wrong number of columns"));
        }
        let nums = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| malformed("non-numeric value"))?;
        samples.push(JackknifeSample {
            source_graph: fields[0].to_owned(),
            removal_fraction: nums[0],
            target_tau: nums[1],
            features: FeatureVector { values: nums[2..].to_vec() },
        });
    }
    Ok(samples)
}

/// A named column subset used in cross-validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSubset {
    pub name: String,
    pub columns: Vec<usize>,
}

impl FeatureSubset {
    pub fn category(category: Category) -> Self {
        Self { name: category.letter().to_owned(), columns: category_indices(category) }
    }

    pub fn all() -> Self {
        Self { name: "ALL".to_owned(), columns: (0..FEATURE_COUNT).collect() }
    }

    /// The six categories followed by all features.
    pub fn standard() -> Vec<Self> {
        Category::ALL.into_iter().map(Self::category).chain([Self::all()]).collect()
    }

    fn project(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.columns.iter().map(|&c| r[c]).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub subset: String,
    pub n_features: usize,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub repeats: usize,
    pub target_variance: f64,
    pub results: Vec<CvResult>,
}

impl CvReport {
    pub fn mse_of(&self, subset: &str) -> Option<f64> {
        self.results.iter().find(|r| r.subset == subset).map(|r| r.mse)
    }

    /// CSV `subset,n_features,mse`, followed by a `variance` baseline row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "subset,n_features,mse")?;
        for r in &self.results {
            writeln!(out, "{},{},{}", r.subset, r.n_features, r.mse)?;
        }
        writeln!(out, "variance,0,{}", self.target_variance)?;
        Ok(())
    }
}

/// Mean squared error of repeated k-fold cross-validation, averaged over
/// folds and repeats. Repeat `r` shuffles with a stream derived from
/// `(seed, r)`; the forest of fold `k` is seeded with `(seed, r, k)`.
pub fn cv_mse(
    x: &[Vec<f64>],
    y: &[f64],
    folds: usize,
    repeats: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<f64> {
    let n = x.len();
    if folds < 2 || folds > n {
        return Err(Error::InvalidParameter(format!("{folds} folds for {n} samples")));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("cross-validation needs at least one repeat".into()));
    }
    let names: Vec<String> = (0..x[0].len()).map(|i| format!("x{i}")).collect();
    let mut total = 0.0;
    for r in 0..repeats {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seeds::rng(seed, &[r as u64]));
        for k in 0..folds {
            let (lo, hi) = (k * n / folds, (k + 1) * n / folds);
            let test = &order[lo..hi];
            let train: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = train_forest(&tx, &ty, &names, params, seeds::derive(seed, &[r as u64, k as u64]))?;
            let pred: Vec<f64> = test.iter().map(|&i| model.predict(&x[i])).collect();
            let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            total += stats::mse(&pred, &truth);
        }
    }
    Ok(total / (folds * repeats) as f64)
}

/// Cross-validated MSE for each feature subset.
pub fn cross_validate(
    samples: &[JackknifeSample],
    subsets: &[FeatureSubset],
    folds: usize,
    repeats: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<CvReport> {
    let (x, y) = design_matrix(samples);
    let results = subsets
        .iter()
        .map(|s| {
            let mse = cv_mse(&s.project(&x), &y, folds, repeats, params, seed)?;
            Ok(CvResult { subset: s.name.clone(), n_features: s.columns.len(), mse })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvReport { folds, repeats, target_variance: stats::variance(&y), results })
}

pub fn design_matrix(samples: &[JackknifeSample]) -> (Vec<Vec<f64>>, Vec<f64>) {
    samples.iter().map(|s| (s.features.values.clone(), s.target_tau)).unzip()
}

pub fn train_on_samples(samples: &[JackknifeSample], params: &ForestParams, seed: u64) -> Result<ForestModel> {
    let (x, y) = design_matrix(samples);
    train_forest(&x, &y, &feature_names(), params, seed)
}

/// Mean MSE increase after shuffling each column, over `repeats` shuffles.
/// Column `j`, repeat `r` shuffles with a stream derived from `(seed, j, r)`.
pub fn permutation_importance(
    model: &ForestModel,
    x: &[Vec<f64>],
    y: &[f64],
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::NotEnoughSamples(format!("{} rows, {} targets", x.len(), y.len())));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("importance needs at least one repeat".into()));
    }
    let base = stats::mse(&model.predict_all(x), y);
    let d = x[0].len();
    Ok((0..d)
        .into_par_iter()
        .map(|j| {
            let mut shuffled = x.to_vec();
            let column: Vec<f64> = x.iter().map(|r| r[j]).collect();
            let mut increase = 0.0;
            for r in 0..repeats {
                let mut col = column.clone();
                col.shuffle(&mut seeds::rng(seed, &[j as u64, r as u64]));
                for (row, v) in shuffled.iter_mut().zip(&col) {
                    row[j] = *v;
                }
                increase += stats::mse(&model.predict_all(&shuffled), y) - base;
            }
            increase / repeats as f64
        })
        .collect())
}

/// CSV `feature,category,importance`, most important first.
pub fn write_importance_csv<W: Write>(importance: &[f64], mut out: W) -> Result<()> {
    let schema = crate::features::schema();
    let mut order: Vec<usize> = (0..importance.len()).collect();
    order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    writeln!(out, "feature,category,importance")?;
    for i in order {
        writeln!(out, "{},{},{}", schema[i].0, schema[i].1, importance[i])?;
    }
    Ok(())
}

/// Anything that maps a feature vector to a predicted tau.
pub trait TauPredictor {
    fn predict_tau(&self, features: &FeatureVector) -> f64;
}

impl TauPredictor for ForestModel {
    fn predict_tau(&self, features: &FeatureVector) -> f64 {
        self.predict(&features.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphRanking {
    pub names: Vec<String>,
    pub predicted: Vec<f64>,
    pub truth: Vec<f64>,
    pub spearman: f64,
    pub kendall: f64,
    /// Set when either side is constant, so the correlations carry no order.
    pub degenerate: bool,
}

impl SubgraphRanking {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "graph,true_tau,predicted_tau")?;
        for ((n, t), p) in self.names.iter().zip(&self.truth).zip(&self.predicted) {
            writeln!(out, "{n},{t},{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RankingInputs<'a> {
    pub graphs: &'a [(String, BrowseGraph)],
    pub global: &'a BrowseGraph,
    pub global_pr: &'a RankVector,
    pub pagerank: PageRankParams,
    pub closeness_sample: usize,
}

/// Per graph: the true tau against the global PageRank and the predicted
/// tau from the graph's own features; then the rank correlation of the two.
pub fn rank_subgraphs<P: TauPredictor + Sync>(
    model: &P,
    inputs: &RankingInputs<'_>,
    seed: u64,
) -> Result<SubgraphRanking> {
    if inputs.graphs.len() < 3 {
        return Err(Error::NotEnoughSamples(format!("{} graphs; ranking needs at least 3", inputs.graphs.len())));
    }
    let rows = inputs
        .graphs
        .par_iter()
        .enumerate()
        .map(|(i, (_, g))| {
            let local = pagerank(g, &inputs.pagerank)?;
            let truth = kendall_tau(g, &local, inputs.global, inputs.global_pr)?.kendall_tau;
            let features = extract_features(g, &local, inputs.closeness_sample, &mut seeds::rng(seed, &[i as u64]))?;
            Ok((model.predict_tau(&features), truth))
        })
        .collect::<Result<Vec<_>>>()?;
    let (predicted, truth): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let agreement = compare_scores(&predicted, &truth)?;
    Ok(SubgraphRanking {
        names: inputs.graphs.iter().map(|(n, _)| n.clone()).collect(),
        predicted,
        truth,
        spearman: if agreement.degenerate { 0.0 } else { agreement.spearman_rho },
        kendall: if agreement.degenerate { 0.0 } else { agreement.kendall_tau },
        degenerate: agreement.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, m: usize, seed: u64) -> BrowseGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.add_node(&format!("n{i}"));
        }
        for _ in 0..m {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            b.add_transition(&format!("n{u}"), &format!("n{v}"), rng.gen_range(1..4));
        }
        b.build()
    }

    fn small_params(fractions: Vec<f64>, per_cell: usize) -> JackknifeParams {
        JackknifeParams { fractions, samples_per_cell: per_cell, closeness_sample: 32, ..Default::default() }
    }

    #[test]
    fn reduced_sizes() {
        assert_eq!(reduced_size(100, 0.2), 80);
        assert_eq!(reduced_size(100, 0.01), 99);
        assert_eq!(reduced_size(142, 0.05), 135);
    }

    #[test]
    fn zero_fraction_gives_tau_one() {
        let graphs = vec![("g".to_string(), random_graph(120, 400, 1))];
        let set = build_jackknife(&graphs, &small_params(vec![0.0], 3), 5).unwrap();
        assert_eq!(set.samples.len(), 3);
        assert!(set.samples.iter().all(|s| s.target_tau == 1.0));
    }

    #[test]
    fn reduced_graph_size_in_features() {
        let graphs = vec![("g".to_string(), random_graph(100, 300, 2))];
        let set = build_jackknife(&graphs, &small_params(vec![0.2], 4), 5).unwrap();
        for s in &set.samples {
            assert_eq!(s.features.get("nodes"), Some(80.0));
            assert!((-1.0..=1.0).contains(&s.target_tau));
        }
    }

    #[test]
    fn jackknife_rejects_small_graphs() {
        let graphs = vec![("tiny".to_string(), random_graph(20, 40, 3))];
        assert!(build_jackknife(&graphs, &JackknifeParams::default(), 0).is_err());
    }

    #[test]
    fn jackknife_is_seeded_and_ordered() {
        let graphs = vec![("a".to_string(), random_graph(110, 300, 4)), ("b".to_string(), random_graph(130, 500, 5))];
        let p = small_params(vec![0.05, 0.1], 2);
        let x = build_jackknife(&graphs, &p, 9).unwrap();
        assert_eq!(x, build_jackknife(&graphs, &p, 9).unwrap());
        let order: Vec<(&str, f64)> = x.samples.iter().map(|s| (s.source_graph.as_str(), s.removal_fraction)).collect();
        assert_eq!(
            order,
            vec![("a", 0.05), ("a", 0.05), ("a", 0.1), ("a", 0.1), ("b", 0.05), ("b", 0.05), ("b", 0.1), ("b", 0.1)]
        );
    }

    #[test]
    fn samples_csv_round_trip() {
        let graphs = vec![("g".to_string(), random_graph(100, 250, 6))];
        let set = build_jackknife(&graphs, &small_params(vec![0.1], 3), 1).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&set.samples, &mut buf).unwrap();
        assert_eq!(read_samples_csv(&buf[..]).unwrap(), set.samples);
        assert!(read_samples_csv(&b"graph,x\n"[..]).is_err());
    }

    fn linear_data(n: usize, d: usize, planted: usize, noise: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
        let y = x.iter().map(|r| 3.0 * r[planted] + noise * (rng.gen::<f64>() - 0.5)).collect();
        (x, y)
    }

    #[test]
    fn cv_beats_mean_baseline() {
        let (x, y) = linear_data(120, 5, 2, 0.3, 1);
        let params = ForestParams { n_trees: 30, features_per_split: 2, ..Default::default() };
        let mse = cv_mse(&x, &y, 5, 2, &params, 3).unwrap();
        assert!(mse < stats::variance(&y), "{mse} vs {}", stats::variance(&y));
        assert_eq!(mse.to_bits(), cv_mse(&x, &y, 5, 2, &params, 3).unwrap().to_bits());
    }

    #[test]
    fn leave_one_out_is_finite() {
        let (x, y) = linear_data(15, 3, 0, 0.1, 2);
        let params = ForestParams { n_trees: 5, features_per_split: 3, ..Default::default() };
        assert!(cv_mse(&x, &y, 15, 1, &params, 0).unwrap().is_finite());
        assert!(cv_mse(&x, &y, 16, 1, &params, 0).is_err());
    }

    #[test]
    fn constant_junk_column_barely_moves_cv() {
        let (x, y) = linear_data(100, 4, 1, 0.2, 3);
        let params = ForestParams { n_trees: 40, features_per_split: 4, ..Default::default() };
        let base = cv_mse(&x, &y, 5, 2, &params, 7).unwrap();
        let padded: Vec<Vec<f64>> = x.iter().map(|r| r.iter().copied().chain([1.0]).collect()).collect();
        let params5 = ForestParams { features_per_split: 5, ..params };
        let with_junk = cv_mse(&padded, &y, 5, 2, &params5, 7).unwrap();
        assert!((with_junk - base).abs() < 0.1 * base, "{base} vs {with_junk}");
    }

    #[test]
    fn planted_feature_dominates_importance() {
        let (x, y) = linear_data(150, 6, 4, 0.0, 4);
        let names: Vec<String> = (0..6).map(|i| format!("f{i}")).collect();
        let params = ForestParams { n_trees: 1, features_per_split: 6, min_leaf: 1, bootstrap: false };
        let model = train_forest(&x, &y, &names, &params, 0).unwrap();
        let imp = permutation_importance(&model, &x, &y, 5, 1).unwrap();
        for (j, v) in imp.iter().enumerate() {
            if j != 4 {
                assert!(imp[4] > 10.0 * v.abs(), "{imp:?}");
            }
        }
        assert_eq!(imp, permutation_importance(&model, &x, &y, 5, 1).unwrap());
    }

    #[test]
    fn constant_feature_has_zero_importance() {
        let (mut x, y) = linear_data(60, 3, 0, 0.1, 5);
        for r in &mut x {
            r[2] = 7.0;
        }
        let names: Vec<String> = (0..3).map(|i| format!("f{i}")).collect();
        let params = ForestParams { n_trees: 10, features_per_split: 3, ..Default::default() };
        let model = train_forest(&x, &y, &names, &params, 0).unwrap();
        assert_eq!(permutation_importance(&model, &x, &y, 3, 0).unwrap()[2], 0.0);
    }

    struct Oracle(Vec<(Vec<f64>, f64)>);

    impl TauPredictor for Oracle {
        fn predict_tau(&self, f: &FeatureVector) -> f64 {
            self.0.iter().find(|(v, _)| *v == f.values).map(|(_, t)| *t).unwrap()
        }
    }

    struct Constant;

    impl TauPredictor for Constant {
        fn predict_tau(&self, _: &FeatureVector) -> f64 {
            0.5
        }
    }

    #[test]
    fn ranking_with_oracle_and_constant_models() {
        let global = random_graph(300, 1500, 7);
        let pr_params = PageRankParams::default();
        let global_pr = pagerank(&global, &pr_params).unwrap();
        let graphs: Vec<(String, BrowseGraph)> = [40usize, 80, 150, 250]
            .iter()
            .map(|&k| (format!("g{k}"), induced_subgraph(&global, &(0..k).collect()).unwrap()))
            .collect();
        let inputs = RankingInputs {
            graphs: &graphs,
            global: &global,
            global_pr: &global_pr,
            pagerank: pr_params,
            closeness_sample: 16,
        };
        let oracle = Oracle(
            graphs
                .iter()
                .enumerate()
                .map(|(i, (_, g))| {
                    let local = pagerank(g, &pr_params).unwrap();
                    let f = extract_features(g, &local, 16, &mut seeds::rng(3, &[i as u64])).unwrap();
                    (f.values, kendall_tau(g, &local, &global, &global_pr).unwrap().kendall_tau)
                })
                .collect(),
        );
        let r = rank_subgraphs(&oracle, &inputs, 3).unwrap();
        assert_eq!(r.spearman, 1.0);
        assert!(!r.degenerate);
        let c = rank_subgraphs(&Constant, &inputs, 3).unwrap();
        assert_eq!(c.spearman, 0.0);
        assert!(c.degenerate);
        let short = RankingInputs { graphs: &graphs[..2], ..inputs };
        assert!(rank_subgraphs(&Constant, &short, 3).is_err());
    }
}
