use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use lrp_core::features::{extract_features, write_features_csv, write_schema, FeatureVector};
use lrp_core::graph::stats;
use lrp_core::ingest::{
    extract_subgraph, filter_crawlers, parse_log, read_sessions, sessionize, sessions_graph, write_sessions,
    SessionConfig, SessionSelector,
};
use lrp_core::pagerank::write_ranks;
use lrp_core::predictor::{
    build_jackknife, cross_validate, design_matrix, permutation_importance, rank_subgraphs, read_samples_csv,
    train_on_samples, write_importance_csv, write_samples_csv, FeatureSubset, ForestModel, JackknifeParams,
    RankingInputs,
};
use lrp_core::rank_compare::{self, write_tau_matrix};
use lrp_core::rings::{make_initial_sets, run_rings_with_global, write_rings_csv, Regime, RingSequence, Strategy};
use lrp_core::surfer::{surfer_curves, write_curves, SurferParams, UniverseSize};
use lrp_core::synth::{generate_corpus, SynthConfig};
use lrp_core::{pagerank as run_pagerank, seeds, BrowseGraph, RankVector};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::io::{open, require, write_file, write_graph_dir, GraphArgs, GLOBAL_NAME};
use crate::Common;

pub const OUT_DIR_ENV: &str = "LRP_OUT_DIR";

/// Resolved config and output directory of one invocation.
struct Run {
    cfg: ExperimentConfig,
    out: PathBuf,
}

fn setup(common: &Common, apply: impl FnOnce(&mut ExperimentConfig) -> CliResult) -> CliResult<Run> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(alpha) = common.alpha {
        cfg.alpha = alpha;
    }
    if let Some(jobs) = common.jobs {
        cfg.jobs = Some(jobs);
    }
    apply(&mut cfg)?;
    cfg.validate().map_err(CliError::Config)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Some(jobs) = cfg.jobs {
        // only fails when a pool already exists, which is harmless here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    std::fs::create_dir_all(&out)?;
    // where and how fast a run executes does not belong in its provenance
    let echo = ExperimentConfig { out_dir: None, jobs: None, ..cfg.clone() };
    write_file(&out, "config.toml", |w| Ok(w.write_all(echo.to_toml().as_bytes())?))?;
    log::info!("seed {} alpha {} output {}", cfg.seed, cfg.alpha, out.display());
    Ok(Run { cfg, out })
}

fn write_to(path: &Path, write: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> CliResult) -> CliResult {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::Config(format!("not a file path: {}", path.display())))?;
    write_file(dir, &name.to_string_lossy(), write)?;
    Ok(())
}

fn ranks(graphs: &[(&str, &BrowseGraph)], cfg: &ExperimentConfig) -> CliResult<Vec<RankVector>> {
    let params = cfg.pagerank_params();
    Ok(graphs.par_iter().map(|(_, g)| run_pagerank(g, &params)).collect::<Result<_, _>>()?)
}

/// Referrer graphs followed by the global graph when there is one.
fn named_graphs<'a>(
    referrers: &'a [(String, BrowseGraph)],
    global: Option<&'a BrowseGraph>,
) -> Vec<(&'a str, &'a BrowseGraph)> {
    let mut v: Vec<(&str, &BrowseGraph)> = referrers.iter().map(|(n, g)| (n.as_str(), g)).collect();
    if let Some(g) = global {
        v.push((GLOBAL_NAME, g));
    }
    v
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Standalone generator config (TOML); replaces the `[synth]` table.
    #[arg(long)]
    pub synth_config: Option<PathBuf>,
    /// Multiply every session volume by this factor.
    #[arg(long)]
    pub scale: Option<f64>,
}

pub fn synth(common: &Common, args: SynthArgs) -> CliResult {
    let run = setup(common, |cfg| {
        if let Some(path) = &args.synth_config {
            let text = std::fs::read_to_string(require(path)?)?;
            cfg.synth = SynthConfig::from_toml(&text).map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(f) = args.scale {
            if !(f > 0.0 && f.is_finite()) {
                return Err(CliError::Config(format!("scale must be positive, got {f}")));
            }
            cfg.synth = cfg.synth.scaled(f);
        }
        Ok(())
    })?;
    let synth = &run.cfg.synth;
    let corpus = generate_corpus(synth, run.cfg.seed)?;
    log::info!("generated {} pageviews in {} sessions", corpus.records.len(), corpus.truth.len());
    write_file(&run.out, "log.tsv", |w| Ok(corpus.write_log(w)?))?;
    write_file(&run.out, "truth.jsonl", |w| Ok(corpus.write_truth(w)?))?;
    write_file(&run.out, "referrers.tsv", |w| {
        for p in &synth.profiles {
            writeln!(w, "{}\t{}", p.name, synth.selector_for(p))?;
        }
        Ok(())
    })?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Pageview log: bcookie, timestamp, referrer, url, user agent (TSV).
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub timeout_minutes: Option<f64>,
    /// Registered domain of the site itself; repeatable.
    #[arg(long = "internal-domain")]
    pub internal_domains: Vec<String>,
}

pub fn ingest(common: &Common, args: IngestArgs) -> CliResult {
    let run = setup(common, |cfg| {
        if let Some(t) = args.timeout_minutes {
            cfg.timeout_minutes = t;
        }
        if !args.internal_domains.is_empty() {
            cfg.ingest.internal_domains = args.internal_domains.clone();
        }
        Ok(())
    })?;
    let parsed = parse_log(open(&args.log)?)?;
    let records = parsed.records.len();
    let kept = filter_crawlers(parsed.records, &run.cfg.ingest.browser_tokens);
    let mut sc = SessionConfig::new(run.cfg.ingest.internal_domains.iter().cloned());
    sc.timeout_minutes = run.cfg.timeout_minutes;
    let sessions = sessionize(&kept, &sc);
    log::info!(
        "{} lines, {} malformed, {} crawler pageviews dropped, {} sessions",
        parsed.lines,
        parsed.malformed,
        records - kept.len(),
        sessions.len()
    );
    write_file(&run.out, "sessions.jsonl", |w| Ok(write_sessions(&sessions, w)?))?;
    write_file(&run.out, "ingest.csv", |w| {
        writeln!(w, "lines,malformed,records,kept,sessions")?;
        writeln!(w, "{},{},{},{},{}", parsed.lines, parsed.malformed, records, kept.len(), sessions.len())?;
        Ok(())
    })?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Sessions written by `ingest`.
    #[arg(long)]
    pub sessions: PathBuf,
    /// Rows `name<TAB>selector`, as written by `synth`.
    #[arg(long)]
    pub referrers: Option<PathBuf>,
    /// NAME=SELECTOR with SELECTOR a domain, `url:<referrer>` or `direct`; repeatable.
    #[arg(long = "referrer", value_name = "NAME=SELECTOR")]
    pub referrer: Vec<String>,
}

pub fn extract(common: &Common, args: ExtractArgs) -> CliResult {
    let run = setup(common, |_| Ok(()))?;
    let mut selectors: Vec<(String, SessionSelector)> = Vec::new();
    if let Some(path) = &args.referrers {
        for line in open(path)?.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (name, sel) =
                line.split_once('\t').ok_or_else(|| CliError::Config(format!("bad referrer row {line:?}")))?;
            selectors.push((name.to_owned(), sel.parse().expect("selector parsing is infallible")));
        }
    }
    for arg in &args.referrer {
        let (name, sel) = arg
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--referrer expects NAME=SELECTOR, got {arg:?}")))?;
        selectors.push((name.to_owned(), sel.parse().expect("selector parsing is infallible")));
    }
    if selectors.is_empty() {
        return Err(CliError::Config("no referrers given (--referrers or --referrer)".into()));
    }
    let sessions = read_sessions(open(&args.sessions)?)?;
    let referrers: Vec<(String, BrowseGraph)> =
        selectors.par_iter().map(|(name, sel)| (name.clone(), extract_subgraph(&sessions, sel))).collect();
    let global = sessions_graph(&sessions);
    write_graph_dir(&run.out.join("graphs"), &referrers, &global)?;
    write_file(&run.out, "graph_stats.csv", |w| {
        writeln!(w, "graph,nodes,edges,density,reciprocity,gcc_fraction")?;
        for (name, g) in named_graphs(&referrers, Some(&global)) {
            let s = stats(g);
            writeln!(w, "{name},{},{},{},{},{}", s.nodes, s.edges, s.density, s.reciprocity, s.gcc_fraction)?;
        }
        Ok(())
    })?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct PagerankArgs {
    #[command(flatten)]
    pub graphs: GraphArgs,
    /// L1 convergence tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

pub fn pagerank(common: &Common, args: PagerankArgs) -> CliResult {
    let run = setup(common, |cfg| {
        if let Some(t) = args.tol {
            cfg.pagerank.tol = t;
        }
        if let Some(m) = args.max_iter {
            cfg.pagerank.max_iter = m;
        }
        Ok(())
    })?;
    let set = args.graphs.load()?;
    let graphs = named_graphs(&set.referrers, set.global.as_ref());
    let ranks = ranks(&graphs, &run.cfg)?;
    let dir = run.out.join("pagerank");
    for ((name, g), r) in graphs.iter().zip(&ranks) {
        if !r.converged {
            log::warn!("{name}: no convergence after {} iterations (residual {})", r.iterations_used, r.residual);
        }
        write_file(&dir, &format!("{name}.tsv"), |w| Ok(write_ranks(g, r, w)?))?;
    }
    write_file(&run.out, "pagerank.csv", |w| {
        writeln!(w, "graph,nodes,iterations,residual,converged")?;
        for ((name, g), r) in graphs.iter().zip(&ranks) {
            writeln!(w, "{name},{},{},{},{}", g.node_count(), r.iterations_used, r.residual, r.converged)?;
        }
        Ok(())
    })?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct TauMatrixArgs {
    #[command(flatten)]
    pub graphs: GraphArgs,
}

pub fn tau_matrix(common: &Common, args: TauMatrixArgs) -> CliResult {
    let run = setup(common, |_| Ok(()))?;
    let set = args.graphs.load()?;
    let graphs = named_graphs(&set.referrers, set.global.as_ref());
    let ranks = ranks(&graphs, &run.cfg)?;
    let rows: Vec<(&str, &BrowseGraph, &RankVector)> =
        graphs.iter().zip(&ranks).map(|(&(n, g), r)| (n, g, r)).collect();
    let m = rank_compare::tau_matrix(&rows);
    let names: Vec<&str> = graphs.iter().map(|(n, _)| *n).collect();
    write_file(&run.out, "tau_matrix.csv", |w| Ok(write_tau_matrix(&names, &m, w)?))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct SurferArgs {
    #[command(flatten)]
    pub graphs: GraphArgs,
    /// Walks per true graph.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// `global` or `per-candidate` universe size for teleport likelihoods.
    #[arg(long)]
    pub universe: Option<String>,
}

fn parse_universe(s: &str) -> CliResult<UniverseSize> {
    match s {
        "global" => Ok(UniverseSize::Global),
        "per-candidate" => Ok(UniverseSize::PerCandidate),
        other => Err(CliError::Config(format!("universe must be global or per-candidate, got {other:?}"))),
    }
}

pub fn surfer(common: &Common, args: SurferArgs) -> CliResult {
    let run = setup(common, |cfg| {
        if let Some(r) = args.runs {
            cfg.surfer.runs = r;
        }
        if let Some(m) = args.max_steps {
            cfg.surfer.max_steps = m;
        }
        if let Some(u) = &args.universe {
            cfg.surfer.universe = u.clone();
        }
        parse_universe(&cfg.surfer.universe).map(drop)
    })?;
    let set = args.graphs.load()?;
    let referrers = set.need_referrers(2)?;
    let params = SurferParams {
        alpha: run.cfg.alpha,
        max_steps: run.cfg.surfer.max_steps,
        universe: parse_universe(&run.cfg.surfer.universe)?,
        ..SurferParams::default()
    };
    let candidates: Vec<&BrowseGraph> = referrers.iter().map(|(_, g)| g).collect();
    let curves = surfer_curves(&candidates, run.cfg.surfer.runs, &params, run.cfg.seed)?;
    let names: Vec<&str> = referrers.iter().map(|(n, _)| n.as_str()).collect();
    for (name, acc) in names.iter().zip(&curves.accuracy) {
        log::info!("{name}: accuracy {:.3} after {} steps", acc[params.max_steps], params.max_steps);
    }
    write_file(&run.out, "surfer.csv", |w| Ok(write_curves(&names, &curves, w)?))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct RingsArgs {
    #[command(flatten)]
    pub graphs: GraphArgs,
    /// `full` or `top:<percent>`; repeatable.
    #[arg(long = "strategy")]
    pub strategies: Vec<String>,
    #[arg(long)]
    pub max_rings: Option<usize>,
    /// Initial sets: `rb`, `srb` or `r`.
    #[arg(long)]
    pub regime: Option<String>,
    /// Target size for `srb` and `r` samples.
    #[arg(long)]
    pub target_size: Option<usize>,
}

pub fn rings(common: &Common, args: RingsArgs) -> CliResult {
    let run = setup(common, |cfg| {
        if !args.strategies.is_empty() {
            cfg.rings.strategies = args.strategies.clone();
        }
        if let Some(m) = args.max_rings {
            cfg.rings.max_rings = m;
        }
        if let Some(r) = &args.regime {
            cfg.rings.regime = r.clone();
        }
        if args.target_size.is_some() {
            cfg.rings.target_size = args.target_size;
        }
        Ok(())
    })?;
    let rc = &run.cfg.rings;
    let strategies: Vec<Strategy> = rc
        .strategies
        .iter()
        .map(|s| s.parse().map_err(|e: lrp_core::Error| CliError::Config(e.to_string())))
        .collect::<CliResult<_>>()?;
    let regime: Regime = rc.regime.parse().map_err(|e: lrp_core::Error| CliError::Config(e.to_string()))?;
    let set = args.graphs.load()?;
    let referrers = set.need_referrers(1)?;
    let global = set.need_global()?;
    let params = run.cfg.pagerank_params();
    let global_pr = run_pagerank(global, &params)?;
    let locals: Vec<BrowseGraph> = referrers.iter().map(|(_, g)| g.clone()).collect();
    let initial = make_initial_sets(global, &locals, regime, rc.target_size, &mut seeds::rng(run.cfg.seed, &[0]))?;
    let mut runs: Vec<(String, RingSequence)> = Vec::new();
    for &strategy in &strategies {
        let seqs = initial
            .par_iter()
            .map(|h0| run_rings_with_global(global, &global_pr, h0, strategy, &params, rc.max_rings))
            .collect::<Result<Vec<_>, _>>()?;
        for ((name, _), seq) in referrers.iter().zip(seqs) {
            log::info!("{name} {strategy}: {} rings, final tau {:.4}", seq.rings.len(), seq.last_tau());
            runs.push((name.clone(), seq));
        }
    }
    let rows: Vec<(&str, &RingSequence)> = runs.iter().map(|(n, s)| (n.as_str(), s)).collect();
    write_file(&run.out, "rings.csv", |w| Ok(write_rings_csv(&rows, w)?))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub graphs: GraphArgs,
    /// Write the feature schema instead of feature vectors.
    #[arg(long)]
    pub schema: bool,
    /// Sources sampled for closeness; every node when the graph is smaller.
    #[arg(long)]
    pub closeness_sample: Option<usize>,
}

pub fn features(common: &Common, args: FeaturesArgs) -> CliResult {
    let run = setup(common, |cfg| {
        if let Some(k) = args.closeness_sample {
            cfg.features.closeness_sample = k;
        }
        Ok(())
    })?;
    if args.schema {
        write_file(&run.out, "feature_schema.csv", |w| Ok(write_schema(w)?))?;
        return Ok(());
    }
    let set = args.graphs.load()?;
    let graphs = named_graphs(&set.referrers, set.global.as_ref());
    if graphs.is_empty() {
        return Err(CliError::Config("no graphs given".into()));
    }
    let ranks = ranks(&graphs, &run.cfg)?;
    let k = run.cfg.features.closeness_sample;
    let vectors: Vec<FeatureVector> = graphs
        .iter()
        .zip(&ranks)
        .enumerate()
        .map(|(i, ((_, g), r))| extract_features(g, r, k, &mut seeds::rng(run.cfg.seed, &[i as u64])))
        .collect::<Result<_, _>>()?;
    let rows: Vec<(&str, &FeatureVector)> = graphs.iter().map(|(n, _)| *n).zip(&vectors).collect();
    write_file(&run.out, "features.csv", |w| Ok(write_features_csv(&rows, w)?))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct JackknifeArgs {
    #[command(flatten)]
    pub graphs: GraphArgs,
    /// Comma-separated removal fractions.
    #[arg(long, value_delimiter = ',')]
    pub fractions: Vec<f64>,
    #[arg(long)]
    pub samples_per_cell: Option<usize>,
    #[arg(long)]
    pub closeness_sample: Option<usize>,
}

pub fn jackknife(common: &Common, args: JackknifeArgs) -> CliResult {
    let run = setup(common, |cfg| {
        if !args.fractions.is_empty() {
            cfg.jackknife.fractions = args.fractions.clone();
        }
        if let Some(s) = args.samples_per_cell {
            cfg.jackknife.samples_per_cell = s;
        }
        if let Some(k) = args.closeness_sample {
            cfg.features.closeness_sample = k;
        }
        Ok(())
    })?;
    let set = args.graphs.load()?;
    let referrers = set.need_referrers(1)?;
    let params = JackknifeParams {
        fractions: run.cfg.jackknife.fractions.clone(),
        samples_per_cell: run.cfg.jackknife.samples_per_cell,
        pagerank: run.cfg.pagerank_params(),
        closeness_sample: run.cfg.features.closeness_sample,
    };
    let set = build_jackknife(referrers, &params, run.cfg.seed)?;
    log::info!("{} samples, {} skipped draws", set.samples.len(), set.skipped);
    write_file(&run.out, "jackknife.csv", |w| Ok(write_samples_csv(&set.samples, w)?))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Jackknife samples written by `jackknife`.
    #[arg(long)]
    pub train: PathBuf,
    /// Per-category CV table [default: <out>/cv_report.csv].
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Permutation importances [default: <out>/importance.csv].
    #[arg(long)]
    pub importance: Option<PathBuf>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub features_per_split: Option<usize>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// CV repetitions.
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub importance_repeats: Option<usize>,
}

pub fn train(common: &Common, args: TrainArgs) -> CliResult {
    let run = setup(common, |cfg| {
        let f = &mut cfg.forest;
        f.n_trees = args.trees.unwrap_or(f.n_trees);
        f.features_per_split = args.features_per_split.unwrap_or(f.features_per_split);
        f.min_leaf = args.min_leaf.unwrap_or(f.min_leaf);
        cfg.cv.folds = args.folds.unwrap_or(cfg.cv.folds);
        cfg.cv.repeats = args.repeats.unwrap_or(cfg.cv.repeats);
        cfg.importance.repeats = args.importance_repeats.unwrap_or(cfg.importance.repeats);
        Ok(())
    })?;
    let samples = read_samples_csv(open(&args.train)?)?;
    let cfg = &run.cfg;
    log::info!("{} training samples", samples.len());
    let report =
        cross_validate(&samples, &FeatureSubset::standard(), cfg.cv.folds, cfg.cv.repeats, &cfg.forest, cfg.seed)?;
    for r in &report.results {
        log::info!("cv {}: mse {:e}", r.subset, r.mse);
    }
    let report_path = args.report.clone().unwrap_or_else(|| run.out.join("cv_report.csv"));
    write_to(&report_path, |w| Ok(report.write_csv(w)?))?;
    let model = train_on_samples(&samples, &cfg.forest, cfg.seed)?;
    write_file(&run.out, "model.json", |w| Ok(w.write_all(model.to_json()?.as_bytes())?))?;
    let (x, y) = design_matrix(&samples);
    let importance = permutation_importance(&model, &x, &y, cfg.importance.repeats, cfg.seed)?;
    let importance_path = args.importance.clone().unwrap_or_else(|| run.out.join("importance.csv"));
    write_to(&importance_path, |w| Ok(write_importance_csv(&importance, w)?))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub graphs: GraphArgs,
    /// Model written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub closeness_sample: Option<usize>,
}

pub fn report(common: &Common, args: ReportArgs) -> CliResult {
    let run = setup(common, |cfg| {
        if let Some(k) = args.closeness_sample {
            cfg.features.closeness_sample = k;
        }
        Ok(())
    })?;
    let text = std::fs::read_to_string(require(&args.model)?)?;
    let model = ForestModel::from_json(&text)?;
    let set = args.graphs.load()?;
    let referrers = set.need_referrers(3)?;
    let global = set.need_global()?;
    let params = run.cfg.pagerank_params();
    let global_pr = run_pagerank(global, &params)?;
    let inputs = RankingInputs {
        graphs: referrers,
        global,
        global_pr: &global_pr,
        pagerank: params,
        closeness_sample: run.cfg.features.closeness_sample,
    };
    let ranking = rank_subgraphs(&model, &inputs, run.cfg.seed)?;
    log::info!("spearman {} kendall {} degenerate {}", ranking.spearman, ranking.kendall, ranking.degenerate);
    write_file(&run.out, "ranking.csv", |w| Ok(ranking.write_csv(w)?))?;
    write_file(&run.out, "ranking_summary.csv", |w| {
        writeln!(w, "spearman,kendall,degenerate")?;
        writeln!(w, "{},{},{}", ranking.spearman, ranking.kendall, ranking.degenerate)?;
        Ok(())
    })?;
    Ok(())
}
