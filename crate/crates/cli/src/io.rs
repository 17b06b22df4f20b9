//! File conventions shared by the subcommands.
//!
//! A graph directory holds one edge list per graph and a `manifest.tsv`
//! with rows `name<TAB>file<TAB>role`, role being `referrer` or `global`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use lrp_core::graph::tsv::{read_graph_file, write_graph_file};
use lrp_core::BrowseGraph;

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.tsv";
pub const GLOBAL_NAME: &str = "full";

pub fn require(path: &Path) -> CliResult<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::MissingInput(path.to_owned()))
    }
}

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(File::open(require(path)?)?))
}

/// Creates `dir/name` (and `dir`), runs `write`, and flushes.
pub fn write_file<F>(dir: &Path, name: &str, write: F) -> CliResult<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> CliResult,
{
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut out = BufWriter::new(File::create(&path)?);
    write(&mut out)?;
    out.flush()?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Graph directory written by `extract`.
    #[arg(long)]
    pub graphs: Option<PathBuf>,
    /// Extra referrer graph as NAME=EDGE_FILE; repeatable.
    #[arg(long = "graph", value_name = "NAME=FILE")]
    pub graph: Vec<String>,
    /// Global graph edge file; overrides the directory's global graph.
    #[arg(long)]
    pub global: Option<PathBuf>,
}

pub struct GraphSet {
    pub referrers: Vec<(String, BrowseGraph)>,
    pub global: Option<BrowseGraph>,
}

fn load_graph(path: &Path) -> CliResult<BrowseGraph> {
    Ok(read_graph_file(require(path)?)?)
}

impl GraphArgs {
    pub fn load(&self) -> CliResult<GraphSet> {
        let mut set = GraphSet { referrers: Vec::new(), global: None };
        if let Some(dir) = &self.graphs {
            for line in open(&dir.join(MANIFEST))?.lines() {
                let line = line?;
                let fields: Vec<&str> = line.split('\t').collect();
                let [name, file, role] = fields[..] else {
                    return Err(CliError::Config(format!("bad manifest row {line:?}")));
                };
                let g = load_graph(&dir.join(file))?;
                match role {
                    "global" => set.global = Some(g),
                    "referrer" => set.referrers.push((name.to_owned(), g)),
                    other => return Err(CliError::Config(format!("unknown manifest role {other:?}"))),
                }
            }
        }
        for arg in &self.graph {
            let (name, file) = arg
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--graph expects NAME=FILE, got {arg:?}")))?;
            set.referrers.push((name.to_owned(), load_graph(Path::new(file))?));
        }
        if let Some(path) = &self.global {
            set.global = Some(load_graph(path)?);
        }
        log::info!("loaded {} referrer graphs, global graph {}", set.referrers.len(), set.global.is_some());
        Ok(set)
    }
}

impl GraphSet {
    pub fn need_referrers(&self, at_least: usize) -> CliResult<&[(String, BrowseGraph)]> {
        if self.referrers.len() < at_least {
            return Err(CliError::Config(format!(
                "need at least {at_least} referrer graphs, got {}",
                self.referrers.len()
            )));
        }
        Ok(&self.referrers)
    }

    pub fn need_global(&self) -> CliResult<&BrowseGraph> {
        self.global.as_ref().ok_or_else(|| CliError::Config("no global graph given (--graphs or --global)".into()))
    }
}

/// Writes every graph plus the manifest into `dir`.
pub fn write_graph_dir(dir: &Path, referrers: &[(String, BrowseGraph)], global: &BrowseGraph) -> CliResult {
    std::fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for (name, g) in referrers {
        let file = format!("{name}.tsv");
        write_graph_file(g, &dir.join(&file))?;
        rows.push(format!("{name}\t{file}\treferrer"));
    }
    let file = format!("{GLOBAL_NAME}.tsv");
    write_graph_file(global, &dir.join(&file))?;
    rows.push(format!("{GLOBAL_NAME}\t{file}\tglobal"));
    write_file(dir, MANIFEST, |out| {
        for r in &rows {
            writeln!(out, "{r}")?;
        }
        Ok(())
    })?;
    Ok(())
}
