use std::path::{Path, PathBuf};

use lrp_core::ingest::{DEFAULT_BROWSER_TOKENS, DEFAULT_TIMEOUT_MINUTES};
use lrp_core::predictor::{ForestParams, DEFAULT_FRACTIONS, DEFAULT_SAMPLES_PER_CELL};
use lrp_core::synth::SynthConfig;
use lrp_core::PageRankParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Everything a run depends on besides its input files. Loaded from
/// `--config`, then overridden by flags, then echoed as `config.toml`
/// into the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub alpha: f64,
    pub timeout_minutes: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub pagerank: PageRankSection,
    pub ingest: IngestSection,
    pub surfer: SurferSection,
    pub rings: RingsSection,
    pub features: FeaturesSection,
    pub jackknife: JackknifeSection,
    pub forest: ForestParams,
    pub cv: CvSection,
    pub importance: ImportanceSection,
    pub synth: SynthConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            alpha: 0.85,
            timeout_minutes: DEFAULT_TIMEOUT_MINUTES,
            out_dir: None,
            jobs: None,
            pagerank: PageRankSection::default(),
            ingest: IngestSection::default(),
            surfer: SurferSection::default(),
            rings: RingsSection::default(),
            features: FeaturesSection::default(),
            jackknife: JackknifeSection::default(),
            forest: ForestParams::default(),
            cv: CvSection::default(),
            importance: ImportanceSection::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankSection {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankSection {
    fn default() -> Self {
        let d = PageRankParams::default();
        Self { tol: d.tol, max_iter: d.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSection {
    /// Registered domains of the site itself; defaults to the synthetic portal.
    pub internal_domains: Vec<String>,
    pub browser_tokens: Vec<String>,
}

impl Default for IngestSection {
    fn default() -> Self {
        Self {
            internal_domains: vec![SynthConfig::default().portal_domain],
            browser_tokens: DEFAULT_BROWSER_TOKENS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurferSection {
    pub runs: usize,
    pub max_steps: usize,
    /// `global` or `per-candidate`.
    pub universe: String,
}

impl Default for SurferSection {
    fn default() -> Self {
        Self { runs: 100, max_steps: 20, universe: "global".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RingsSection {
    /// Each entry is `full` or `top:<percent>`.
    pub strategies: Vec<String>,
    pub max_rings: usize,
    /// `rb`, `srb` or `r`.
    pub regime: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_size: Option<usize>,
}

impl Default for RingsSection {
    fn default() -> Self {
        Self {
            strategies: vec!["full".into(), "top:5".into()],
            max_rings: lrp_core::rings::DEFAULT_MAX_RINGS,
            regime: "rb".into(),
            target_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesSection {
    pub closeness_sample: usize,
}

impl Default for FeaturesSection {
    fn default() -> Self {
        Self { closeness_sample: lrp_core::features::DEFAULT_CLOSENESS_SAMPLE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JackknifeSection {
    pub fractions: Vec<f64>,
    pub samples_per_cell: usize,
}

impl Default for JackknifeSection {
    fn default() -> Self {
        Self { fractions: DEFAULT_FRACTIONS.to_vec(), samples_per_cell: DEFAULT_SAMPLES_PER_CELL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub folds: usize,
    pub repeats: usize,
}

impl Default for CvSection {
    fn default() -> Self {
        Self { folds: 5, repeats: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImportanceSection {
    pub repeats: usize,
}

impl Default for ImportanceSection {
    fn default() -> Self {
        Self { repeats: 5 }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        if !path.exists() {
            return Err(CliError::MissingInput(path.to_owned()));
        }
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.timeout_minutes.is_nan() || self.timeout_minutes <= 0.0 {
            return Err(format!("timeout_minutes must be positive, got {}", self.timeout_minutes));
        }
        if self.jobs == Some(0) {
            return Err("jobs must be at least 1".into());
        }
        self.synth.validate().map_err(|e| e.to_string())
    }

    pub fn pagerank_params(&self) -> PageRankParams {
        PageRankParams { alpha: self.alpha, tol: self.pagerank.tol, max_iter: self.pagerank.max_iter }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = ExperimentConfig::parse("seed = 9\n[forest]\nn_trees = 7\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.forest.n_trees, 7);
        assert_eq!(cfg.forest.min_leaf, ForestParams::default().min_leaf);
        assert_eq!(cfg.cv, CvSection::default());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(ExperimentConfig::parse("seeed = 1").is_err());
        assert!(ExperimentConfig::parse("alpha = 1.5").is_err());
        assert!(ExperimentConfig::parse("[cv]\nfolds = \"five\"").is_err());
    }
}
