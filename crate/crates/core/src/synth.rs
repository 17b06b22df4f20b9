//! Synthetic pageview logs with known session ground truth.
//!
//! Every referrer profile draws sessions from its own Markov chain over page
//! topics: an entry distribution, a row-stochastic topic transition matrix
//! and a geometric session length. Pages are picked uniformly inside the
//! chosen topic. Sessions are dealt to users; a user's next session either
//! starts after a gap longer than the timeout or, when its referrer is
//! external, possibly within the timeout, so both split rules occur.
//! Optional background sessions without a referrer fill out the full graph
//! without forming a referrer subgraph of their own.

use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{registered_domain, PageviewRecord, DEFAULT_TIMEOUT_MINUTES};
use crate::seeds;

pub const BROWSER_AGENT: &str =
    "Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/120.0 Safari/537.36";
pub const CRAWLER_AGENT: &str = "ExampleCrawler/1.0 (+https://crawler.example/about)";

/// Seconds between pageviews inside a session.
pub const PAGEVIEW_GAP: (u64, u64) = (30, 600);
const TIMEOUT_SECS: u64 = (DEFAULT_TIMEOUT_MINUTES * 60.0) as u64;
/// Seconds between sessions that are split by inactivity.
const SESSION_GAP: (u64, u64) = (TIMEOUT_SECS + 1, 6 * 3600);

/// Topic dynamics of one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopicChain {
    /// Entry distribution and row-stochastic transition matrix over topics.
    Explicit { entry: Vec<f64>, matrix: Vec<Vec<f64>> },
    /// Topic popularity with the `focus` topics multiplied by `boost`, used
    /// both for the entry topic and for every jump. A step stays on the
    /// current topic with probability `stay` and jumps otherwise, so row
    /// `r` of the matrix is `stay * e_r + (1 - stay) * w`.
    Mixture {
        #[serde(default)]
        focus: Vec<usize>,
        #[serde(default = "unit_boost")]
        boost: f64,
        stay: f64,
    },
}

fn unit_boost() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferrerProfile {
    pub name: String,
    /// Referrer URL carried by the first pageview of each session.
    pub referrer: String,
    /// Stopping probability of the geometric session length.
    pub p: f64,
    /// Number of sessions generated for this profile.
    pub volume: usize,
    #[serde(flatten)]
    pub chain: TopicChain,
}

/// Direct traffic (empty referrer) that only shows up in the full graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub p: f64,
    pub volume: usize,
    pub stay: f64,
}

/// Truth label of background sessions.
pub const BACKGROUND_NAME: &str = "direct";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub portal_domain: String,
    pub topic_count: usize,
    /// Popularity of topic `t` is proportional to `(t + 1)^-topic_zipf`.
    pub topic_zipf: f64,
    pub pages_per_topic: usize,
    pub max_session_length: usize,
    pub max_sessions_per_user: usize,
    /// Probability that a session following another one with an external
    /// referrer starts within the timeout.
    pub quick_return: f64,
    /// Fraction of users whose pageviews carry a crawler user agent.
    pub bot_fraction: f64,
    pub start_timestamp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<Background>,
    #[serde(rename = "profile")]
    pub profiles: Vec<ReferrerProfile>,
}

const ROW_TOLERANCE: f64 = 1e-12;

fn check_distribution(what: &str, row: &[f64], k: usize, tol: f64) -> Result<()> {
    if row.len() != k {
        return Err(Error::InvalidParameter(format!("{what} has {} entries, expected {k}", row.len())));
    }
    if row.iter().any(|&x| x.is_nan() || x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidParameter(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

fn check_unit(what: &str, x: f64, open: bool) -> Result<()> {
    let ok = if open { x > 0.0 && x < 1.0 } else { (0.0..=1.0).contains(&x) };
    if ok {
        Ok(())
    } else {
        let range = if open { "(0, 1)" } else { "[0, 1]" };
        Err(Error::InvalidParameter(format!("{what} must lie in {range}, got {x}")))
    }
}

fn normalized(mut row: Vec<f64>) -> Vec<f64> {
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= sum);
    row
}

impl SynthConfig {
    /// Normalized topic popularity.
    pub fn popularity(&self) -> Vec<f64> {
        normalized((0..self.topic_count).map(|t| ((t + 1) as f64).powf(-self.topic_zipf)).collect())
    }

    /// Jump distribution of a mixture chain.
    fn jump_weights(&self, focus: &[usize], boost: f64) -> Vec<f64> {
        let mut w = self.popularity();
        for &t in focus {
            w[t] *= boost;
        }
        normalized(w)
    }

    pub fn entry(&self, chain: &TopicChain) -> Vec<f64> {
        match chain {
            TopicChain::Explicit { entry, .. } => entry.clone(),
            TopicChain::Mixture { focus, boost, .. } => self.jump_weights(focus, *boost),
        }
    }

    pub fn matrix(&self, chain: &TopicChain) -> Vec<Vec<f64>> {
        match chain {
            TopicChain::Explicit { matrix, .. } => matrix.clone(),
            TopicChain::Mixture { focus, boost, stay } => {
                let w = self.jump_weights(focus, *boost);
                (0..self.topic_count)
                    .map(|r| {
                        let mut row: Vec<f64> = w.iter().map(|x| x * (1.0 - stay)).collect();
                        row[r] += stay;
                        normalized(row)
                    })
                    .collect()
            }
        }
    }

    fn background_chain(&self) -> Option<TopicChain> {
        self.background.as_ref().map(|b| TopicChain::Mixture { focus: Vec::new(), boost: 1.0, stay: b.stay })
    }

    fn check_chain(&self, name: &str, chain: &TopicChain) -> Result<()> {
        let k = self.topic_count;
        match chain {
            TopicChain::Explicit { entry, matrix } => {
                check_distribution(&format!("profile {name} entry"), entry, k, 1e-9)?;
                if matrix.len() != k {
                    return Err(Error::InvalidParameter(format!("profile {name}: matrix needs {k} rows")));
                }
                for (r, row) in matrix.iter().enumerate() {
                    check_distribution(&format!("profile {name} matrix row {r}"), row, k, ROW_TOLERANCE)?;
                }
            }
            TopicChain::Mixture { focus, boost, stay } => {
                if let Some(t) = focus.iter().find(|&&t| t >= k) {
                    return Err(Error::InvalidParameter(format!("profile {name}: focus topic {t} out of range")));
                }
                if !(*boost > 0.0 && boost.is_finite()) {
                    return Err(Error::InvalidParameter(format!("profile {name}: boost must be positive")));
                }
                check_unit(&format!("profile {name} stay"), *stay, false)?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.topic_count == 0 || self.pages_per_topic == 0 {
            return Err(Error::InvalidParameter("need at least one topic and one page per topic".into()));
        }
        if !self.topic_zipf.is_finite() || self.topic_zipf < 0.0 {
            return Err(Error::InvalidParameter("topic_zipf must be finite and non-negative".into()));
        }
        if self.profiles.is_empty() {
            return Err(Error::InvalidParameter("need at least one referrer profile".into()));
        }
        if self.max_session_length == 0 || self.max_sessions_per_user == 0 {
            return Err(Error::InvalidParameter("session and user limits must be positive".into()));
        }
        check_unit("quick_return", self.quick_return, false)?;
        check_unit("bot_fraction", self.bot_fraction, false)?;
        if let Some(b) = &self.background {
            check_unit("background p", b.p, true)?;
            check_unit("background stay", b.stay, false)?;
        }
        let mut matrices: Vec<Vec<Vec<f64>>> = Vec::with_capacity(self.profiles.len());
        for (i, p) in self.profiles.iter().enumerate() {
            if p.name == BACKGROUND_NAME || self.profiles[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::InvalidParameter(format!("duplicate or reserved profile name {:?}", p.name)));
            }
            check_unit(&format!("profile {} p", p.name), p.p, true)?;
            self.check_chain(&p.name, &p.chain)?;
            let m = self.matrix(&p.chain);
            if let Some(j) = matrices.iter().position(|q| *q == m) {
                return Err(Error::InvalidParameter(format!(
                    "profiles {} and {} share a transition matrix",
                    self.profiles[j].name, p.name
                )));
            }
            matrices.push(m);
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SynthConfig =
            toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("synth config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidParameter(format!("synth config: {e}")))
    }

    pub fn page_url(&self, topic: usize, page: usize) -> String {
        format!("https://{}/t{topic}/{page}", self.portal_domain)
    }

    /// Whether sessions of `profile` start from outside the portal.
    pub fn is_external(&self, profile: &ReferrerProfile) -> bool {
        let d = registered_domain(&profile.referrer);
        !d.is_empty() && d != registered_domain(&format!("https://{}/", self.portal_domain))
    }

    /// Session selector string that picks out `profile`'s sessions.
    pub fn selector_for(&self, profile: &ReferrerProfile) -> String {
        if profile.referrer.is_empty() {
            "direct".to_owned()
        } else if self.is_external(profile) {
            registered_domain(&profile.referrer)
        } else {
            format!("url:{}", profile.referrer)
        }
    }

    /// Same config with every volume, background included, multiplied by
    /// `factor` and rounded (at least one session per profile).
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |v: usize| ((v as f64 * factor).round() as usize).max(1);
        let mut cfg = self.clone();
        cfg.profiles.iter_mut().for_each(|p| p.volume = scale(p.volume));
        if let Some(b) = &mut cfg.background {
            b.volume = scale(b.volume);
        }
        cfg
    }
}

const DEFAULT_TOPIC_COUNT: usize = 500;
const DEFAULT_FOCUS_SIZE: usize = 6;

/// Name, referrer and session volume of the shipped profiles.
const DEFAULT_PROFILES: [(&str, &str, usize); 7] = [
    ("google", "https://www.google.com/search?q=news", 3000),
    ("yahoo", "https://search.yahoo.com/search?p=news", 2000),
    ("bing", "https://www.bing.com/search?q=news", 1400),
    ("homepage", "https://newsportal.example/", 1000),
    ("facebook", "https://www.facebook.com/", 700),
    ("twitter", "https://t.co/x1y2z3", 500),
    ("reddit", "https://www.reddit.com/r/news/", 350),
];

impl Default for SynthConfig {
    /// Seven referrer profiles, search engines largest and social sites
    /// smallest, over a large portal that mostly receives direct traffic.
    /// Profiles share the topic popularity and differ in a few boosted
    /// focus topics and in volume.
    fn default() -> Self {
        let k = DEFAULT_TOPIC_COUNT;
        let profiles = DEFAULT_PROFILES
            .iter()
            .enumerate()
            .map(|(i, &(name, referrer, volume))| ReferrerProfile {
                name: name.to_owned(),
                referrer: referrer.to_owned(),
                p: 0.15,
                volume,
                chain: TopicChain::Mixture {
                    focus: (0..DEFAULT_FOCUS_SIZE).map(|j| (i * 7 + j * 13 + j * j) % k).collect(),
                    boost: 4.0,
                    stay: 0.5,
                },
            })
            .collect();
        Self {
            portal_domain: "newsportal.example".to_owned(),
            topic_count: k,
            topic_zipf: 1.0,
            pages_per_topic: 80,
            max_session_length: 60,
            max_sessions_per_user: 4,
            quick_return: 0.5,
            bot_fraction: 0.0,
            start_timestamp: 1_700_000_000,
            background: Some(Background { p: 0.3, volume: 250_000, stay: 0.5 }),
            profiles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthSession {
    pub bcookie: String,
    pub profile: String,
    /// Timestamp of the first pageview.
    pub start: u64,
    pub pageviews: usize,
    pub crawler: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub records: Vec<PageviewRecord>,
    pub truth: Vec<TruthSession>,
}

impl Corpus {
    pub fn write_log<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            writeln!(out, "{}", r.to_line())?;
        }
        Ok(())
    }

    pub fn write_truth<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.truth {
            serde_json::to_writer(&mut out, t)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

fn session_length<R: Rng>(p: f64, cap: usize, rng: &mut R) -> usize {
    let mut len = 1;
    while len < cap && !rng.gen_bool(p) {
        len += 1;
    }
    len
}

enum ChainSampler {
    Explicit { entry: WeightedIndex<f64>, rows: Vec<WeightedIndex<f64>> },
    Mixture { jump: WeightedIndex<f64>, stay: f64 },
}

impl ChainSampler {
    fn new(cfg: &SynthConfig, chain: &TopicChain) -> Result<Self> {
        let weighted =
            |w: &[f64]| WeightedIndex::new(w).map_err(|e| Error::InvalidParameter(format!("topic distribution: {e}")));
        Ok(match chain {
            TopicChain::Explicit { entry, matrix } => Self::Explicit {
                entry: weighted(entry)?,
                rows: matrix.iter().map(|r| weighted(r)).collect::<Result<_>>()?,
            },
            TopicChain::Mixture { stay, .. } => Self::Mixture { jump: weighted(&cfg.entry(chain))?, stay: *stay },
        })
    }

    fn first<R: Rng>(&self, rng: &mut R) -> usize {
        match self {
            Self::Explicit { entry, .. } => entry.sample(rng),
            Self::Mixture { jump, .. } => jump.sample(rng),
        }
    }

    fn next<R: Rng>(&self, topic: usize, rng: &mut R) -> usize {
        match self {
            Self::Explicit { rows, .. } => rows[topic].sample(rng),
            Self::Mixture { jump, stay } => {
                if rng.gen_bool(*stay) {
                    topic
                } else {
                    jump.sample(rng)
                }
            }
        }
    }
}

/// A session source: one of the profiles or the background.
struct Source<'a> {
    name: &'a str,
    referrer: &'a str,
    external: bool,
    p: f64,
    volume: usize,
    sampler: ChainSampler,
}

fn sources(cfg: &SynthConfig) -> Result<Vec<Source<'_>>> {
    let mut out = Vec::with_capacity(cfg.profiles.len() + 1);
    for p in &cfg.profiles {
        out.push(Source {
            name: &p.name,
            referrer: &p.referrer,
            external: cfg.is_external(p),
            p: p.p,
            volume: p.volume,
            sampler: ChainSampler::new(cfg, &p.chain)?,
        });
    }
    if let (Some(b), Some(chain)) = (&cfg.background, cfg.background_chain()) {
        out.push(Source {
            name: BACKGROUND_NAME,
            referrer: "",
            external: false,
            p: b.p,
            volume: b.volume,
            sampler: ChainSampler::new(cfg, &chain)?,
        });
    }
    Ok(out)
}

fn generate_user(
    cfg: &SynthConfig,
    sources: &[Source<'_>],
    user: usize,
    sessions: &[usize],
    seed: u64,
) -> (Vec<PageviewRecord>, Vec<TruthSession>) {
    let mut rng = seeds::rng(seed, &[1, user as u64]);
    let bcookie = format!("u{user:06}");
    let crawler = rng.gen_bool(cfg.bot_fraction);
    let agent = if crawler { CRAWLER_AGENT } else { BROWSER_AGENT };
    let mut t = cfg.start_timestamp + rng.gen_range(0..86_400);
    let mut records = Vec::new();
    let mut truth = Vec::new();
    for (i, &si) in sessions.iter().enumerate() {
        let source = &sources[si];
        if i > 0 {
            let quick = source.external && rng.gen_bool(cfg.quick_return);
            let (lo, hi) = if quick { PAGEVIEW_GAP } else { SESSION_GAP };
            t += rng.gen_range(lo..=hi);
        }
        let len = session_length(source.p, cfg.max_session_length, &mut rng);
        truth.push(TruthSession {
            bcookie: bcookie.clone(),
            profile: source.name.to_owned(),
            start: t,
            pageviews: len,
            crawler,
        });
        let mut topic = source.sampler.first(&mut rng);
        let mut referrer = source.referrer.to_owned();
        for step in 0..len {
            if step > 0 {
                t += rng.gen_range(PAGEVIEW_GAP.0..=PAGEVIEW_GAP.1);
                topic = source.sampler.next(topic, &mut rng);
            }
            let url = cfg.page_url(topic, rng.gen_range(0..cfg.pages_per_topic));
            records.push(PageviewRecord {
                bcookie: bcookie.clone(),
                timestamp: t,
                referrer_url: std::mem::replace(&mut referrer, url.clone()),
                url,
                user_agent: agent.to_owned(),
            });
        }
    }
    (records, truth)
}

/// Generates `volume` sessions per profile (and background), shuffles them,
/// deals them to users of 1 to `max_sessions_per_user` sessions and renders
/// each user from its own random stream.
pub fn generate_corpus(cfg: &SynthConfig, seed: u64) -> Result<Corpus> {
    cfg.validate()?;
    let sources = sources(cfg)?;
    let mut deal = seeds::rng(seed, &[0]);
    let mut order: Vec<usize> =
        sources.iter().enumerate().flat_map(|(i, s)| std::iter::repeat_n(i, s.volume)).collect();
    order.shuffle(&mut deal);
    let mut users: Vec<&[usize]> = Vec::new();
    let mut rest = order.as_slice();
    while !rest.is_empty() {
        let take = deal.gen_range(1..=cfg.max_sessions_per_user).min(rest.len());
        let (head, tail) = rest.split_at(take);
        users.push(head);
        rest = tail;
    }
    let parts: Vec<_> =
        users.par_iter().enumerate().map(|(u, sessions)| generate_user(cfg, &sources, u, sessions, seed)).collect();
    let mut corpus = Corpus { records: Vec::new(), truth: Vec::new() };
    for (r, t) in parts {
        corpus.records.extend(r);
        corpus.truth.extend(t);
    }
    Ok(corpus)
}
