//! Pageview logs, sessions and referrer subgraphs.
//!
//! A log line carries five tab-separated fields:
//! `bcookie, timestamp, referrer_url, url, user_agent`. Crawlers are removed
//! by a browser-token allowlist on the user agent. Each user's pageviews are
//! split into sessions when the gap since the previous pageview exceeds the
//! timeout, or when the pageview arrives from an external domain. A referrer
//! subgraph is built from the page-to-page transitions of the sessions whose
//! first referrer matches a selector.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{BrowseGraph, GraphBuilder};

pub const DEFAULT_TIMEOUT_MINUTES: f64 = 25.0;

pub const DEFAULT_BROWSER_TOKENS: [&str; 6] = ["mozilla", "chrome", "safari", "opera", "msie", "edge"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageviewRecord {
    pub bcookie: String,
    /// Seconds since the epoch.
    pub timestamp: u64,
    pub referrer_url: String,
    pub url: String,
    pub user_agent: String,
}

impl PageviewRecord {
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{}\t{}\t{}", self.bcookie, self.timestamp, self.referrer_url, self.url, self.user_agent)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedLog {
    pub records: Vec<PageviewRecord>,
    pub malformed: usize,
    pub lines: usize,
}

fn parse_line(line: &str) -> Option<PageviewRecord> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return None;
    }
    let timestamp = fields[1].trim().parse::<u64>().ok()?;
    if fields[0].is_empty() || fields[3].is_empty() {
        return None;
    }
    Some(PageviewRecord {
        bcookie: fields[0].to_owned(),
        timestamp,
        referrer_url: fields[2].to_owned(),
        url: fields[3].to_owned(),
        user_agent: fields[4].to_owned(),
    })
}

/// Parses a log stream. Lines without exactly five fields, with a bad
/// timestamp, or with an empty cookie or URL are counted and skipped.
pub fn parse_log<R: BufRead>(input: R) -> Result<ParsedLog> {
    let mut out = ParsedLog::default();
    for line in input.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        out.lines += 1;
        match parse_line(line) {
            Some(r) => out.records.push(r),
            None => out.malformed += 1,
        }
    }
    Ok(out)
}

/// Keeps records whose user agent contains one of `allowlist`, ignoring case.
pub fn filter_crawlers<S: AsRef<str>>(records: Vec<PageviewRecord>, allowlist: &[S]) -> Vec<PageviewRecord> {
    let tokens: Vec<String> = allowlist.iter().map(|t| t.as_ref().to_lowercase()).collect();
    records
        .into_iter()
        .filter(|r| {
            let ua = r.user_agent.to_lowercase();
            tokens.iter().any(|t| ua.contains(t.as_str()))
        })
        .collect()
}

const MULTI_LABEL_SUFFIXES: [&str; 10] =
    ["co.uk", "org.uk", "ac.uk", "gov.uk", "com.au", "net.au", "co.jp", "co.nz", "com.br", "co.in"];

/// Host of a URL, lowercased, without scheme, credentials, port or `www.`.
pub fn host_of(url: &str) -> String {
    let rest = match url.find("://") {
        Some(i) => &url[i + 3..],
        None => url.trim_start_matches("//"),
    };
    let end = rest.find(['/', '?', '#']).unwrap_or(rest.len());
    let mut host = &rest[..end];
    if let Some(i) = host.rfind('@') {
        host = &host[i + 1..];
    }
    if let Some(i) = host.rfind(':') {
        if host[i + 1..].chars().all(|c| c.is_ascii_digit()) {
            host = &host[..i];
        }
    }
    let host = host.trim_end_matches('.').to_lowercase();
    host.strip_prefix("www.").map(str::to_owned).unwrap_or(host)
}

/// Registered domain: the public suffix plus one label
/// (`news.google.co.uk` → `google.co.uk`, `t.co` → `t.co`).
/// Empty for an empty URL.
pub fn registered_domain(url: &str) -> String {
    let host = host_of(url);
    if host.is_empty() {
        return host;
    }
    let labels: Vec<&str> = host.split('.').collect();
    let keep = if labels.len() >= 3 && MULTI_LABEL_SUFFIXES.contains(&labels[labels.len() - 2..].join(".").as_str()) {
        3
    } else {
        2
    };
    labels[labels.len().saturating_sub(keep)..].join(".")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub bcookie: String,
    pub pageviews: Vec<PageviewRecord>,
    pub initial_referrer_domain: String,
}

impl Session {
    pub fn initial_referrer_url(&self) -> &str {
        self.pageviews.first().map_or("", |p| p.referrer_url.as_str())
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.pageviews.windows(2).map(|w| (w[0].url.as_str(), w[1].url.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub timeout_minutes: f64,
    /// Registered domains that belong to the site itself.
    pub internal_domains: BTreeSet<String>,
}

impl SessionConfig {
    pub fn new<S: Into<String>>(internal_domains: impl IntoIterator<Item = S>) -> Self {
        Self {
            timeout_minutes: DEFAULT_TIMEOUT_MINUTES,
            internal_domains: internal_domains.into_iter().map(Into::into).collect(),
        }
    }

    fn is_external(&self, referrer_url: &str) -> bool {
        let d = registered_domain(referrer_url);
        !d.is_empty() && !self.internal_domains.contains(&d)
    }
}

fn split_user(records: Vec<&PageviewRecord>, cfg: &SessionConfig) -> Vec<Session> {
    let timeout = cfg.timeout_minutes * 60.0;
    let mut sessions: Vec<Session> = Vec::new();
    let mut last_ts: Option<u64> = None;
    for r in records {
        let starts_new = match last_ts {
            None => true,
            Some(prev) => (r.timestamp - prev) as f64 > timeout || cfg.is_external(&r.referrer_url),
        };
        if starts_new {
            sessions.push(Session {
                bcookie: r.bcookie.clone(),
                pageviews: Vec::new(),
                initial_referrer_domain: registered_domain(&r.referrer_url),
            });
        }
        sessions.last_mut().expect("session started").pageviews.push(r.clone());
        last_ts = Some(r.timestamp);
    }
    sessions
}

/// Splits pageviews into sessions. Users appear in first-seen order; each
/// user's pageviews are time-sorted, ties kept in input order.
pub fn sessionize(records: &[PageviewRecord], cfg: &SessionConfig) -> Vec<Session> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_user: HashMap<&str, Vec<&PageviewRecord>> = HashMap::new();
    for r in records {
        by_user
            .entry(r.bcookie.as_str())
            .or_insert_with(|| {
                order.push(r.bcookie.as_str());
                Vec::new()
            })
            .push(r);
    }
    let groups: Vec<Vec<&PageviewRecord>> = order
        .into_iter()
        .map(|c| {
            let mut v = by_user.remove(c).unwrap_or_default();
            v.sort_by_key(|r| r.timestamp);
            v
        })
        .collect();
    groups.into_par_iter().map(|g| split_user(g, cfg)).collect::<Vec<_>>().into_iter().flatten().collect()
}

/// Which sessions make up a referrer subgraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionSelector {
    /// First referrer's registered domain equals this.
    Domain(String),
    /// First referrer URL equals this exactly.
    ReferrerUrl(String),
    /// First pageview has an empty referrer.
    Direct,
}

impl SessionSelector {
    pub fn matches(&self, s: &Session) -> bool {
        match self {
            SessionSelector::Domain(d) => !d.is_empty() && s.initial_referrer_domain == *d,
            SessionSelector::ReferrerUrl(u) => s.initial_referrer_url() == u,
            SessionSelector::Direct => s.initial_referrer_url().is_empty(),
        }
    }
}

impl std::str::FromStr for SessionSelector {
    type Err = std::convert::Infallible;

    /// `direct`, `url:<referrer url>`, or a domain.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s == "direct" {
            SessionSelector::Direct
        } else if let Some(u) = s.strip_prefix("url:") {
            SessionSelector::ReferrerUrl(u.to_owned())
        } else {
            SessionSelector::Domain(registered_domain(s))
        })
    }
}

impl std::fmt::Display for SessionSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SessionSelector::Domain(d) => write!(f, "{d}"),
            SessionSelector::ReferrerUrl(u) => write!(f, "url:{u}"),
            SessionSelector::Direct => write!(f, "direct"),
        }
    }
}

/// Transition graph of all given sessions.
pub fn sessions_graph<'a>(sessions: impl IntoIterator<Item = &'a Session>) -> BrowseGraph {
    let mut b = GraphBuilder::new();
    for s in sessions {
        for p in &s.pageviews {
            b.add_node(&p.url);
        }
        for (from, to) in s.transitions() {
            b.add_transition(from, to, 1);
        }
    }
    b.build()
}

pub fn extract_subgraph(sessions: &[Session], selector: &SessionSelector) -> BrowseGraph {
    sessions_graph(sessions.iter().filter(|s| selector.matches(s)))
}

/// Graph of the sessions whose first referrer belongs to `domain`.
pub fn extract_referrer_subgraph(sessions: &[Session], domain: &str) -> BrowseGraph {
    extract_subgraph(sessions, &SessionSelector::Domain(registered_domain(domain)))
}

pub fn write_sessions<W: Write>(sessions: &[Session], mut out: W) -> Result<()> {
    for s in sessions {
        serde_json::to_writer(&mut out, s)?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_sessions<R: BufRead>(input: R) -> Result<Vec<Session>> {
    let mut v = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            v.push(serde_json::from_str(&line)?);
        }
    }
    Ok(v)
}
