//! Retweet graphs, daily PageRank and the averaged influence score.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Corpus, TweetRecord};
use crate::interest::InterestVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfluenceError {
    #[error("retweet graph has no users")]
    EmptyGraph,
    #[error("pagerank did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("initial vector has {got} entries, graph has {expected} users")]
    InitialLength { expected: usize, got: usize },
    #[error("unknown pagerank mode {0:?}")]
    UnknownMode(String),
}

/// Directed retweet counts: an edge `(from, to)` means `from` retweeted `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetweetGraph {
    label: String,
    users: Vec<String>,
    index: HashMap<String, usize>,
    /// Out-edges per user, sorted by target index.
    out: Vec<Vec<(usize, u64)>>,
}

impl RetweetGraph {
    /// Counts every retweet among `records`. Originals contribute nothing.
    pub fn from_records<'r>(records: impl IntoIterator<Item = &'r TweetRecord>, label: impl Into<String>) -> Self {
        let mut counts: BTreeMap<(&str, &str), u64> = BTreeMap::new();
        for r in records {
            if let Some(target) = r.retweet_of_user_id.as_deref() {
                if target != r.user_id {
                    *counts.entry((r.user_id.as_str(), target)).or_default() += 1;
                }
            }
        }
        Self::from_counts(counts.into_iter().map(|((a, b), c)| (a, b, c)), label)
    }

    /// Builds a graph from `(retweeter, retweeted, count)` triples. Repeated
    /// pairs are summed; self-edges and zero counts are ignored.
    pub fn from_counts<'s>(
        triples: impl IntoIterator<Item = (&'s str, &'s str, u64)>,
        label: impl Into<String>,
    ) -> Self {
        let mut counts: BTreeMap<(&str, &str), u64> = BTreeMap::new();
        for (a, b, c) in triples {
            if a != b && c > 0 {
                *counts.entry((a, b)).or_default() += c;
            }
        }
        let mut users: Vec<String> = counts.keys().flat_map(|&(a, b)| [a, b]).map(str::to_owned).collect();
        users.sort();
        users.dedup();
        let index: HashMap<String, usize> = users.iter().cloned().enumerate().map(|(i, u)| (u, i)).collect();
        let mut out = vec![Vec::new(); users.len()];
        for ((a, b), c) in counts {
            out[index[a]].push((index[b], c));
        }
        for edges in &mut out {
            edges.sort_unstable();
        }
        Self { label: label.into(), users, index, out }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Users in lexicographic order.
    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn contains(&self, user: &str) -> bool {
        self.index.contains_key(user)
    }

    pub fn retweets(&self, from: &str, to: &str) -> u64 {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.out[a]
                .binary_search_by_key(&b, |&(t, _)| t)
                .map_or(0, |k| self.out[a][k].1),
            _ => 0,
        }
    }

    /// `(retweeter, retweeted, count)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.out.iter().enumerate().flat_map(move |(a, edges)| {
            edges.iter().map(move |&(b, c)| (self.users[a].as_str(), self.users[b].as_str(), c))
        })
    }

    /// Who retweeted `user`, with counts.
    pub fn retweeters_of(&self, user: &str) -> BTreeMap<&str, u64> {
        let Some(&target) = self.index.get(user) else {
            return BTreeMap::new();
        };
        self.out
            .iter()
            .enumerate()
            .filter_map(|(a, edges)| {
                edges
                    .binary_search_by_key(&target, |&(t, _)| t)
                    .ok()
                    .map(|k| (self.users[a].as_str(), edges[k].1))
            })
            .collect()
    }
}

/// Retweet graph over the whole corpus period.
pub fn build_retweet_graph(corpus: &Corpus) -> RetweetGraph {
    RetweetGraph::from_records(corpus.records(), corpus.period().label())
}

/// One retweet graph per day that has at least one retweet.
pub fn daily_retweet_graphs(corpus: &Corpus) -> BTreeMap<NaiveDate, RetweetGraph> {
    let mut by_day: BTreeMap<NaiveDate, Vec<&TweetRecord>> = BTreeMap::new();
    for r in corpus.records().iter().filter(|r| r.is_retweet()) {
        by_day.entry(r.day()).or_default().push(r);
    }
    by_day
        .into_par_iter()
        .map(|(day, records)| (day, RetweetGraph::from_records(records, day.to_string())))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PageRankMode {
    /// Each retweeter spreads its score over the users it retweeted in
    /// proportion to the retweet counts; users who retweet nobody spread
    /// uniformly. Scores form a probability distribution.
    #[default]
    Stochastic,
    /// `PR(u) = (1-β)/n + β Σ PR(v)/RT(v,u)` over retweeters `v` of `u`,
    /// taken literally. Scores need not sum to one and the iteration only
    /// converges when the update is a contraction.
    PaperVerbatim,
}

impl fmt::Display for PageRankMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PageRankMode::Stochastic => "stochastic",
            PageRankMode::PaperVerbatim => "paper-verbatim",
        })
    }
}

impl FromStr for PageRankMode {
    type Err = InfluenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stochastic" => Ok(Self::Stochastic),
            "paper-verbatim" | "paper_verbatim" | "verbatim" => Ok(Self::PaperVerbatim),
            other => Err(InfluenceError::UnknownMode(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub beta: f64,
    pub mode: PageRankMode,
    /// Stop once the largest per-user change drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self { beta: 0.85, mode: PageRankMode::Stochastic, tol: 1e-10, max_iter: 200 }
    }
}

/// Power iteration from `init` (indexed like [`RetweetGraph::users`]).
pub fn pagerank_from(graph: &RetweetGraph, cfg: &PageRankConfig, init: &[f64]) -> Result<Vec<f64>, InfluenceError> {
    let n = graph.len();
    if n == 0 {
        return Err(InfluenceError::EmptyGraph);
    }
    if init.len() != n {
        return Err(InfluenceError::InitialLength { expected: n, got: init.len() });
    }
    let base = (1.0 - cfg.beta) / n as f64;
    let out_strength: Vec<f64> = graph.out.iter().map(|e| e.iter().map(|&(_, c)| c as f64).sum()).collect();
    let mut pr = init.to_vec();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        match cfg.mode {
            PageRankMode::Stochastic => {
                let dangling: f64 = (0..n).filter(|&u| graph.out[u].is_empty()).map(|u| pr[u]).sum();
                next.fill(base + cfg.beta * dangling / n as f64);
                for (u, edges) in graph.out.iter().enumerate() {
                    for &(v, c) in edges {
                        next[v] += cfg.beta * pr[u] * c as f64 / out_strength[u];
                    }
                }
            }
            PageRankMode::PaperVerbatim => {
                next.fill(base);
                for (u, edges) in graph.out.iter().enumerate() {
                    for &(v, c) in edges {
                        next[v] += cfg.beta * pr[u] / c as f64;
                    }
                }
            }
        }
        residual = pr.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut pr, &mut next);
        if residual < cfg.tol {
            return Ok(pr);
        }
        if !residual.is_finite() {
            break;
        }
    }
    Err(InfluenceError::NonConvergence { iterations: cfg.max_iter, residual })
}

/// PageRank of every user in a (daily) retweet graph, from the uniform start.
pub fn pagerank_day(graph: &RetweetGraph, cfg: &PageRankConfig) -> Result<BTreeMap<String, f64>, InfluenceError> {
    let n = graph.len();
    if n == 0 {
        return Err(InfluenceError::EmptyGraph);
    }
    let pr = pagerank_from(graph, cfg, &vec![1.0 / n as f64; n])?;
    Ok(graph.users.iter().cloned().zip(pr).collect())
}

/// Divides by the maximum so the top user scores exactly 1.
pub fn normalize_daily(pr: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let max = pr.values().copied().fold(f64::NEG_INFINITY, f64::max);
    pr.iter().map(|(u, &p)| (u.clone(), if max > 0.0 { p / max } else { 0.0 })).collect()
}

/// Mean of the daily normalized scores over `num_days` days; days without a
/// score contribute 0.
pub fn influence_score(
    daily_npr: &BTreeMap<NaiveDate, BTreeMap<String, f64>>,
    num_days: usize,
) -> BTreeMap<String, f64> {
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    for day in daily_npr.values() {
        for (u, &v) in day {
            *sums.entry(u.clone()).or_default() += v;
        }
    }
    let n = num_days.max(1) as f64;
    sums.into_iter().map(|(u, s)| (u, s / n)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceTable {
    pub daily_npr: BTreeMap<NaiveDate, BTreeMap<String, f64>>,
    pub influence: BTreeMap<String, f64>,
    pub num_days: usize,
    pub mode: PageRankMode,
    /// Days dropped because PageRank failed to converge, with the residual.
    pub skipped_days: Vec<(NaiveDate, f64)>,
}

impl InfluenceTable {
    pub fn get(&self, user: &str) -> f64 {
        self.influence.get(user).copied().unwrap_or(0.0)
    }

    /// Number of days on which the user had a score.
    pub fn days_active(&self, user: &str) -> usize {
        self.daily_npr.values().filter(|d| d.contains_key(user)).count()
    }
}

/// Daily PageRank over the corpus period, normalized per day and averaged
/// over every calendar day of the period.
pub fn compute_influence(corpus: &Corpus, cfg: &PageRankConfig) -> InfluenceTable {
    let graphs = daily_retweet_graphs(corpus);
    let results: Vec<(NaiveDate, Result<BTreeMap<String, f64>, InfluenceError>)> = graphs
        .par_iter()
        .map(|(&day, g)| (day, pagerank_day(g, cfg).map(|pr| normalize_daily(&pr))))
        .collect();
    let mut daily_npr = BTreeMap::new();
    let mut skipped_days = Vec::new();
    for (day, res) in results {
        match res {
            Ok(npr) => {
                daily_npr.insert(day, npr);
            }
            Err(InfluenceError::NonConvergence { residual, .. }) => {
                log::warn!("{day}: pagerank did not converge (residual {residual:e}); day skipped");
                skipped_days.push((day, residual));
            }
            Err(e) => unreachable!("daily graphs are nonempty: {e}"),
        }
    }
    let num_days = corpus.period().num_days();
    let influence = influence_score(&daily_npr, num_days);
    InfluenceTable { daily_npr, influence, num_days, mode: cfg.mode, skipped_days }
}

/// Highest scores first; equal scores ordered by user id.
pub fn top_influentials(inf: &BTreeMap<String, f64>, k: usize) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = inf.iter().map(|(u, &s)| (u.clone(), s)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FocusFilter {
    /// Keep users whose largest single-topic interest exceeds the threshold.
    #[default]
    KeepFocused,
    /// Keep the others instead.
    DropFocused,
}

/// Filters a ranking by topical focus. Users without an interest vector
/// count as unfocused.
pub fn representative_influentials(
    ranked: &[(String, f64)],
    vectors: &BTreeMap<String, InterestVector>,
    threshold: f64,
    filter: FocusFilter,
) -> Vec<(String, f64)> {
    ranked
        .iter()
        .filter(|(u, _)| {
            let focused = vectors.get(u).is_some_and(|v| v.max_interest() > threshold);
            match filter {
                FocusFilter::KeepFocused => focused,
                FocusFilter::DropFocused => !focused,
            }
        })
        .cloned()
        .collect()
}
