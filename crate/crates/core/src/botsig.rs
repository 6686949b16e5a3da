//! Bot-activity signals around influential users: unique retweet ratio,
//! transfer entropy from an influencer to each retweeter, retweeter volume,
//! retweeter-set overlap and scatter-plot data.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::influence::RetweetGraph;
use crate::ingest::{Corpus, Period};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BotSigError {
    #[error("user {0} was never retweeted")]
    NeverRetweeted(String),
    #[error("series of length {len} too short for lags k={k}, l={l}")]
    SeriesTooShort { len: usize, k: usize, l: usize },
    #[error("source and target series differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("lags must satisfy 1 <= k, l and k + l <= 24 (got k={k}, l={l})")]
    InvalidLag { k: usize, l: usize },
    #[error("retweet jaccard needs at least one other influential user")]
    NoPeers,
}

/// Distinct retweeters of `user` divided by the retweets they posted.
pub fn unique_retweet_ratio(graph: &RetweetGraph, user: &str) -> Result<f64, BotSigError> {
    let retweeters = graph.retweeters_of(user);
    let total: u64 = retweeters.values().sum();
    if total == 0 {
        return Err(BotSigError::NeverRetweeted(user.to_owned()));
    }
    Ok(retweeters.len() as f64 / total as f64)
}

/// Mean of the per-day ratios over the days on which `user` was retweeted.
pub fn unique_retweet_ratio_daily_mean(
    daily: &BTreeMap<NaiveDate, RetweetGraph>,
    user: &str,
) -> Result<f64, BotSigError> {
    let ratios: Vec<f64> = daily.values().filter_map(|g| unique_retweet_ratio(g, user).ok()).collect();
    if ratios.is_empty() {
        return Err(BotSigError::NeverRetweeted(user.to_owned()));
    }
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UrMode {
    #[default]
    WholePeriod,
    DailyMean,
}

/// Binary occupancy of equal-width time bins over a period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySeries {
    pub user_id: String,
    pub start: i64,
    pub bin_width: i64,
    pub bins: Vec<bool>,
}

impl ActivitySeries {
    /// Bins `[start, end)` into `ceil((end - start) / bin_width)` bins and
    /// marks those containing at least one timestamp.
    pub fn from_timestamps(
        user: &str,
        timestamps: impl IntoIterator<Item = i64>,
        start: i64,
        end: i64,
        bin_width: i64,
    ) -> Self {
        assert!(bin_width > 0, "bin width must be positive");
        let span = (end - start).max(0);
        let len = ((span + bin_width - 1) / bin_width) as usize;
        let mut bins = vec![false; len];
        for ts in timestamps {
            if ts >= start && ts < end {
                bins[((ts - start) / bin_width) as usize] = true;
            }
        }
        Self { user_id: user.to_owned(), start, bin_width, bins }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bins.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMode {
    AllTweets,
    RetweetsOf(String),
}

pub const HOUR: i64 = 3_600;

pub fn activity_series(user: &str, corpus: &Corpus, bin_width: i64, mode: &SeriesMode) -> ActivitySeries {
    let period = corpus.period();
    let stamps = corpus.records().iter().filter(|r| r.user_id == user).filter(|r| match mode {
        SeriesMode::AllTweets => true,
        SeriesMode::RetweetsOf(target) => r.retweet_of_user_id.as_deref() == Some(target.as_str()),
    });
    ActivitySeries::from_timestamps(
        user,
        stamps.map(|r| r.timestamp),
        period.start_timestamp(),
        period.end_timestamp(),
        bin_width,
    )
}

/// Plug-in transfer entropy in nats from `source` to `target` with target
/// history `k` and source history `l`:
/// `H(y_t | y_{t-k..t-1}) - H(y_t | y_{t-k..t-1}, x_{t-l..t-1})`, estimated
/// from empirical frequencies over every `t >= max(k, l)`.
pub fn transfer_entropy(source: &[bool], target: &[bool], k: usize, l: usize) -> Result<f64, BotSigError> {
    if k == 0 || l == 0 || k + l > 24 {
        return Err(BotSigError::InvalidLag { k, l });
    }
    if source.len() != target.len() {
        return Err(BotSigError::LengthMismatch(source.len(), target.len()));
    }
    let n = target.len();
    let start = k.max(l);
    if n <= start {
        return Err(BotSigError::SeriesTooShort { len: n, k, l });
    }
    let hist = |s: &[bool], t: usize, len: usize| -> usize {
        s[t - len..t].iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    };
    // Joint counts indexed by (y, y_past, x_past). Ordered maps fix the
    // summation order below.
    let mut joint: BTreeMap<(bool, usize, usize), u64> = BTreeMap::new();
    for t in start..n {
        *joint.entry((target[t], hist(target, t, k), hist(source, t, l))).or_default() += 1;
    }
    let mut past: BTreeMap<usize, u64> = BTreeMap::new();
    let mut past_src: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut next_past: BTreeMap<(bool, usize), u64> = BTreeMap::new();
    for (&(y, yp, xp), &c) in &joint {
        *past.entry(yp).or_default() += c;
        *past_src.entry((yp, xp)).or_default() += c;
        *next_past.entry((y, yp)).or_default() += c;
    }
    let total = (n - start) as f64;
    let mut te = 0.0;
    for (&(y, yp, xp), &c) in &joint {
        let c = c as f64;
        let ratio = c * past[&yp] as f64 / (past_src[&(yp, xp)] as f64 * next_past[&(y, yp)] as f64);
        te += c / total * ratio.ln();
    }
    // Exact plug-in CMI is nonnegative; only rounding can push it below 0.
    Ok(te.max(0.0))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeDirection {
    /// Influencer activity as source, retweeter reaction as target.
    #[default]
    InfluencerToRetweeter,
    /// Retweeter as source, influencer as target.
    RetweeterToInfluencer,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetweeterSeries {
    /// Only the retweeter's retweets of the influencer.
    #[default]
    RetweetsOfInfluencer,
    /// Everything the retweeter posted.
    AllActivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectInfluenceOptions {
    pub bin_width: i64,
    pub k: usize,
    pub l: usize,
    pub min_retweets: u64,
    pub direction: TeDirection,
    pub retweeter_series: RetweeterSeries,
}

impl Default for DirectInfluenceOptions {
    fn default() -> Self {
        Self {
            bin_width: HOUR,
            k: 1,
            l: 1,
            min_retweets: 1,
            direction: TeDirection::default(),
            retweeter_series: RetweeterSeries::default(),
        }
    }
}

/// Per-user tweet times and per-(retweeter, retweeted) retweet times for one
/// corpus, so that many series can be cut without rescanning.
#[derive(Debug, Clone)]
pub struct TimeIndex {
    period: Period,
    tweets: HashMap<String, Vec<i64>>,
    retweets: HashMap<String, BTreeMap<String, Vec<i64>>>,
}

impl TimeIndex {
    pub fn new(corpus: &Corpus) -> Self {
        let mut tweets: HashMap<String, Vec<i64>> = HashMap::new();
        let mut retweets: HashMap<String, BTreeMap<String, Vec<i64>>> = HashMap::new();
        for r in corpus.records() {
            tweets.entry(r.user_id.clone()).or_default().push(r.timestamp);
            if let Some(target) = &r.retweet_of_user_id {
                retweets
                    .entry(target.clone())
                    .or_default()
                    .entry(r.user_id.clone())
                    .or_default()
                    .push(r.timestamp);
            }
        }
        Self { period: corpus.period().clone(), tweets, retweets }
    }

    pub fn period(&self) -> &Period {
        &self.period
    }

    /// Retweeters of `user` with their retweet counts.
    pub fn retweeters_of(&self, user: &str) -> BTreeMap<&str, u64> {
        self.retweets
            .get(user)
            .map(|m| m.iter().map(|(r, ts)| (r.as_str(), ts.len() as u64)).collect())
            .unwrap_or_default()
    }

    pub fn retweeter_set(&self, user: &str) -> BTreeSet<String> {
        self.retweets.get(user).map(|m| m.keys().cloned().collect()).unwrap_or_default()
    }

    fn series(&self, user: &str, stamps: Option<&Vec<i64>>, bin_width: i64) -> ActivitySeries {
        ActivitySeries::from_timestamps(
            user,
            stamps.into_iter().flatten().copied(),
            self.period.start_timestamp(),
            self.period.end_timestamp(),
            bin_width,
        )
    }

    pub fn activity_series(&self, user: &str, bin_width: i64, mode: &SeriesMode) -> ActivitySeries {
        let stamps = match mode {
            SeriesMode::AllTweets => self.tweets.get(user),
            SeriesMode::RetweetsOf(target) => self.retweets.get(target).and_then(|m| m.get(user)),
        };
        self.series(user, stamps, bin_width)
    }

    /// Transfer entropy between `influencer` and each retweeter with at
    /// least `min_retweets` retweets of them.
    pub fn direct_retweeter_influence(
        &self,
        influencer: &str,
        opts: &DirectInfluenceOptions,
    ) -> Result<BTreeMap<String, f64>, BotSigError> {
        let source = self.activity_series(influencer, opts.bin_width, &SeriesMode::AllTweets);
        let mut out = BTreeMap::new();
        for (retweeter, count) in self.retweeters_of(influencer) {
            if count < opts.min_retweets {
                continue;
            }
            let mode = match opts.retweeter_series {
                RetweeterSeries::RetweetsOfInfluencer => SeriesMode::RetweetsOf(influencer.to_owned()),
                RetweeterSeries::AllActivity => SeriesMode::AllTweets,
            };
            let reaction = self.activity_series(retweeter, opts.bin_width, &mode);
            let te = match opts.direction {
                TeDirection::InfluencerToRetweeter => transfer_entropy(&source.bins, &reaction.bins, opts.k, opts.l)?,
                TeDirection::RetweeterToInfluencer => transfer_entropy(&reaction.bins, &source.bins, opts.k, opts.l)?,
            };
            out.insert(retweeter.to_owned(), te);
        }
        Ok(out)
    }
}

pub fn direct_retweeter_influence(
    influencer: &str,
    corpus: &Corpus,
    opts: &DirectInfluenceOptions,
) -> Result<BTreeMap<String, f64>, BotSigError> {
    TimeIndex::new(corpus).direct_retweeter_influence(influencer, opts)
}

/// `|A ∩ B| / |A ∪ B|`, defined as 0 for two empty sets.
pub fn pairwise_jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Mean Jaccard overlap between `user`'s retweeters and those of each other
/// influential user. `user` itself is skipped if listed. Users missing from
/// `retweeter_sets` have no retweeters.
pub fn retweet_jaccard(
    user: &str,
    influentials: &[String],
    retweeter_sets: &BTreeMap<String, BTreeSet<String>>,
) -> Result<f64, BotSigError> {
    let empty = BTreeSet::new();
    let own = retweeter_sets.get(user).unwrap_or(&empty);
    let others: Vec<&String> = influentials.iter().filter(|u| u.as_str() != user).collect();
    if others.is_empty() {
        return Err(BotSigError::NoPeers);
    }
    let sum: f64 = others
        .iter()
        .map(|u| pairwise_jaccard(own, retweeter_sets.get(u.as_str()).unwrap_or(&empty)))
        .sum();
    Ok(sum / others.len() as f64)
}

/// Full pairwise matrix in the order of `users`. The diagonal is 1 for users
/// with at least one retweeter.
pub fn jaccard_matrix(users: &[String], retweeter_sets: &BTreeMap<String, BTreeSet<String>>) -> Vec<Vec<f64>> {
    let empty = BTreeSet::new();
    let sets: Vec<&BTreeSet<String>> = users.iter().map(|u| retweeter_sets.get(u).unwrap_or(&empty)).collect();
    sets.iter().map(|a| sets.iter().map(|b| pairwise_jaccard(a, b)).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BotSignalRow {
    pub influencer_id: String,
    pub retweeter_id: String,
    pub retweet_count: u64,
    pub transfer_entropy: f64,
    pub mean_daily_volume: f64,
    pub retweets_multiple_influencers: bool,
    pub retweeter_inf: f64,
}

/// One row per (influencer, retweeter) pair passing `opts.min_retweets`.
/// `volume` and `influence` supply the retweeter's mean daily tweets and
/// influence score (0 when absent).
pub fn bot_signal_rows(
    index: &TimeIndex,
    influencers: &[String],
    volume: &BTreeMap<String, f64>,
    influence: &BTreeMap<String, f64>,
    opts: &DirectInfluenceOptions,
) -> Result<Vec<BotSignalRow>, BotSigError> {
    let selected: BTreeSet<&str> = influencers.iter().map(String::as_str).collect();
    let mut reach: HashMap<&str, usize> = HashMap::new();
    for inf in &selected {
        for r in index.retweeters_of(inf).into_keys() {
            *reach.entry(r).or_default() += 1;
        }
    }
    let mut rows = Vec::new();
    for inf in influencers {
        let te = index.direct_retweeter_influence(inf, opts)?;
        let counts = index.retweeters_of(inf);
        for (retweeter, value) in te {
            rows.push(BotSignalRow {
                influencer_id: inf.clone(),
                retweet_count: counts[retweeter.as_str()],
                transfer_entropy: value,
                mean_daily_volume: volume.get(&retweeter).copied().unwrap_or(0.0),
                retweets_multiple_influencers: reach.get(retweeter.as_str()).copied().unwrap_or(0) > 1,
                retweeter_inf: influence.get(&retweeter).copied().unwrap_or(0.0),
                retweeter_id: retweeter,
            });
        }
    }
    Ok(rows)
}

/// Median of a sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Linear-interpolation quantile, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub retweeter_id: String,
    pub x: f64,
    pub y: f64,
    /// Retweeter influence; rendered as marker size.
    pub size: f64,
    /// Retweeted more than one selected influencer; rendered as marker shape.
    pub multi_influencer: bool,
    /// Mean daily volume above the threshold; rendered as marker colour.
    pub high_volume: bool,
}

/// Radial layout around the influencer at the origin. Frequent retweeters sit
/// closer; angles come from a generator seeded by `layout_seed`.
pub fn retweeter_scatter_data(
    influencer: &str,
    signals: &[BotSignalRow],
    volume_threshold: f64,
    layout_seed: u64,
) -> Vec<ScatterPoint> {
    let mut rows: Vec<&BotSignalRow> = signals.iter().filter(|s| s.influencer_id == influencer).collect();
    rows.sort_by(|a, b| a.retweeter_id.cmp(&b.retweeter_id));
    let mut rng = ChaCha8Rng::seed_from_u64(layout_seed);
    rows.into_iter()
        .map(|s| {
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            let radius = 1.0 / (s.retweet_count.max(1) as f64).sqrt();
            ScatterPoint {
                retweeter_id: s.retweeter_id.clone(),
                x: radius * angle.cos(),
                y: radius * angle.sin(),
                size: s.retweeter_inf,
                multi_influencer: s.retweets_multiple_influencers,
                high_volume: s.mean_daily_volume > volume_threshold,
            }
        })
        .collect()
}
