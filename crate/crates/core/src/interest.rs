//! Per-user topical interest vectors, topical entropy and tweet volume.

use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Corpus, TweetRecord};
use crate::topic::TopicCluster;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterestError {
    #[error("user {0} used no hashtags")]
    NoHashtagUser(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterestOptions {
    /// Count hashtags carried by retweets as usages of the retweeter.
    pub include_retweets: bool,
}

impl Default for InterestOptions {
    fn default() -> Self {
        Self { include_retweets: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterestVector {
    pub user_id: String,
    /// Interest per topic id, one entry for every supplied topic.
    pub interests: BTreeMap<usize, f64>,
    /// Hashtag usages counted with multiplicity.
    pub total_hashtag_usages: u64,
}

impl InterestVector {
    pub fn max_interest(&self) -> f64 {
        self.interests.values().copied().fold(0.0, f64::max)
    }

    pub fn get(&self, topic: usize) -> f64 {
        self.interests.get(&topic).copied().unwrap_or(0.0)
    }
}

struct TopicLookup<'a> {
    ids: Vec<usize>,
    by_hashtag: HashMap<&'a str, Vec<usize>>,
}

impl<'a> TopicLookup<'a> {
    fn new(topics: &'a [TopicCluster]) -> Self {
        let mut by_hashtag: HashMap<&str, Vec<usize>> = HashMap::new();
        for t in topics {
            for h in &t.hashtags {
                by_hashtag.entry(h.as_str()).or_default().push(t.id);
            }
        }
        Self { ids: topics.iter().map(|t| t.id).collect(), by_hashtag }
    }

    fn vector<'r>(
        &self,
        user: &str,
        tweets: impl Iterator<Item = &'r TweetRecord>,
        opts: InterestOptions,
    ) -> Result<InterestVector, InterestError> {
        let mut counts: BTreeMap<usize, u64> = self.ids.iter().map(|&id| (id, 0)).collect();
        let mut total = 0u64;
        for r in tweets.filter(|r| opts.include_retweets || !r.is_retweet()) {
            for h in &r.hashtags {
                total += 1;
                for id in self.by_hashtag.get(h.as_str()).into_iter().flatten() {
                    *counts.get_mut(id).unwrap() += 1;
                }
            }
        }
        if total == 0 {
            return Err(InterestError::NoHashtagUser(user.to_owned()));
        }
        let interests = counts.into_iter().map(|(id, c)| (id, c as f64 / total as f64)).collect();
        Ok(InterestVector { user_id: user.to_owned(), interests, total_hashtag_usages: total })
    }
}

/// Fraction of the user's hashtag usages that fall in each topic.
pub fn interest_vector(
    user: &str,
    topics: &[TopicCluster],
    corpus: &Corpus,
    opts: InterestOptions,
) -> Result<InterestVector, InterestError> {
    let lookup = TopicLookup::new(topics);
    lookup.vector(user, corpus.records().iter().filter(|r| r.user_id == user), opts)
}

/// Groups a corpus by author, preserving time order.
pub fn tweets_by_user(corpus: &Corpus) -> BTreeMap<&str, Vec<&TweetRecord>> {
    let mut out: BTreeMap<&str, Vec<&TweetRecord>> = BTreeMap::new();
    for r in corpus.records() {
        out.entry(r.user_id.as_str()).or_default().push(r);
    }
    out
}

/// Interest vectors for every user with at least one hashtag usage.
pub fn interest_vectors(
    corpus: &Corpus,
    topics: &[TopicCluster],
    opts: InterestOptions,
) -> BTreeMap<String, InterestVector> {
    let lookup = TopicLookup::new(topics);
    let by_user: Vec<_> = tweets_by_user(corpus).into_iter().collect();
    by_user
        .par_iter()
        .filter_map(|(user, tweets)| lookup.vector(user, tweets.iter().copied(), opts).ok())
        .map(|v| (v.user_id.clone(), v))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

/// Shannon entropy of the interest entries in nats, with `0 ln 0 = 0`.
pub fn topical_entropy(vector: &InterestVector) -> f64 {
    topical_entropy_in(vector, LogBase::Natural)
}

pub fn topical_entropy_in(vector: &InterestVector, base: LogBase) -> f64 {
    let nats: f64 = vector
        .interests
        .values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    let nats = nats.max(0.0);
    match base {
        LogBase::Natural => nats,
        LogBase::Two => nats / std::f64::consts::LN_2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserActivity {
    pub user_id: String,
    pub tweets_per_day: BTreeMap<NaiveDate, u64>,
    /// Tweets per day averaged over every day of the corpus period.
    pub mean_daily_volume: f64,
}

impl UserActivity {
    fn from_tweets<'r>(user: &str, tweets: impl Iterator<Item = &'r TweetRecord>, days: usize) -> Self {
        let mut tweets_per_day: BTreeMap<NaiveDate, u64> = BTreeMap::new();
        for r in tweets {
            *tweets_per_day.entry(r.day()).or_default() += 1;
        }
        let total: u64 = tweets_per_day.values().sum();
        Self {
            user_id: user.to_owned(),
            tweets_per_day,
            mean_daily_volume: total as f64 / days.max(1) as f64,
        }
    }

    pub fn total(&self) -> u64 {
        self.tweets_per_day.values().sum()
    }
}

/// Daily tweet counts (originals and retweets) for one user.
pub fn user_activity(user: &str, corpus: &Corpus) -> UserActivity {
    UserActivity::from_tweets(
        user,
        corpus.records().iter().filter(|r| r.user_id == user),
        corpus.period().num_days(),
    )
}

pub fn activity_table(corpus: &Corpus) -> BTreeMap<String, UserActivity> {
    let days = corpus.period().num_days();
    tweets_by_user(corpus)
        .into_iter()
        .map(|(user, tweets)| (user.to_owned(), UserActivity::from_tweets(user, tweets.into_iter(), days)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{midnight_of, Period, SECONDS_PER_DAY};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2017, 8, d).unwrap()
    }

    fn tweet(id: usize, user: &str, ts: i64, tags: &[&str]) -> TweetRecord {
        TweetRecord {
            tweet_id: id.to_string(),
            user_id: user.into(),
            screen_name: user.into(),
            timestamp: ts,
            hashtags: tags.iter().map(|s| s.to_string()).collect(),
            retweet_of_user_id: None,
            retweet_of_tweet_id: None,
        }
    }

    fn corpus(tweets: Vec<TweetRecord>, days: u32) -> Corpus {
        Corpus::new(tweets, Period::new(day(1), day(days), "p").unwrap()).unwrap()
    }

    fn topic(id: usize, tags: &[&str]) -> TopicCluster {
        TopicCluster::new(id, tags.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>())
    }

    fn vector(entries: &[f64]) -> InterestVector {
        InterestVector {
            user_id: "u".into(),
            interests: entries.iter().copied().enumerate().collect(),
            total_hashtag_usages: 1,
        }
    }

    #[test]
    fn counts_with_multiplicity() {
        let t0 = midnight_of(day(1));
        let c = corpus(vec![tweet(1, "u", t0, &["a"]), tweet(2, "u", t0 + 1, &["a", "b"])], 1);
        let v = interest_vector("u", &[topic(1, &["a"]), topic(2, &["b"])], &c, InterestOptions::default()).unwrap();
        assert_eq!(v.total_hashtag_usages, 3);
        assert!((v.get(1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((v.get(2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn usages_outside_topics() {
        let t0 = midnight_of(day(1));
        let c = corpus(vec![tweet(1, "u", t0, &["a", "z"])], 1);
        let v = interest_vector("u", &[topic(1, &["a"])], &c, InterestOptions::default()).unwrap();
        assert_eq!(v.get(1), 0.5);
        assert_eq!(v.interests.values().sum::<f64>(), 0.5);
    }

    #[test]
    fn focused_user() {
        let t0 = midnight_of(day(1));
        let c = corpus(vec![tweet(1, "u", t0, &["a", "b"])], 1);
        let v = interest_vector("u", &[topic(0, &["a", "b"]), topic(1, &["c"])], &c, InterestOptions::default())
            .unwrap();
        assert_eq!(v.get(0), 1.0);
        assert_eq!(v.get(1), 0.0);
        assert_eq!(topical_entropy(&v), 0.0);
    }

    #[test]
    fn hashtagless_user_is_excluded() {
        let t0 = midnight_of(day(1));
        let c = corpus(vec![tweet(1, "u", t0, &[]), tweet(2, "w", t0, &["a"])], 1);
        assert_eq!(
            interest_vector("u", &[topic(0, &["a"])], &c, InterestOptions::default()),
            Err(InterestError::NoHashtagUser("u".into()))
        );
        let all = interest_vectors(&c, &[topic(0, &["a"])], InterestOptions::default());
        assert_eq!(all.keys().collect::<Vec<_>>(), ["w"]);
    }

    #[test]
    fn originals_only_mode() {
        let t0 = midnight_of(day(1));
        let mut rt = tweet(2, "u", t0 + 5, &["b"]);
        rt.retweet_of_user_id = Some("x".into());
        let c = corpus(vec![tweet(1, "u", t0, &["a"]), rt], 1);
        let topics = [topic(0, &["a"]), topic(1, &["b"])];
        let v = interest_vector("u", &topics, &c, InterestOptions { include_retweets: false }).unwrap();
        assert_eq!(v.get(0), 1.0);
        let v = interest_vector("u", &topics, &c, InterestOptions::default()).unwrap();
        assert_eq!(v.get(0), 0.5);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(topical_entropy(&vector(&[1.0, 0.0, 0.0])), 0.0);
        assert!((topical_entropy(&vector(&[0.5, 0.5])) - std::f64::consts::LN_2).abs() < 1e-15);
        let expected = -(2.0f64 / 3.0) * (2.0f64 / 3.0).ln() - (1.0f64 / 3.0) * (1.0f64 / 3.0).ln();
        assert!((topical_entropy(&vector(&[2.0 / 3.0, 1.0 / 3.0])) - expected).abs() < 1e-15);
        assert!((expected - 0.6365).abs() < 1e-4);
        assert!((topical_entropy_in(&vector(&[0.5, 0.5]), LogBase::Two) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn activity_examples() {
        let t1 = midnight_of(day(1));
        let mut tweets: Vec<_> = (0..10).map(|i| tweet(i, "u", t1 + i as i64, &[])).collect();
        tweets.extend((10..20).map(|i| tweet(i, "u", t1 + SECONDS_PER_DAY + i as i64, &[])));
        assert_eq!(user_activity("u", &corpus(tweets, 2)).mean_daily_volume, 10.0);

        let tweets: Vec<_> = (0..10).map(|i| tweet(i, "u", t1 + i as i64, &[])).collect();
        let c = corpus(tweets, 5);
        assert_eq!(user_activity("u", &c).mean_daily_volume, 2.0);
        assert_eq!(user_activity("nobody", &c).mean_daily_volume, 0.0);
        assert_eq!(activity_table(&c)["u"].total(), 10);
    }

    proptest! {
        #[test]
        fn entropy_bounds(weights in proptest::collection::vec(0.0f64..1.0, 1..10)) {
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 1e-9);
            let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let e = topical_entropy(&vector(&p));
            prop_assert!(e >= 0.0);
            prop_assert!(e <= (p.len() as f64).ln() + 1e-12);
            let mut rev = p.clone();
            rev.reverse();
            prop_assert!((topical_entropy(&vector(&rev)) - e).abs() < 1e-12);
        }

        #[test]
        fn duplicating_tweets_keeps_ratios(tags in proptest::collection::vec(proptest::collection::vec(0u8..6, 1..4), 1..10)) {
            let t0 = midnight_of(day(1));
            let render = |copies: usize| {
                let mut out = Vec::new();
                for c in 0..copies {
                    for (i, t) in tags.iter().enumerate() {
                        let names: Vec<String> = t.iter().map(|h| format!("h{h}")).collect();
                        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                        out.push(tweet(c * 100 + i, "u", t0 + i as i64, &refs));
                    }
                }
                corpus(out, 1)
            };
            let topics = [topic(0, &["h0", "h1"]), topic(1, &["h2", "h3"]), topic(2, &["h4"])];
            let once = interest_vector("u", &topics, &render(1), InterestOptions::default()).unwrap();
            let twice = interest_vector("u", &topics, &render(2), InterestOptions::default()).unwrap();
            for (a, b) in once.interests.values().zip(twice.interests.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!(once.interests.values().sum::<f64>() <= 1.0 + 1e-12);
        }
    }
}
