//! Seeded synthetic campaigns with planted topics, influencers and bot farms.
//!
//! Generation is single-threaded so that a seed fully determines the output.
//! User ids are opaque (`u000123`) and assigned through a seeded permutation,
//! so nothing downstream can recover a user's role from its id.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{midnight_of, Corpus, Period, TweetRecord, SECONDS_PER_DAY};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub start: NaiveDate,
    pub days: usize,
    pub n_topics: usize,
    pub hashtags_per_topic: usize,
    pub n_organic: usize,
    pub n_influencers: usize,
    pub n_bot_amplified_influencers: usize,
    pub bots_per_farm: usize,
    /// Tweets per day, Poisson mean.
    pub organic_rate: f64,
    pub influencer_rate: f64,
    /// Target tweets per day for each bot, retweets included.
    pub bot_volume: f64,
    pub bot_react_prob: f64,
    /// Upper bound of a bot's reaction delay in seconds.
    pub bot_react_delay: i64,
    /// Chance that a bot also retweets a given tweet of another amplified
    /// influencer. This is what makes farms overlap in retweeter sets.
    pub bot_cross_prob: f64,
    /// Per-tweet chance that a given organic user of the influencer's topic
    /// retweets it.
    pub organic_retweet_prob: f64,
    /// Mean organic retweet delay in seconds (exponential).
    pub organic_retweet_delay: f64,
    /// Topics per organic user are drawn from `1..=max_topics_per_user`.
    pub max_topics_per_user: usize,
    /// Per-tweet chance that one hashtag is swapped for one of another topic.
    pub cross_topic_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            start: NaiveDate::from_ymd_opt(2017, 8, 25).unwrap(),
            days: 30,
            n_topics: 5,
            hashtags_per_topic: 12,
            n_organic: 2000,
            n_influencers: 8,
            n_bot_amplified_influencers: 3,
            bots_per_farm: 40,
            organic_rate: 1.5,
            influencer_rate: 10.0,
            bot_volume: 150.0,
            bot_react_prob: 0.9,
            bot_react_delay: 59 * 60,
            bot_cross_prob: 0.1,
            organic_retweet_prob: 3e-4,
            organic_retweet_delay: 3.0 * 3600.0,
            max_topics_per_user: 2,
            cross_topic_noise: 0.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.days == 0 {
            return bad("days must be at least 1".into());
        }
        if self.n_topics == 0 || self.hashtags_per_topic == 0 {
            return bad("need at least one topic with one hashtag".into());
        }
        if self.n_bot_amplified_influencers > self.n_influencers {
            return bad(format!(
                "{} bot-amplified influencers but only {} influencers",
                self.n_bot_amplified_influencers, self.n_influencers
            ));
        }
        for (name, rate) in [
            ("organic_rate", self.organic_rate),
            ("influencer_rate", self.influencer_rate),
            ("bot_volume", self.bot_volume),
        ] {
            if !(rate > 0.0 && rate.is_finite()) {
                return bad(format!("{name} must be positive, got {rate}"));
            }
        }
        for (name, p) in [
            ("bot_react_prob", self.bot_react_prob),
            ("bot_cross_prob", self.bot_cross_prob),
            ("organic_retweet_prob", self.organic_retweet_prob),
            ("cross_topic_noise", self.cross_topic_noise),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.bot_react_delay < 1 || self.bot_react_delay >= 3600 {
            return bad(format!("bot_react_delay must lie in [1, 3600) seconds, got {}", self.bot_react_delay));
        }
        if !(self.organic_retweet_delay > 0.0 && self.organic_retweet_delay.is_finite()) {
            return bad("organic_retweet_delay must be positive".into());
        }
        if self.max_topics_per_user == 0 {
            return bad("max_topics_per_user must be at least 1".into());
        }
        if self.start.checked_add_days(chrono::Days::new(self.days as u64)).is_none() {
            return bad("period end out of range".into());
        }
        Ok(())
    }

    pub fn period(&self) -> Period {
        let end = self.start + chrono::Days::new(self.days as u64 - 1);
        Period::new(self.start, end, format!("{}..{}", self.start, end)).expect("validated")
    }

    pub fn hashtag(topic: usize, index: usize) -> String {
        format!("t{topic}tag{index:02}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub topic_assignment: BTreeMap<String, usize>,
    pub influencer_ids: BTreeSet<String>,
    pub bot_amplified_ids: BTreeSet<String>,
    /// Amplified influencer → its farm.
    pub bot_ids: BTreeMap<String, BTreeSet<String>>,
    /// Home topic of each influencer.
    pub influencer_topics: BTreeMap<String, usize>,
}

impl GroundTruth {
    pub fn all_bots(&self) -> BTreeSet<&str> {
        self.bot_ids.values().flatten().map(String::as_str).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ground truth serializes")
    }
}

/// A tweet before ids are assigned. `origin` indexes the retweeted draft.
struct Draft {
    user: usize,
    ts: i64,
    tags: Vec<usize>,
    origin: Option<usize>,
}

struct Gen<'c> {
    cfg: &'c SynthConfig,
    rng: ChaCha8Rng,
    drafts: Vec<Draft>,
    t0: i64,
    t_end: i64,
}

impl Gen<'_> {
    fn poisson(&mut self, mean: f64) -> usize {
        Poisson::new(mean).expect("positive mean").sample(&mut self.rng) as usize
    }

    fn time_in_day(&mut self, day: usize) -> i64 {
        self.t0 + day as i64 * SECONDS_PER_DAY + self.rng.random_range(0..SECONDS_PER_DAY)
    }

    /// 1-3 distinct hashtags of `topic`, possibly with one swapped out.
    fn hashtags(&mut self, topic: usize) -> Vec<usize> {
        let per = self.cfg.hashtags_per_topic;
        let want = self.rng.random_range(1..=3).min(per);
        let mut tags: Vec<usize> =
            index::sample(&mut self.rng, per, want).into_iter().map(|i| topic * per + i).collect();
        if self.cfg.n_topics > 1 && self.rng.random_bool(self.cfg.cross_topic_noise) {
            let mut other = self.rng.random_range(0..self.cfg.n_topics - 1);
            if other >= topic {
                other += 1;
            }
            let slot = self.rng.random_range(0..tags.len());
            tags[slot] = other * per + self.rng.random_range(0..per);
            tags.sort_unstable();
            tags.dedup();
        }
        tags
    }

    fn retweet(&mut self, user: usize, origin: usize, delay: i64) -> bool {
        let ts = self.drafts[origin].ts + delay;
        if ts >= self.t_end {
            return false;
        }
        let tags = self.drafts[origin].tags.clone();
        self.drafts.push(Draft { user, ts, tags, origin: Some(origin) });
        true
    }
}

/// Builds a campaign: organic users with sparse topical interests, influencers
/// tweeting in one home topic, and one bot farm per amplified influencer.
pub fn generate_campaign(config: &SynthConfig) -> Result<(Corpus, GroundTruth), SynthError> {
    config.validate()?;
    let cfg = config;
    let period = cfg.period();
    let mut g = Gen {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        drafts: Vec::new(),
        t0: midnight_of(cfg.start),
        t_end: period.end_timestamp(),
    };

    // Role layout by index: organic, then influencers, then farms.
    let n_org = cfg.n_organic;
    let n_inf = cfg.n_influencers;
    let n_amp = cfg.n_bot_amplified_influencers;
    let n_bots = n_amp * cfg.bots_per_farm;
    let n_users = n_org + n_inf + n_bots;
    let inf_user = |i: usize| n_org + i;
    let bot_user = |farm: usize, b: usize| n_org + n_inf + farm * cfg.bots_per_farm + b;

    let mut ids: Vec<usize> = (0..n_users).collect();
    ids.shuffle(&mut g.rng);
    let user_id = |u: usize| format!("u{:06}", ids[u]);

    let inf_topic: Vec<usize> = (0..n_inf).map(|i| i % cfg.n_topics).collect();
    let mut amplified: Vec<usize> = (0..n_inf).collect();
    amplified.shuffle(&mut g.rng);
    amplified.truncate(n_amp);
    amplified.sort_unstable();

    // Sparse interests: a few topics with random weights.
    let mut org_topics: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n_org);
    let mut audience: Vec<Vec<usize>> = vec![Vec::new(); cfg.n_topics];
    for u in 0..n_org {
        let k = g.rng.random_range(1..=cfg.max_topics_per_user.min(cfg.n_topics));
        let picked = index::sample(&mut g.rng, cfg.n_topics, k).into_vec();
        let weights: Vec<f64> = picked.iter().map(|_| g.rng.random_range(0.2..1.0)).collect();
        for &t in &picked {
            audience[t].push(u);
        }
        org_topics.push(picked.into_iter().zip(weights).collect());
    }

    for day in 0..cfg.days {
        for (u, topics) in org_topics.iter().enumerate() {
            for _ in 0..g.poisson(cfg.organic_rate) {
                let topic = topics.choose_weighted(&mut g.rng, |&(_, w)| w).expect("nonempty").0;
                let ts = g.time_in_day(day);
                let tags = g.hashtags(topic);
                g.drafts.push(Draft { user: u, ts, tags, origin: None });
            }
        }
    }

    let mut inf_tweets: Vec<Vec<usize>> = vec![Vec::new(); n_inf];
    for (i, tweets) in inf_tweets.iter_mut().enumerate() {
        for day in 0..cfg.days {
            for _ in 0..g.poisson(cfg.influencer_rate) {
                let ts = g.time_in_day(day);
                let tags = g.hashtags(inf_topic[i]);
                tweets.push(g.drafts.len());
                g.drafts.push(Draft { user: inf_user(i), ts, tags, origin: None });
            }
        }
    }

    let delay = Exp::new(1.0 / cfg.organic_retweet_delay).expect("positive delay");
    for (i, tweets) in inf_tweets.iter().enumerate() {
        let fans = &audience[inf_topic[i]];
        let draw = Binomial::new(fans.len() as u64, cfg.organic_retweet_prob).expect("probability");
        for &tweet in tweets {
            let n = draw.sample(&mut g.rng) as usize;
            for pick in index::sample(&mut g.rng, fans.len(), n).into_vec() {
                let d = 60 + delay.sample(&mut g.rng) as i64;
                g.retweet(fans[pick], tweet, d);
            }
        }
    }

    // Bot retweets first; filler then tops each bot-day up to its volume.
    let mut bot_daily: Vec<Vec<usize>> = vec![vec![0; cfg.days]; n_bots];
    let day_of = |ts: i64, t0: i64| ((ts - t0) / SECONDS_PER_DAY) as usize;
    for (farm, &owner) in amplified.iter().enumerate() {
        for b in 0..cfg.bots_per_farm {
            let user = bot_user(farm, b);
            for &target in &amplified {
                let p = if target == owner { cfg.bot_react_prob } else { cfg.bot_cross_prob };
                for &tweet in &inf_tweets[target] {
                    if g.rng.random_bool(p) {
                        let d = g.rng.random_range(1..=cfg.bot_react_delay);
                        if g.retweet(user, tweet, d) {
                            let ts = g.drafts.last().unwrap().ts;
                            bot_daily[user - n_org - n_inf][day_of(ts, g.t0)] += 1;
                        }
                    }
                }
            }
        }
    }
    for (farm, &owner) in amplified.iter().enumerate() {
        for b in 0..cfg.bots_per_farm {
            let user = bot_user(farm, b);
            for day in 0..cfg.days {
                let target = g.poisson(cfg.bot_volume);
                let have = bot_daily[user - n_org - n_inf][day];
                for _ in have..target.max(have) {
                    let ts = g.time_in_day(day);
                    let tags = g.hashtags(inf_topic[owner]);
                    g.drafts.push(Draft { user, ts, tags, origin: None });
                }
            }
        }
    }

    let tags: Vec<String> = (0..cfg.n_topics)
        .flat_map(|t| (0..cfg.hashtags_per_topic).map(move |i| SynthConfig::hashtag(t, i)))
        .collect();
    let user_ids: Vec<String> = (0..n_users).map(user_id).collect();

    // Tweet ids follow time order; ties keep generation order.
    let mut order: Vec<usize> = (0..g.drafts.len()).collect();
    order.sort_by_key(|&d| g.drafts[d].ts);
    let mut tweet_id = vec![String::new(); g.drafts.len()];
    for (rank, &d) in order.iter().enumerate() {
        tweet_id[d] = format!("t{rank:09}");
    }
    let records: Vec<TweetRecord> = order
        .iter()
        .map(|&d| {
            let draft = &g.drafts[d];
            let user = &user_ids[draft.user];
            TweetRecord {
                tweet_id: tweet_id[d].clone(),
                user_id: user.clone(),
                screen_name: format!("user_{user}"),
                timestamp: draft.ts,
                hashtags: draft.tags.iter().map(|&t| tags[t].clone()).collect(),
                retweet_of_user_id: draft.origin.map(|o| user_ids[g.drafts[o].user].clone()),
                retweet_of_tweet_id: draft.origin.map(|o| tweet_id[o].clone()),
            }
        })
        .collect();
    let corpus = Corpus::new(records, period).expect("generated inside the period");

    let truth = GroundTruth {
        topic_assignment: tags.iter().enumerate().map(|(i, t)| (t.clone(), i / cfg.hashtags_per_topic)).collect(),
        influencer_ids: (0..n_inf).map(|i| user_ids[inf_user(i)].clone()).collect(),
        bot_amplified_ids: amplified.iter().map(|&i| user_ids[inf_user(i)].clone()).collect(),
        bot_ids: amplified
            .iter()
            .enumerate()
            .map(|(farm, &i)| {
                let bots = (0..cfg.bots_per_farm).map(|b| user_ids[bot_user(farm, b)].clone()).collect();
                (user_ids[inf_user(i)].clone(), bots)
            })
            .collect(),
        influencer_topics: (0..n_inf).map(|i| (user_ids[inf_user(i)].clone(), inf_topic[i])).collect(),
    };
    Ok((corpus, truth))
}
