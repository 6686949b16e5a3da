//! Newline-delimited JSON tweet ingestion, normalization and period slicing.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use chrono::{DateTime, Days, NaiveDate, NaiveDateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("user {0} retweeted themselves")]
    SelfRetweet(String),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid period: {0}")]
    InvalidPeriod(String),
    #[error("record outside corpus period: tweet {0}")]
    OutOfPeriod(String),
}

/// One normalized tweet event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TweetRecord {
    #[serde(rename = "id")]
    pub tweet_id: String,
    pub user_id: String,
    pub screen_name: String,
    /// UTC seconds since the epoch.
    #[serde(rename = "created_at")]
    pub timestamp: i64,
    pub hashtags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retweet_of_user_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retweet_of_tweet_id: Option<String>,
}

impl TweetRecord {
    pub fn is_retweet(&self) -> bool {
        self.retweet_of_user_id.is_some()
    }

    pub fn day(&self) -> NaiveDate {
        day_of(self.timestamp)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("tweet record serializes")
    }
}

pub fn day_of(timestamp: i64) -> NaiveDate {
    let days = timestamp.div_euclid(SECONDS_PER_DAY);
    NaiveDate::from_num_days_from_ce_opt((days + 719_163) as i32).expect("timestamp within chrono range")
}

pub fn midnight_of(day: NaiveDate) -> i64 {
    day.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawId {
    Text(String),
    Number(u64),
}

impl RawId {
    fn into_string(self) -> String {
        match self {
            RawId::Text(s) => s,
            RawId::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTimestamp {
    Epoch(i64),
    Text(String),
}

#[derive(Deserialize)]
struct RawRecord {
    id: RawId,
    user_id: RawId,
    screen_name: String,
    created_at: RawTimestamp,
    hashtags: Vec<String>,
    #[serde(default)]
    retweet_of_user_id: Option<RawId>,
    #[serde(default)]
    retweet_of_tweet_id: Option<RawId>,
}

fn parse_timestamp(raw: RawTimestamp) -> Result<i64, RecordError> {
    let text = match raw {
        RawTimestamp::Epoch(secs) => {
            return DateTime::<Utc>::from_timestamp(secs, 0)
                .map(|t| t.timestamp())
                .ok_or_else(|| RecordError::Malformed(format!("timestamp {secs} out of range")))
        }
        RawTimestamp::Text(text) => text,
    };
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Ok(t.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(text, fmt) {
            return Ok(t.and_utc().timestamp());
        }
    }
    // Twitter's legacy v1.1 format, e.g. "Wed Aug 09 00:00:00 +0000 2017".
    if let Ok(t) = DateTime::parse_from_str(text, "%a %b %d %H:%M:%S %z %Y") {
        return Ok(t.timestamp());
    }
    Err(RecordError::Malformed(format!("unparsable timestamp {text:?}")))
}

/// Lowercases, trims, strips a leading `#` and drops duplicates, keeping
/// first-occurrence order.
pub fn normalize_hashtags<I, S>(tags: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for tag in tags {
        let tag = tag.as_ref().trim();
        let tag = tag.trim_start_matches('#').trim().to_lowercase();
        if !tag.is_empty() && seen.insert(tag.clone()) {
            out.push(tag);
        }
    }
    out
}

pub fn parse_tweet_record(line: &str) -> Result<TweetRecord, RecordError> {
    let raw: RawRecord =
        serde_json::from_str(line).map_err(|e| RecordError::Malformed(e.to_string()))?;
    let timestamp = parse_timestamp(raw.created_at)?;
    let user_id = raw.user_id.into_string();
    if user_id.is_empty() {
        return Err(RecordError::Malformed("empty user_id".into()));
    }
    let retweet_of_user_id = raw
        .retweet_of_user_id
        .map(RawId::into_string)
        .filter(|s| !s.is_empty());
    if retweet_of_user_id.as_deref() == Some(user_id.as_str()) {
        return Err(RecordError::SelfRetweet(user_id));
    }
    Ok(TweetRecord {
        tweet_id: raw.id.into_string(),
        user_id,
        screen_name: raw.screen_name,
        timestamp,
        hashtags: normalize_hashtags(&raw.hashtags),
        retweet_of_user_id,
        retweet_of_tweet_id: raw
            .retweet_of_tweet_id
            .map(RawId::into_string)
            .filter(|s| !s.is_empty()),
    })
}

/// An inclusive range of UTC calendar days.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    start: NaiveDate,
    end: NaiveDate,
    label: String,
}

impl Period {
    pub fn new(start: NaiveDate, end: NaiveDate, label: impl Into<String>) -> Result<Self, IngestError> {
        if start > end {
            return Err(IngestError::InvalidPeriod(format!("{start} is after {end}")));
        }
        Ok(Self { start, end, label: label.into() })
    }

    pub fn single_day(day: NaiveDate) -> Self {
        Self { start: day, end: day, label: day.to_string() }
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of calendar days, both ends included.
    pub fn num_days(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    pub fn contains_day(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }

    pub fn start_timestamp(&self) -> i64 {
        midnight_of(self.start)
    }

    /// Exclusive end instant (midnight after the last day).
    pub fn end_timestamp(&self) -> i64 {
        midnight_of(self.end) + SECONDS_PER_DAY
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.num_days() as u64).map(move |i| self.start + Days::new(i))
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for Period {
    type Err = IngestError;

    /// Parses `YYYY-MM-DD..YYYY-MM-DD`, optionally prefixed with `label=`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (label, range) = match s.split_once('=') {
            Some((label, range)) => (Some(label.trim()), range),
            None => (None, s),
        };
        let (a, b) = range
            .split_once("..")
            .ok_or_else(|| IngestError::InvalidPeriod(format!("expected START..END, got {s:?}")))?;
        let parse = |d: &str| {
            NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d")
                .map_err(|e| IngestError::InvalidPeriod(format!("{d:?}: {e}")))
        };
        let (start, end) = (parse(a)?, parse(b)?);
        let label = label.map(str::to_owned).unwrap_or_else(|| format!("{start}..{end}"));
        Period::new(start, end, label)
    }
}

/// Time-ordered tweets restricted to one period. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    records: Vec<TweetRecord>,
    period: Period,
}

impl Corpus {
    /// Sorts `records` into canonical `(timestamp, tweet_id)` order. Every
    /// record must fall inside `period`.
    pub fn new(mut records: Vec<TweetRecord>, period: Period) -> Result<Self, IngestError> {
        if let Some(r) = records.iter().find(|r| !period.contains_day(r.day())) {
            return Err(IngestError::OutOfPeriod(r.tweet_id.clone()));
        }
        records.par_sort_unstable_by(|a, b| {
            (a.timestamp, &a.tweet_id).cmp(&(b.timestamp, &b.tweet_id))
        });
        Ok(Self { records, period })
    }

    pub fn empty(period: Period) -> Self {
        Self { records: Vec::new(), period }
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn period(&self) -> &Period {
        &self.period
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_json_line());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub accepted: usize,
    pub malformed: usize,
    pub out_of_period: usize,
    pub self_retweets: usize,
    /// Repeated tweet ids; only the first occurrence is kept.
    pub duplicates: usize,
}

impl IngestStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

fn read_lines<R: BufRead>(mut source: R) -> Result<Vec<Vec<u8>>, IngestError> {
    let mut lines = Vec::new();
    loop {
        let mut buf = Vec::new();
        if source.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        lines.push(buf);
    }
    Ok(lines)
}

fn parse_lines(lines: &[Vec<u8>]) -> Vec<Option<Result<TweetRecord, RecordError>>> {
    lines
        .par_iter()
        .map(|bytes| match std::str::from_utf8(bytes) {
            Ok(line) if line.trim().is_empty() => None,
            Ok(line) => Some(parse_tweet_record(line)),
            Err(e) => Some(Err(RecordError::Malformed(e.to_string()))),
        })
        .collect()
}

/// Reads newline-delimited tweets, keeping those whose UTC day lies inside
/// `period`. Bad lines are counted, never fatal. Blank lines are ignored.
pub fn load_corpus<R: BufRead>(source: R, period: Period) -> Result<(Corpus, IngestStats), IngestError> {
    let lines = read_lines(source)?;
    Ok(assemble(parse_lines(&lines), Some(period)))
}

/// Like [`load_corpus`], but the period is the span of days actually present.
/// Returns `None` when the source holds no valid record.
pub fn load_corpus_spanning<R: BufRead>(source: R) -> Result<Option<(Corpus, IngestStats)>, IngestError> {
    let lines = read_lines(source)?;
    let parsed = parse_lines(&lines);
    let (corpus, stats) = assemble(parsed, None);
    Ok(if corpus.is_empty() { None } else { Some((corpus, stats)) })
}

fn assemble(
    parsed: Vec<Option<Result<TweetRecord, RecordError>>>,
    period: Option<Period>,
) -> (Corpus, IngestStats) {
    let mut stats = IngestStats::default();
    let mut kept = Vec::new();
    for item in parsed.into_iter().flatten() {
        match item {
            Ok(r) => {
                if period.as_ref().is_some_and(|p| !p.contains_day(r.day())) {
                    stats.out_of_period += 1;
                } else {
                    kept.push(r);
                }
            }
            Err(RecordError::Malformed(_)) => stats.malformed += 1,
            Err(RecordError::SelfRetweet(_)) => stats.self_retweets += 1,
        }
    }
    let period = period.unwrap_or_else(|| {
        let first = kept.iter().map(|r| r.day()).min();
        let last = kept.iter().map(|r| r.day()).max();
        match (first, last) {
            (Some(a), Some(b)) => Period::new(a, b, format!("{a}..{b}")).unwrap(),
            _ => Period::single_day(NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()),
        }
    });
    let corpus = Corpus::new(kept, period).expect("records pre-filtered to period");
    // Duplicates are resolved after sorting so the survivor does not depend
    // on line order.
    let mut seen = HashSet::with_capacity(corpus.len());
    let Corpus { records, period } = corpus;
    let mut records_out = Vec::with_capacity(records.len());
    for r in records {
        if seen.insert(r.tweet_id.clone()) {
            records_out.push(r);
        } else {
            stats.duplicates += 1;
        }
    }
    stats.accepted = records_out.len();
    (Corpus { records: records_out, period }, stats)
}

/// Splits a corpus into one sub-corpus per UTC calendar day that has tweets.
pub fn daily_partition(corpus: &Corpus) -> BTreeMap<NaiveDate, Corpus> {
    let mut out: BTreeMap<NaiveDate, Corpus> = BTreeMap::new();
    for r in corpus.records() {
        let day = r.day();
        out.entry(day)
            .or_insert_with(|| Corpus::empty(Period::single_day(day)))
            .records
            .push(r.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn aug(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2017, 8, day).unwrap()
    }

    fn period(a: u32, b: u32) -> Period {
        Period::new(aug(a), aug(b), "p").unwrap()
    }

    fn line(id: &str, user: &str, ts: i64) -> String {
        format!(r#"{{"id":"{id}","user_id":"{user}","screen_name":"{user}","created_at":{ts},"hashtags":["x"]}}"#)
    }

    #[test]
    fn casefolds_and_dedupes_hashtags() {
        let r = parse_tweet_record(
            r#"{"id":"1","user_id":"u1","screen_name":"a","created_at":1502236800,"hashtags":["BTW17","btw17"]}"#,
        )
        .unwrap();
        assert_eq!(r.hashtags, vec!["btw17"]);
        assert_eq!(r.timestamp, 1_502_236_800);
        assert!(!r.is_retweet());
    }

    #[test]
    fn strips_hash_prefix_and_keeps_first_order() {
        assert_eq!(normalize_hashtags(["#AfD", " cdu ", "afd", "", "#"]), vec!["afd", "cdu"]);
    }

    #[test]
    fn self_retweet_is_rejected() {
        let err = parse_tweet_record(
            r#"{"id":"2","user_id":"u1","screen_name":"a","created_at":1502236800,"hashtags":[],"retweet_of_user_id":"u1"}"#,
        )
        .unwrap_err();
        assert_eq!(err, RecordError::SelfRetweet("u1".into()));
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(parse_tweet_record("not json"), Err(RecordError::Malformed(_))));
        assert!(matches!(
            parse_tweet_record(r#"{"id":"1","screen_name":"a","created_at":1,"hashtags":[]}"#),
            Err(RecordError::Malformed(_))
        ));
        assert!(matches!(
            parse_tweet_record(r#"{"id":"1","user_id":"u","screen_name":"a","created_at":"yesterday","hashtags":[]}"#),
            Err(RecordError::Malformed(_))
        ));
    }

    #[test]
    fn iso_timestamps() {
        let iso = parse_tweet_record(
            r#"{"id":"1","user_id":"u","screen_name":"a","created_at":"2017-08-09T00:00:00Z","hashtags":[]}"#,
        )
        .unwrap();
        let offset = parse_tweet_record(
            r#"{"id":"1","user_id":"u","screen_name":"a","created_at":"2017-08-09T02:00:00+02:00","hashtags":[]}"#,
        )
        .unwrap();
        let legacy = parse_tweet_record(
            r#"{"id":"1","user_id":"u","screen_name":"a","created_at":"Wed Aug 09 00:00:00 +0000 2017","hashtags":[]}"#,
        )
        .unwrap();
        assert_eq!(iso.timestamp, 1_502_236_800);
        assert_eq!(offset.timestamp, 1_502_236_800);
        assert_eq!(legacy.timestamp, 1_502_236_800);
    }

    #[test]
    fn period_parsing() {
        let p: Period = "2017-08-01..2017-08-31".parse().unwrap();
        assert_eq!(p.num_days(), 31);
        let p: Period = "P2=2017-09-01..2017-09-23".parse().unwrap();
        assert_eq!(p.label(), "P2");
        assert!("2017-09-05..2017-09-01".parse::<Period>().is_err());
        assert!("2017-09-05".parse::<Period>().is_err());
    }

    #[test]
    fn load_filters_period() {
        let day = midnight_of(aug(2));
        let src = [
            line("1", "a", day),
            line("2", "a", day + 10),
            line("3", "b", day + 20),
            line("4", "b", day + 3 * SECONDS_PER_DAY),
        ]
        .join("\n");
        let (corpus, stats) = load_corpus(src.as_bytes(), period(1, 3)).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(stats.out_of_period, 1);
        assert_eq!(stats.accepted, 3);
    }

    #[test]
    fn load_empty_source() {
        let (corpus, stats) = load_corpus(&b""[..], period(1, 3)).unwrap();
        assert!(corpus.is_empty());
        assert_eq!(stats, IngestStats::default());
    }

    #[test]
    fn load_sorts_and_drops_duplicates() {
        let day = midnight_of(aug(1));
        let src = [line("b", "u", day + 5), line("a", "u", day + 5), line("c", "u", day), line("a", "v", day + 9)]
            .join("\n");
        let (corpus, stats) = load_corpus(src.as_bytes(), period(1, 1)).unwrap();
        let ids: Vec<_> = corpus.records().iter().map(|r| r.tweet_id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
        assert_eq!(stats.duplicates, 1);
    }

    #[test]
    fn spanning_load_infers_period() {
        let src = [line("1", "a", midnight_of(aug(3)) + 5), line("2", "a", midnight_of(aug(7)))].join("\n");
        let (corpus, _) = load_corpus_spanning(src.as_bytes()).unwrap().unwrap();
        assert_eq!(corpus.period().start(), aug(3));
        assert_eq!(corpus.period().end(), aug(7));
        assert!(load_corpus_spanning(&b"junk\n"[..]).unwrap().is_none());
    }

    #[test]
    fn partition_splits_at_midnight() {
        let mid = midnight_of(aug(2));
        let records = vec![
            parse_tweet_record(&line("1", "a", mid - 1)).unwrap(),
            parse_tweet_record(&line("2", "a", mid)).unwrap(),
        ];
        let corpus = Corpus::new(records, period(1, 2)).unwrap();
        let parts = daily_partition(&corpus);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&aug(1)].len(), 1);
        assert_eq!(parts[&aug(2)].len(), 1);
        assert!(daily_partition(&Corpus::empty(period(1, 2))).is_empty());
    }

    #[test]
    fn partition_sizes() {
        let d1 = midnight_of(aug(1));
        let d2 = midnight_of(aug(2));
        let records = (0..5)
            .map(|i| {
                let ts = if i < 3 { d1 + i } else { d2 + i };
                parse_tweet_record(&line(&i.to_string(), "a", ts)).unwrap()
            })
            .collect();
        let parts = daily_partition(&Corpus::new(records, period(1, 2)).unwrap());
        let sizes: Vec<_> = parts.values().map(Corpus::len).collect();
        assert_eq!(sizes, [3, 2]);
    }

    fn arb_record() -> impl Strategy<Value = TweetRecord> {
        (
            "[a-z0-9]{1,8}",
            "u[0-9]{1,3}",
            "[A-Za-z_]{0,10}",
            1_400_000_000i64..1_700_000_000,
            proptest::collection::vec("[a-z0-9äöü]{1,6}", 0..5),
            proptest::option::of("v[0-9]{1,3}"),
            proptest::option::of("[0-9]{1,6}"),
        )
            .prop_map(|(id, user, name, ts, tags, rt_user, rt_tweet)| TweetRecord {
                tweet_id: id,
                user_id: user,
                screen_name: name,
                timestamp: ts,
                hashtags: normalize_hashtags(tags),
                retweet_of_user_id: rt_user,
                retweet_of_tweet_id: rt_tweet,
            })
    }

    proptest! {
        #[test]
        fn json_round_trip(r in arb_record()) {
            prop_assert_eq!(parse_tweet_record(&r.to_json_line()).unwrap(), r);
        }

        #[test]
        fn partition_is_a_partition(offsets in proptest::collection::vec(0i64..5 * SECONDS_PER_DAY, 0..60)) {
            let base = midnight_of(aug(1));
            let records: Vec<_> = offsets
                .iter()
                .enumerate()
                .map(|(i, off)| parse_tweet_record(&line(&i.to_string(), "u", base + off)).unwrap())
                .collect();
            let corpus = Corpus::new(records, period(1, 5)).unwrap();
            let parts = daily_partition(&corpus);
            let total: usize = parts.values().map(Corpus::len).sum();
            prop_assert_eq!(total, corpus.len());
            let mut ids = HashSet::new();
            for (day, part) in &parts {
                for r in part.records() {
                    prop_assert_eq!(r.day(), *day);
                    prop_assert!(ids.insert(r.tweet_id.clone()));
                }
            }
        }

        #[test]
        fn load_is_order_independent(lines in proptest::collection::vec((0i64..86_000, 0u8..3), 1..30)) {
            let base = midnight_of(aug(1));
            let render = |v: &[(i64, u8)]| {
                v.iter().enumerate().map(|(i, (off, u))| line(&format!("t{i}"), &format!("u{u}"), base + off)).collect::<Vec<_>>()
            };
            let forward = render(&lines).join("\n");
            let mut shuffled = render(&lines);
            shuffled.reverse();
            let (a, _) = load_corpus(forward.as_bytes(), period(1, 1)).unwrap();
            let (b, _) = load_corpus(shuffled.join("\n").as_bytes(), period(1, 1)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
