//! Pipeline commands: run configuration, CSV tables and SVG figures.
//!
//! Each `cmd_*` function reads the tweet file named in the [`RunConfig`],
//! recomputes the stages it depends on and writes its artifacts into the
//! output directory, together with `config.json` holding the effective
//! configuration.

pub mod svg;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::botsig::{
    self, bot_signal_rows, quantile, retweet_jaccard, retweeter_scatter_data, BotSigError, BotSignalRow,
    DirectInfluenceOptions, RetweeterSeries, TeDirection, TimeIndex, UrMode,
};
use crate::influence::{
    build_retweet_graph, compute_influence, daily_retweet_graphs, representative_influentials, top_influentials,
    FocusFilter, InfluenceTable, PageRankConfig, PageRankMode,
};
use crate::ingest::{load_corpus, load_corpus_spanning, Corpus, IngestError, IngestStats, Period};
use crate::interest::{activity_table, interest_vectors, topical_entropy_in, InterestOptions, InterestVector, LogBase};
use crate::synth::{generate_campaign, SynthConfig, SynthError};
use crate::topic::{
    annotate_topics, build_hashtag_graph, louvain_partition, quadrant_thresholds, select_significant_topics,
    strategic_quadrants, DensityConvention, HashtagGraph, LouvainConfig, Partition, ThresholdStat, TopicCluster,
    TopicError,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("no input file given")]
    MissingInput,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad config file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    BotSig(#[from] BotSigError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// Which topics interest vectors are computed over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterestTopics {
    /// High-centrality quadrants only.
    #[default]
    Relevant,
    /// Every topic that passed the size cut.
    Significant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Newline-delimited JSON tweets.
    pub input: Option<PathBuf>,
    /// `start..end` in UTC days; the span of the data when absent.
    pub period: Option<String>,
    pub out: PathBuf,
    /// Seeds Louvain's visiting order and the scatter layouts.
    pub seed: u64,
    /// Hashtags used in fewer tweets are left out of the topic graph; 0 and
    /// 1 keep every hashtag.
    pub min_hashtag_frequency: u64,
    pub resolution: f64,
    pub min_gain: f64,
    pub density_convention: DensityConvention,
    pub quadrant_stat: ThresholdStat,
    pub interest_topics: InterestTopics,
    pub include_retweets: bool,
    pub entropy_base: LogBase,
    /// Region flagged in the entropy/volume figure.
    pub outlier_entropy: f64,
    pub outlier_volume: f64,
    pub beta: f64,
    pub mode: PageRankMode,
    pub tol: f64,
    pub max_iter: usize,
    pub top_k: usize,
    /// Rows per day in `npr_daily.csv`.
    pub npr_top_k: usize,
    pub interest_threshold: f64,
    pub focus_filter: FocusFilter,
    /// Explicit influencers for `botscan`; otherwise the top-k ranking is
    /// filtered by topical focus.
    pub influencers: Option<Vec<String>>,
    pub ur_mode: UrMode,
    pub bin_width: i64,
    pub k: usize,
    pub l: usize,
    pub min_retweets: u64,
    pub te_direction: TeDirection,
    pub retweeter_series: RetweeterSeries,
    pub volume_threshold: f64,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let te = DirectInfluenceOptions::default();
        let pr = PageRankConfig::default();
        Self {
            input: None,
            period: None,
            out: PathBuf::from("out"),
            seed: 0,
            min_hashtag_frequency: 1,
            resolution: 1.0,
            min_gain: 1e-7,
            density_convention: DensityConvention::default(),
            quadrant_stat: ThresholdStat::default(),
            interest_topics: InterestTopics::default(),
            include_retweets: true,
            entropy_base: LogBase::default(),
            outlier_entropy: 1.0,
            outlier_volume: 200.0,
            beta: pr.beta,
            mode: pr.mode,
            tol: pr.tol,
            max_iter: pr.max_iter,
            top_k: 100,
            npr_top_k: 100,
            interest_threshold: 0.5,
            focus_filter: FocusFilter::default(),
            influencers: None,
            ur_mode: UrMode::default(),
            bin_width: te.bin_width,
            k: te.k,
            l: te.l,
            min_retweets: te.min_retweets,
            te_direction: te.direction,
            retweeter_series: te.retweeter_series,
            volume_threshold: 100.0,
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, ReportError> {
        let text = fs::read_to_string(path).map_err(|source| ReportError::Read { path: path.to_owned(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    // Negated comparisons so that NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ReportError> {
        let bad = |m: String| Err(ReportError::InvalidConfig(m));
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tol must be positive and max_iter at least 1".into());
        }
        if !(self.resolution > 0.0) || !(self.min_gain >= 0.0) {
            return bad("resolution must be positive and min_gain non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.interest_threshold) {
            return bad(format!("interest_threshold must lie in [0, 1], got {}", self.interest_threshold));
        }
        if !(self.volume_threshold >= 0.0) || !(self.outlier_volume >= 0.0) || !(self.outlier_entropy >= 0.0) {
            return bad("volume and entropy thresholds must be non-negative".into());
        }
        if self.top_k == 0 || self.npr_top_k == 0 {
            return bad("top_k and npr_top_k must be at least 1".into());
        }
        if self.bin_width <= 0 {
            return bad(format!("bin_width must be positive, got {}", self.bin_width));
        }
        if self.k == 0 || self.l == 0 || self.k + self.l > 24 {
            return bad(format!("lags k={} l={} out of range", self.k, self.l));
        }
        if let Some(p) = &self.period {
            p.parse::<Period>()?;
        }
        self.synth.validate()?;
        Ok(())
    }

    pub fn pagerank(&self) -> PageRankConfig {
        PageRankConfig { beta: self.beta, mode: self.mode, tol: self.tol, max_iter: self.max_iter }
    }

    pub fn louvain(&self) -> LouvainConfig {
        LouvainConfig { resolution: self.resolution, min_gain: self.min_gain, seed: self.seed }
    }

    pub fn direct_influence(&self) -> DirectInfluenceOptions {
        DirectInfluenceOptions {
            bin_width: self.bin_width,
            k: self.k,
            l: self.l,
            min_retweets: self.min_retweets,
            direction: self.te_direction,
            retweeter_series: self.retweeter_series,
        }
    }

    pub fn interest_options(&self) -> InterestOptions {
        InterestOptions { include_retweets: self.include_retweets }
    }

    fn prepare_out(&self) -> Result<(), ReportError> {
        fs::create_dir_all(&self.out).map_err(|source| ReportError::Write { path: self.out.clone(), source })?;
        let echo = serde_json::to_string_pretty(self)? + "\n";
        write_file(&self.out.join("config.json"), echo)
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError::Write { path: path.to_owned(), source })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, ReportError> {
    let file = File::create(path).map_err(|source| ReportError::Write { path: path.to_owned(), source })?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(file))
}

fn num(v: f64) -> String {
    v.to_string()
}

/// Reads the configured input. Fails on a missing file or an empty corpus.
pub fn load_input(cfg: &RunConfig) -> Result<(Corpus, IngestStats), ReportError> {
    let path = cfg.input.as_ref().ok_or(ReportError::MissingInput)?;
    let file = File::open(path).map_err(|source| ReportError::Read { path: path.clone(), source })?;
    let reader = BufReader::new(file);
    let loaded = match &cfg.period {
        Some(p) => Some(load_corpus(reader, p.parse()?)?),
        None => load_corpus_spanning(reader)?,
    };
    match loaded {
        Some((corpus, stats)) if !corpus.is_empty() => {
            log::info!(
                "loaded {} tweets over {} ({} malformed, {} out of period, {} self-retweets, {} duplicates)",
                stats.accepted,
                corpus.period(),
                stats.malformed,
                stats.out_of_period,
                stats.self_retweets,
                stats.duplicates
            );
            Ok((corpus, stats))
        }
        _ => Err(ReportError::EmptyCorpus),
    }
}

/// Most recent screen name per user.
fn screen_names(corpus: &Corpus) -> BTreeMap<&str, &str> {
    corpus.records().iter().map(|r| (r.user_id.as_str(), r.screen_name.as_str())).collect()
}

pub struct TopicStage {
    pub graph: HashtagGraph,
    pub partition: Partition,
    /// Significant topics, annotated and placed in quadrants.
    pub topics: Vec<TopicCluster>,
    pub thresholds: (f64, f64),
}

impl TopicStage {
    pub fn interest_topics(&self, which: InterestTopics) -> Vec<TopicCluster> {
        match which {
            InterestTopics::Relevant => self.topics.iter().filter(|t| t.relevant).cloned().collect(),
            InterestTopics::Significant => self.topics.clone(),
        }
    }
}

pub fn topic_stage(cfg: &RunConfig, corpus: &Corpus) -> Result<TopicStage, ReportError> {
    let graph = build_hashtag_graph(corpus).with_min_frequency(cfg.min_hashtag_frequency);
    let partition = louvain_partition(&graph, &cfg.louvain())?;
    let mut topics = select_significant_topics(&partition);
    annotate_topics(&mut topics, &graph, cfg.density_convention)?;
    let topics = strategic_quadrants(topics, cfg.quadrant_stat);
    let thresholds = quadrant_thresholds(&topics, cfg.quadrant_stat);
    log::info!(
        "{} hashtags, {} clusters (modularity {:.4}), {} significant topics",
        graph.node_count(),
        partition.len(),
        partition.modularity().unwrap_or(0.0),
        topics.len()
    );
    Ok(TopicStage { graph, partition, topics, thresholds })
}

pub struct InterestStage {
    pub topic_ids: Vec<usize>,
    pub vectors: BTreeMap<String, InterestVector>,
    pub volume: BTreeMap<String, f64>,
}

pub fn interest_stage(cfg: &RunConfig, corpus: &Corpus, topics: &TopicStage) -> InterestStage {
    let selected = topics.interest_topics(cfg.interest_topics);
    let vectors = interest_vectors(corpus, &selected, cfg.interest_options());
    let volume = activity_table(corpus).into_iter().map(|(u, a)| (u, a.mean_daily_volume)).collect();
    InterestStage { topic_ids: selected.iter().map(|t| t.id).collect(), vectors, volume }
}

pub fn influence_stage(cfg: &RunConfig, corpus: &Corpus) -> InfluenceTable {
    let table = compute_influence(corpus, &cfg.pagerank());
    if table.daily_npr.is_empty() {
        log::warn!("corpus holds no retweets; influence table is empty");
    }
    table
}

/// Influencers to scan: the configured list, or the top-k ranking filtered
/// by topical focus.
pub fn select_influencers(cfg: &RunConfig, table: &InfluenceTable, interests: &InterestStage) -> Vec<String> {
    if let Some(list) = &cfg.influencers {
        return list.clone();
    }
    let ranked = top_influentials(&table.influence, cfg.top_k);
    representative_influentials(&ranked, &interests.vectors, cfg.interest_threshold, cfg.focus_filter)
        .into_iter()
        .map(|(u, _)| u)
        .collect()
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<(), ReportError> {
    cfg.validate()?;
    cfg.prepare_out()?;
    let (corpus, truth) = generate_campaign(&cfg.synth)?;
    write_file(&cfg.out.join("tweets.ndjson"), corpus.to_ndjson())?;
    write_file(&cfg.out.join("ground_truth.json"), truth.to_json() + "\n")?;
    log::info!("generated {} tweets into {}", corpus.len(), cfg.out.display());
    Ok(())
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestStats, ReportError> {
    cfg.validate()?;
    cfg.prepare_out()?;
    let (_, stats) = load_input(cfg)?;
    write_file(&cfg.out.join("ingest_stats.json"), stats.to_json() + "\n")?;
    Ok(stats)
}

pub fn write_topics(cfg: &RunConfig, stage: &TopicStage) -> Result<(), ReportError> {
    let mut w = csv_writer(&cfg.out.join("topics.csv"))?;
    w.write_record(["cluster_id", "size", "centrality", "density", "quadrant", "relevant", "top_hashtags"])?;
    let mut labels = Vec::new();
    for t in &stage.topics {
        let top = t.top_hashtags(&stage.graph, 10);
        labels.push(format!("T{} {}", t.id, top.first().copied().unwrap_or("")));
        w.write_record([
            t.id.to_string(),
            t.size.to_string(),
            num(t.centrality),
            num(t.density),
            t.quadrant.map(|q| q.to_string()).unwrap_or_default(),
            t.relevant.to_string(),
            top.join(" "),
        ])?;
    }
    w.flush().map_err(|source| ReportError::Write { path: cfg.out.join("topics.csv"), source })?;
    let stat = match cfg.quadrant_stat {
        ThresholdStat::Mean => "mean",
        ThresholdStat::Median => "median",
    };
    let figure = svg::strategic_diagram(&stage.topics, &labels, stage.thresholds, stat);
    write_file(&cfg.out.join("strategic_diagram.svg"), figure)
}

pub fn cmd_topics(cfg: &RunConfig) -> Result<TopicStage, ReportError> {
    cfg.validate()?;
    cfg.prepare_out()?;
    let (corpus, _) = load_input(cfg)?;
    let stage = topic_stage(cfg, &corpus)?;
    write_topics(cfg, &stage)?;
    Ok(stage)
}

pub fn write_interests(cfg: &RunConfig, corpus: &Corpus, stage: &InterestStage) -> Result<(), ReportError> {
    let path = cfg.out.join("interests.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["user_id".to_owned(), "screen_name".to_owned()];
    header.extend(stage.topic_ids.iter().map(|id| format!("topic_{id}")));
    header.extend(["entropy".to_owned(), "mean_daily_volume".to_owned()]);
    w.write_record(&header)?;
    let names = screen_names(corpus);
    let mut points = Vec::with_capacity(stage.vectors.len());
    for (user, v) in &stage.vectors {
        let entropy = topical_entropy_in(v, cfg.entropy_base);
        let volume = stage.volume.get(user).copied().unwrap_or(0.0);
        points.push((entropy, volume));
        let mut row = vec![user.clone(), names.get(user.as_str()).copied().unwrap_or("").to_owned()];
        row.extend(stage.topic_ids.iter().map(|&id| num(v.get(id))));
        row.extend([num(entropy), num(volume)]);
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| ReportError::Write { path, source })?;
    let figure = svg::entropy_volume(&points, cfg.outlier_entropy, cfg.outlier_volume);
    write_file(&cfg.out.join("entropy_volume.svg"), figure)
}

pub fn cmd_interests(cfg: &RunConfig) -> Result<InterestStage, ReportError> {
    cfg.validate()?;
    cfg.prepare_out()?;
    let (corpus, _) = load_input(cfg)?;
    let topics = topic_stage(cfg, &corpus)?;
    let stage = interest_stage(cfg, &corpus, &topics);
    write_interests(cfg, &corpus, &stage)?;
    Ok(stage)
}

pub fn write_influence(cfg: &RunConfig, corpus: &Corpus, table: &InfluenceTable) -> Result<(), ReportError> {
    let names = screen_names(corpus);
    let mode = table.mode.to_string();
    let path = cfg.out.join("influence.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["rank", "user_id", "screen_name", "inf", "days_active", "mode"])?;
    for (rank, (user, inf)) in top_influentials(&table.influence, usize::MAX).into_iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            user.clone(),
            names.get(user.as_str()).copied().unwrap_or("").to_owned(),
            num(inf),
            table.days_active(&user).to_string(),
            mode.clone(),
        ])?;
    }
    w.flush().map_err(|source| ReportError::Write { path, source })?;

    let path = cfg.out.join("npr_daily.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["day", "user_id", "npr", "mode"])?;
    for (day, npr) in &table.daily_npr {
        for (user, v) in top_influentials(npr, cfg.npr_top_k) {
            w.write_record([day.to_string(), user, num(v), mode.clone()])?;
        }
    }
    w.flush().map_err(|source| ReportError::Write { path, source })?;
    Ok(())
}

pub fn cmd_influence(cfg: &RunConfig) -> Result<InfluenceTable, ReportError> {
    cfg.validate()?;
    cfg.prepare_out()?;
    let (corpus, _) = load_input(cfg)?;
    let table = influence_stage(cfg, &corpus);
    write_influence(cfg, &corpus, &table)?;
    Ok(table)
}

/// Results of a bot scan over a list of influencers.
#[derive(Debug, Clone)]
pub struct BotScan {
    /// Influencers with at least one retweet, in scan order.
    pub influencers: Vec<String>,
    pub ur: BTreeMap<String, f64>,
    pub rows: Vec<BotSignalRow>,
    pub jaccard: Vec<Vec<f64>>,
    pub rj: BTreeMap<String, f64>,
}

impl BotScan {
    /// Per-influencer median transfer entropy of its retweeters.
    pub fn median_te(&self) -> BTreeMap<String, f64> {
        let mut by: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for r in &self.rows {
            by.entry(&r.influencer_id).or_default().push(r.transfer_entropy);
        }
        by.into_iter().filter_map(|(u, v)| botsig::median(&v).map(|m| (u.to_owned(), m))).collect()
    }
}

pub fn botscan_stage(
    cfg: &RunConfig,
    corpus: &Corpus,
    candidates: &[String],
    volume: &BTreeMap<String, f64>,
    influence: &BTreeMap<String, f64>,
) -> Result<BotScan, ReportError> {
    let index = TimeIndex::new(corpus);
    let mut influencers = Vec::new();
    let mut omitted = Vec::new();
    let mut seen = BTreeSet::new();
    for u in candidates {
        if !seen.insert(u.as_str()) {
            continue;
        }
        if index.retweeters_of(u).is_empty() {
            omitted.push(u.as_str());
        } else {
            influencers.push(u.clone());
        }
    }
    if cfg.influencers.is_some() {
        for u in &omitted {
            log::warn!("influencer {u} has no retweeters in the period; omitted");
        }
    } else if !omitted.is_empty() {
        log::info!("{} of {} selected users were never retweeted; omitted from the scan", omitted.len(), seen.len());
    }
    let ur = match cfg.ur_mode {
        UrMode::WholePeriod => {
            let g = build_retweet_graph(corpus);
            influencers
                .iter()
                .map(|u| Ok((u.clone(), botsig::unique_retweet_ratio(&g, u)?)))
                .collect::<Result<BTreeMap<_, _>, BotSigError>>()?
        }
        UrMode::DailyMean => {
            let daily = daily_retweet_graphs(corpus);
            influencers
                .iter()
                .map(|u| Ok((u.clone(), botsig::unique_retweet_ratio_daily_mean(&daily, u)?)))
                .collect::<Result<BTreeMap<_, _>, BotSigError>>()?
        }
    };
    let rows = bot_signal_rows(&index, &influencers, volume, influence, &cfg.direct_influence())?;
    let sets: BTreeMap<String, BTreeSet<String>> =
        influencers.iter().map(|u| (u.clone(), index.retweeter_set(u))).collect();
    let jaccard = botsig::jaccard_matrix(&influencers, &sets);
    let mut rj = BTreeMap::new();
    if influencers.len() > 1 {
        for u in &influencers {
            rj.insert(u.clone(), retweet_jaccard(u, &influencers, &sets)?);
        }
    }
    Ok(BotScan { influencers, ur, rows, jaccard, rj })
}

/// Influencer ids made safe for file names.
pub fn file_stem(user: &str) -> String {
    user.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn write_botscan(cfg: &RunConfig, corpus: &Corpus, scan: &BotScan) -> Result<(), ReportError> {
    let names = screen_names(corpus);
    let path = cfg.out.join("ur.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["influencer", "screen_name", "ur", "unique_retweeters", "total_retweets"])?;
    let mut ranked: Vec<(&String, &f64)> = scan.ur.iter().collect();
    ranked.sort_by(|a, b| a.1.total_cmp(b.1).then_with(|| a.0.cmp(b.0)));
    let index = TimeIndex::new(corpus);
    for (u, v) in ranked {
        let retweeters = index.retweeters_of(u);
        w.write_record([
            u.clone(),
            names.get(u.as_str()).copied().unwrap_or("").to_owned(),
            num(*v),
            retweeters.len().to_string(),
            retweeters.values().sum::<u64>().to_string(),
        ])?;
    }
    w.flush().map_err(|source| ReportError::Write { path, source })?;

    let path = cfg.out.join("botsig.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "influencer_id",
        "retweeter_id",
        "retweet_count",
        "transfer_entropy",
        "mean_daily_volume",
        "multi_influencer",
        "retweeter_inf",
    ])?;
    for r in &scan.rows {
        w.write_record([
            r.influencer_id.clone(),
            r.retweeter_id.clone(),
            r.retweet_count.to_string(),
            num(r.transfer_entropy),
            num(r.mean_daily_volume),
            r.retweets_multiple_influencers.to_string(),
            num(r.retweeter_inf),
        ])?;
    }
    w.flush().map_err(|source| ReportError::Write { path, source })?;

    let path = cfg.out.join("te_summary.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["influencer", "retweeters", "min", "q25", "median", "q75", "max"])?;
    let mut by: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in &scan.rows {
        by.entry(&r.influencer_id).or_default().push(r.transfer_entropy);
    }
    for u in &scan.influencers {
        let Some(v) = by.get(u.as_str()) else { continue };
        let mut row = vec![u.clone(), v.len().to_string()];
        row.extend([0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&q| num(quantile(v, q).unwrap_or(0.0))));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| ReportError::Write { path, source })?;

    let path = cfg.out.join("jaccard.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["influencer".to_owned()];
    header.extend(scan.influencers.iter().cloned());
    w.write_record(&header)?;
    for (u, row) in scan.influencers.iter().zip(&scan.jaccard) {
        let mut rec = vec![u.clone()];
        rec.extend(row.iter().map(|&v| num(v)));
        w.write_record(&rec)?;
    }
    let mut rj_row = vec!["RJ".to_owned()];
    rj_row.extend(scan.influencers.iter().map(|u| scan.rj.get(u).map(|&v| num(v)).unwrap_or_default()));
    w.write_record(&rj_row)?;
    w.flush().map_err(|source| ReportError::Write { path, source })?;

    for (i, u) in scan.influencers.iter().enumerate() {
        let points = retweeter_scatter_data(u, &scan.rows, cfg.volume_threshold, cfg.seed.wrapping_add(i as u64));
        let figure = svg::retweeter_scatter(u, &points);
        write_file(&cfg.out.join(format!("scatter_{}.svg", file_stem(u))), figure)?;
    }
    Ok(())
}

pub fn cmd_botscan(cfg: &RunConfig) -> Result<BotScan, ReportError> {
    cfg.validate()?;
    cfg.prepare_out()?;
    let (corpus, _) = load_input(cfg)?;
    let table = influence_stage(cfg, &corpus);
    let volume: BTreeMap<String, f64> =
        activity_table(&corpus).into_iter().map(|(u, a)| (u, a.mean_daily_volume)).collect();
    let candidates = match &cfg.influencers {
        Some(list) => list.clone(),
        None => {
            let topics = topic_stage(cfg, &corpus)?;
            let interests = interest_stage(cfg, &corpus, &topics);
            select_influencers(cfg, &table, &interests)
        }
    };
    let scan = botscan_stage(cfg, &corpus, &candidates, &volume, &table.influence)?;
    write_botscan(cfg, &corpus, &scan)?;
    Ok(scan)
}

/// Every analysis stage in one pass over the input.
pub fn cmd_report(cfg: &RunConfig) -> Result<(), ReportError> {
    cfg.validate()?;
    cfg.prepare_out()?;
    let (corpus, stats) = load_input(cfg)?;
    write_file(&cfg.out.join("ingest_stats.json"), stats.to_json() + "\n")?;
    let topics = topic_stage(cfg, &corpus)?;
    write_topics(cfg, &topics)?;
    let interests = interest_stage(cfg, &corpus, &topics);
    write_interests(cfg, &corpus, &interests)?;
    let table = influence_stage(cfg, &corpus);
    write_influence(cfg, &corpus, &table)?;
    let candidates = select_influencers(cfg, &table, &interests);
    let scan = botscan_stage(cfg, &corpus, &candidates, &interests.volume, &table.influence)?;
    write_botscan(cfg, &corpus, &scan)
}
