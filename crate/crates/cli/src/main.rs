use std::path::PathBuf;
use std::process::ExitCode;

use campaignminer::influence::PageRankMode;
use campaignminer::report::{self, ReportError, RunConfig};
use campaignminer::topic::ThresholdStat;
use clap::{Parser, Subcommand, ValueEnum};

/// Mine a tweet campaign for topics, influential users and bot footprints.
#[derive(Parser, Debug)]
#[command(name = "campaignminer", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration. Flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Newline-delimited JSON tweets.
    #[arg(long, short, global = true)]
    input: Option<PathBuf>,

    /// Analysis period, `YYYY-MM-DD..YYYY-MM-DD` (UTC, inclusive).
    #[arg(long, global = true)]
    period: Option<String>,

    /// Seed for clustering order, plot layouts and the generator.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    /// PageRank variant.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,

    /// Quadrant threshold statistic for the strategic diagram.
    #[arg(long, global = true, value_enum)]
    quadrant_stat: Option<StatArg>,

    /// Users ranked before the topical-focus filter.
    #[arg(long, global = true)]
    top_k: Option<usize>,

    /// Comma-separated influencers for `botscan` (skips auto selection).
    #[arg(long, global = true, value_delimiter = ',')]
    influencers: Option<Vec<String>>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, short = 'j', global = true)]
    threads: Option<usize>,

    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Generate a synthetic campaign (tweets.ndjson, ground_truth.json).
    Synth,
    /// Parse the input and report ingest statistics.
    Ingest,
    /// Hashtag topics and the strategic diagram.
    Topics,
    /// Per-user topical interest, entropy and volume.
    Interests,
    /// Daily PageRank and the influence ranking.
    Influence,
    /// Unique retweet ratio, transfer entropy and retweet overlap.
    Botscan,
    /// All analysis stages in one pass.
    Report,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModeArg {
    Stochastic,
    PaperVerbatim,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum StatArg {
    Mean,
    Median,
}

impl Cli {
    /// Defaults, then the config file, then flags.
    fn run_config(&self) -> Result<RunConfig, ReportError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            cfg.input = Some(v.clone());
        }
        if let Some(v) = &self.period {
            cfg.period = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
            cfg.synth.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.mode {
            cfg.mode = match v {
                ModeArg::Stochastic => PageRankMode::Stochastic,
                ModeArg::PaperVerbatim => PageRankMode::PaperVerbatim,
            };
        }
        if let Some(v) = self.quadrant_stat {
            cfg.quadrant_stat = match v {
                StatArg::Mean => ThresholdStat::Mean,
                StatArg::Median => ThresholdStat::Median,
            };
        }
        if let Some(v) = self.top_k {
            cfg.top_k = v;
        }
        if let Some(v) = &self.influencers {
            cfg.influencers = Some(v.iter().map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect());
        }
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<(), ReportError> {
    let cfg = cli.run_config()?;
    match cli.command {
        Command::Synth => report::cmd_synth(&cfg),
        Command::Ingest => {
            let stats = report::cmd_ingest(&cfg)?;
            println!("{}", stats.to_json());
            Ok(())
        }
        Command::Topics => report::cmd_topics(&cfg).map(drop),
        Command::Interests => report::cmd_interests(&cfg).map(drop),
        Command::Influence => report::cmd_influence(&cfg).map(drop),
        Command::Botscan => report::cmd_botscan(&cfg).map(drop),
        Command::Report => report::cmd_report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
