//! Python bindings. Results come back as plain dicts, lists and floats;
//! failures raise `ValueError`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Cursor;

use ::campaignminer::botsig::{self, TimeIndex};
use ::campaignminer::influence::{self, PageRankConfig, PageRankMode, RetweetGraph};
use ::campaignminer::ingest::{self, Period};
use ::campaignminer::interest::{self, InterestVector, LogBase};
use ::campaignminer::report::{self, RunConfig};
use ::campaignminer::synth::{self, SynthConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn run_config(config_json: Option<&str>) -> PyResult<RunConfig> {
    let cfg: RunConfig = match config_json {
        Some(text) => serde_json::from_str(text).map_err(value_err)?,
        None => RunConfig::default(),
    };
    cfg.validate().map_err(value_err)?;
    Ok(cfg)
}

fn pagerank_config(beta: f64, mode: &str) -> PyResult<PageRankConfig> {
    let mode: PageRankMode = mode.parse().map_err(value_err)?;
    Ok(PageRankConfig { beta, mode, ..PageRankConfig::default() })
}

/// A time-sorted, de-duplicated set of tweets over an analysis period.
#[pyclass(frozen, module = "campaignminer")]
struct Corpus {
    inner: ingest::Corpus,
}

#[pymethods]
impl Corpus {
    /// Parses newline-delimited JSON. With `period` (`YYYY-MM-DD..YYYY-MM-DD`)
    /// tweets outside it are dropped; otherwise the period spans the data.
    /// Returns `(corpus, stats)`.
    #[staticmethod]
    #[pyo3(signature = (text, period=None))]
    fn from_ndjson<'py>(py: Python<'py>, text: &str, period: Option<&str>) -> PyResult<(Corpus, Bound<'py, PyAny>)> {
        let reader = Cursor::new(text.as_bytes());
        let (inner, stats) = match period {
            Some(p) => {
                let period: Period = p.parse().map_err(value_err)?;
                ingest::load_corpus(reader, period).map_err(value_err)?
            }
            None => ingest::load_corpus_spanning(reader)
                .map_err(value_err)?
                .ok_or_else(|| PyValueError::new_err("empty corpus"))?,
        };
        Ok((Corpus { inner }, json_to_py(py, &stats.to_json())?))
    }

    /// Reads a tweet file; see `from_ndjson`.
    #[staticmethod]
    #[pyo3(signature = (path, period=None))]
    fn load<'py>(py: Python<'py>, path: &str, period: Option<&str>) -> PyResult<(Corpus, Bound<'py, PyAny>)> {
        let text = std::fs::read_to_string(path).map_err(value_err)?;
        Self::from_ndjson(py, &text, period)
    }

    fn to_ndjson(&self) -> String {
        self.inner.to_ndjson()
    }

    #[getter]
    fn period(&self) -> String {
        self.inner.period().to_string()
    }

    /// Distinct authors, sorted.
    fn users(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.inner.records().iter().map(|r| r.user_id.as_str()).collect();
        set.into_iter().map(str::to_owned).collect()
    }

    fn retweet_count(&self) -> usize {
        self.inner.records().iter().filter(|r| r.is_retweet()).count()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Corpus({} tweets, {})", self.inner.len(), self.inner.period())
    }
}

/// Synthetic campaign with planted topics, influencers and bot farms.
/// `config_json` overrides generator defaults. Returns `(corpus, truth)`.
#[pyfunction]
#[pyo3(signature = (seed=0, config_json=None))]
fn generate_campaign<'py>(py: Python<'py>, seed: u64, config_json: Option<&str>) -> PyResult<(Corpus, Bound<'py, PyAny>)> {
    let mut cfg: SynthConfig = match config_json {
        Some(text) => serde_json::from_str(text).map_err(value_err)?,
        None => SynthConfig::default(),
    };
    cfg.seed = seed;
    let (inner, truth) = py.detach(|| synth::generate_campaign(&cfg)).map_err(value_err)?;
    Ok((Corpus { inner }, json_to_py(py, &truth.to_json())?))
}

/// Significant topics as dicts with id, size, centrality, density, quadrant,
/// relevant and hashtags (most frequent first).
#[pyfunction]
#[pyo3(signature = (corpus, config_json=None))]
fn topics<'py>(py: Python<'py>, corpus: &Corpus, config_json: Option<&str>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = run_config(config_json)?;
    let stage = report::topic_stage(&cfg, &corpus.inner).map_err(value_err)?;
    stage
        .topics
        .iter()
        .map(|t| {
            let d = PyDict::new(py);
            d.set_item("id", t.id)?;
            d.set_item("size", t.size)?;
            d.set_item("centrality", t.centrality)?;
            d.set_item("density", t.density)?;
            d.set_item("quadrant", t.quadrant.map(|q| q.to_string()))?;
            d.set_item("relevant", t.relevant)?;
            d.set_item("hashtags", t.top_hashtags(&stage.graph, usize::MAX))?;
            Ok(d)
        })
        .collect()
}

/// Per-user interest in each relevant topic: `{user: {topic_id: value}}`.
#[pyfunction]
#[pyo3(signature = (corpus, config_json=None))]
fn interests(corpus: &Corpus, config_json: Option<&str>) -> PyResult<BTreeMap<String, BTreeMap<usize, f64>>> {
    let cfg = run_config(config_json)?;
    let stage = report::topic_stage(&cfg, &corpus.inner).map_err(value_err)?;
    let interests = report::interest_stage(&cfg, &corpus.inner, &stage);
    Ok(interests.vectors.into_iter().map(|(u, v)| (u, v.interests)).collect())
}

/// Shannon entropy of an interest vector, natural log unless `base` is 2.
#[pyfunction]
#[pyo3(signature = (values, base=None))]
fn topical_entropy(values: Vec<f64>, base: Option<u32>) -> PyResult<f64> {
    let base = match base {
        None => LogBase::Natural,
        Some(2) => LogBase::Two,
        Some(b) => return Err(PyValueError::new_err(format!("unsupported log base {b}"))),
    };
    let v = InterestVector {
        user_id: String::new(),
        interests: values.into_iter().enumerate().collect(),
        total_hashtag_usages: 0,
    };
    Ok(interest::topical_entropy_in(&v, base))
}

/// PageRank over `(retweeter, retweeted, count)` triples.
#[pyfunction]
#[pyo3(signature = (edges, beta=0.85, mode="stochastic"))]
fn pagerank(edges: Vec<(String, String, u64)>, beta: f64, mode: &str) -> PyResult<BTreeMap<String, f64>> {
    let cfg = pagerank_config(beta, mode)?;
    let graph = RetweetGraph::from_counts(edges.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), *c)), "edges");
    influence::pagerank_day(&graph, &cfg).map_err(value_err)
}

/// Mean normalised daily PageRank per user over every day of the period.
#[pyfunction]
#[pyo3(signature = (corpus, beta=0.85, mode="stochastic"))]
fn influence_scores(py: Python<'_>, corpus: &Corpus, beta: f64, mode: &str) -> PyResult<BTreeMap<String, f64>> {
    let cfg = pagerank_config(beta, mode)?;
    Ok(py.detach(|| influence::compute_influence(&corpus.inner, &cfg)).influence)
}

/// The `k` highest scores, ties broken by user id.
#[pyfunction]
#[pyo3(signature = (scores, k=100))]
fn top_influentials(scores: BTreeMap<String, f64>, k: usize) -> Vec<(String, f64)> {
    influence::top_influentials(&scores, k)
}

/// Distinct retweeters of `user` divided by its retweets.
#[pyfunction]
fn unique_retweet_ratio(corpus: &Corpus, user: &str) -> PyResult<f64> {
    let graph = influence::build_retweet_graph(&corpus.inner);
    botsig::unique_retweet_ratio(&graph, user).map_err(value_err)
}

/// Transfer entropy from `source` to `target` in nats.
#[pyfunction]
#[pyo3(signature = (source, target, k=1, l=1))]
fn transfer_entropy(source: Vec<bool>, target: Vec<bool>, k: usize, l: usize) -> PyResult<f64> {
    botsig::transfer_entropy(&source, &target, k, l).map_err(value_err)
}

/// Transfer entropy from `influencer` to each of its retweeters.
#[pyfunction]
#[pyo3(signature = (corpus, influencer, config_json=None))]
fn direct_retweeter_influence(corpus: &Corpus, influencer: &str, config_json: Option<&str>) -> PyResult<BTreeMap<String, f64>> {
    let cfg = run_config(config_json)?;
    let index = TimeIndex::new(&corpus.inner);
    index.direct_retweeter_influence(influencer, &cfg.direct_influence()).map_err(value_err)
}

/// `|a ∩ b| / |a ∪ b|`, zero when both are empty.
#[pyfunction]
fn pairwise_jaccard(a: BTreeSet<String>, b: BTreeSet<String>) -> f64 {
    botsig::pairwise_jaccard(&a, &b)
}

/// Mean retweeter overlap of each influencer with the others.
#[pyfunction]
fn retweet_jaccard(corpus: &Corpus, influencers: Vec<String>) -> PyResult<BTreeMap<String, f64>> {
    let index = TimeIndex::new(&corpus.inner);
    let sets: BTreeMap<String, BTreeSet<String>> =
        influencers.iter().map(|u| (u.clone(), index.retweeter_set(u))).collect();
    influencers
        .iter()
        .map(|u| Ok((u.clone(), botsig::retweet_jaccard(u, &influencers, &sets).map_err(value_err)?)))
        .collect()
}

/// Runs a CLI command (`synth`, `ingest`, `topics`, `interests`,
/// `influence`, `botscan` or `report`) with a JSON run configuration.
#[pyfunction]
fn run(py: Python<'_>, command: &str, config_json: &str) -> PyResult<()> {
    let cfg: RunConfig = serde_json::from_str(config_json).map_err(value_err)?;
    let result = py.detach(|| match command {
        "synth" => Some(report::cmd_synth(&cfg)),
        "ingest" => Some(report::cmd_ingest(&cfg).map(drop)),
        "topics" => Some(report::cmd_topics(&cfg).map(drop)),
        "interests" => Some(report::cmd_interests(&cfg).map(drop)),
        "influence" => Some(report::cmd_influence(&cfg).map(drop)),
        "botscan" => Some(report::cmd_botscan(&cfg).map(drop)),
        "report" => Some(report::cmd_report(&cfg)),
        _ => None,
    });
    match result {
        Some(r) => r.map_err(value_err),
        None => Err(PyValueError::new_err(format!("unknown command {command:?}"))),
    }
}

#[pymodule]
fn campaignminer(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Corpus>()?;
    m.add_function(wrap_pyfunction!(generate_campaign, m)?)?;
    m.add_function(wrap_pyfunction!(topics, m)?)?;
    m.add_function(wrap_pyfunction!(interests, m)?)?;
    m.add_function(wrap_pyfunction!(topical_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(pagerank, m)?)?;
    m.add_function(wrap_pyfunction!(influence_scores, m)?)?;
    m.add_function(wrap_pyfunction!(top_influentials, m)?)?;
    m.add_function(wrap_pyfunction!(unique_retweet_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(direct_retweeter_influence, m)?)?;
    m.add_function(wrap_pyfunction!(pairwise_jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(retweet_jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
