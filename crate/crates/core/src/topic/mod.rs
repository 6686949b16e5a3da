//! Hashtag co-occurrence topics: graph construction, Louvain clustering,
//! H-index topic selection and the centrality/density strategic diagram.

mod louvain;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Corpus;

pub use louvain::LouvainConfig;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopicError {
    #[error("hashtag graph has no nodes")]
    EmptyGraph,
    #[error("topic cluster is empty")]
    EmptyCluster,
    #[error("hashtag {0:?} is not in the graph")]
    UnknownHashtag(String),
    #[error("partition does not match the graph: {0}")]
    PartitionMismatch(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

/// Undirected co-occurrence graph. Nodes are kept in lexicographic order and
/// edge weights count the tweets in which both hashtags appear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashtagGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    /// Number of tweets using each hashtag.
    frequency: Vec<u64>,
    adjacency: Vec<BTreeMap<usize, u64>>,
}

impl HashtagGraph {
    /// Builds the graph from per-tweet hashtag lists. Lists are expected to be
    /// de-duplicated; repeated entries within one list are ignored.
    pub fn from_hashtag_sets<'a, I>(tweets: I) -> Self
    where
        I: IntoParallelIterator<Item = &'a [String]>,
        I::Iter: Clone,
    {
        let tweets = tweets.into_par_iter();
        let nodes: BTreeSet<&str> = tweets
            .clone()
            .fold(BTreeSet::new, |mut acc, tags| {
                acc.extend(tags.iter().map(String::as_str));
                acc
            })
            .reduce(BTreeSet::new, |mut a, b| {
                a.extend(b);
                a
            });
        let nodes: Vec<String> = nodes.into_iter().map(str::to_owned).collect();
        let index: HashMap<String, usize> = nodes.iter().cloned().enumerate().map(|(i, h)| (h, i)).collect();

        let (frequency, pairs) = tweets
            .fold(
                || (HashMap::<usize, u64>::new(), HashMap::<(usize, usize), u64>::new()),
                |(mut freq, mut pairs), tags| {
                    let mut ids: Vec<usize> = tags.iter().map(|t| index[t.as_str()]).collect();
                    ids.sort_unstable();
                    ids.dedup();
                    for (k, &a) in ids.iter().enumerate() {
                        *freq.entry(a).or_default() += 1;
                        for &b in &ids[k + 1..] {
                            *pairs.entry((a, b)).or_default() += 1;
                        }
                    }
                    (freq, pairs)
                },
            )
            .reduce(
                || (HashMap::new(), HashMap::new()),
                |(mut fa, mut pa), (fb, pb)| {
                    for (k, v) in fb {
                        *fa.entry(k).or_default() += v;
                    }
                    for (k, v) in pb {
                        *pa.entry(k).or_default() += v;
                    }
                    (fa, pa)
                },
            );

        let mut freq_vec = vec![0; nodes.len()];
        for (i, f) in frequency {
            freq_vec[i] = f;
        }
        let mut adjacency = vec![BTreeMap::new(); nodes.len()];
        for ((a, b), w) in pairs {
            adjacency[a].insert(b, w);
            adjacency[b].insert(a, w);
        }
        Self { nodes, index, frequency: freq_vec, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Hashtags in lexicographic order.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn contains(&self, hashtag: &str) -> bool {
        self.index.contains_key(hashtag)
    }

    pub fn frequency(&self, hashtag: &str) -> u64 {
        self.index.get(hashtag).map_or(0, |&i| self.frequency[i])
    }

    /// Co-occurrence count; 0 when the pair never appears together.
    pub fn weight(&self, a: &str, b: &str) -> u64 {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.adjacency[i].get(&j).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Binary co-occurrence indicator.
    pub fn linked(&self, a: &str, b: &str) -> bool {
        self.weight(a, b) > 0
    }

    /// Sum of edge weights (each unordered pair once).
    pub fn total_weight(&self) -> u64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Unordered edges `(a, b, w)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(move |(i, nbrs)| {
            nbrs.range(i + 1..).map(move |(&j, &w)| (self.nodes[i].as_str(), self.nodes[j].as_str(), w))
        })
    }

    pub fn neighbors<'a>(&'a self, hashtag: &str) -> impl Iterator<Item = (&'a str, u64)> + 'a {
        let nbrs = self.index.get(hashtag).map(|&i| &self.adjacency[i]);
        nbrs.into_iter().flatten().map(move |(&j, &w)| (self.nodes[j].as_str(), w))
    }

    /// Subgraph induced by hashtags used in at least `min_frequency` tweets.
    pub fn with_min_frequency(&self, min_frequency: u64) -> Self {
        if min_frequency <= 1 {
            return self.clone();
        }
        let keep: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.frequency[i] >= min_frequency).collect();
        let remap: HashMap<usize, usize> = keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let nodes: Vec<String> = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let index = nodes.iter().cloned().enumerate().map(|(i, h)| (h, i)).collect();
        let frequency = keep.iter().map(|&i| self.frequency[i]).collect();
        let adjacency = keep
            .iter()
            .map(|&i| {
                self.adjacency[i]
                    .iter()
                    .filter_map(|(j, &w)| remap.get(j).map(|&nj| (nj, w)))
                    .collect()
            })
            .collect();
        Self { nodes, index, frequency, adjacency }
    }

    fn index_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        self.adjacency
            .iter()
            .map(|nbrs| nbrs.iter().map(|(&j, &w)| (j, w as f64)).collect())
            .collect()
    }
}

pub fn build_hashtag_graph(corpus: &Corpus) -> HashtagGraph {
    let tags: Vec<&[String]> = corpus.records().iter().map(|r| r.hashtags.as_slice()).collect();
    HashtagGraph::from_hashtag_sets(tags)
}

/// A disjoint cover of the graph's hashtags.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    assignment: BTreeMap<String, usize>,
    clusters: BTreeMap<usize, BTreeSet<String>>,
    modularity: Option<f64>,
    level_modularity: Vec<f64>,
}

impl Partition {
    /// Numbers `groups` in the given order. Groups must be nonempty and
    /// pairwise disjoint.
    pub fn from_groups<I, G, S>(groups: I) -> Result<Self, TopicError>
    where
        I: IntoIterator<Item = G>,
        G: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut assignment = BTreeMap::new();
        let mut clusters = BTreeMap::new();
        for (id, group) in groups.into_iter().enumerate() {
            let members: BTreeSet<String> = group.into_iter().map(Into::into).collect();
            if members.is_empty() {
                return Err(TopicError::InvalidPartition(format!("cluster {id} is empty")));
            }
            for h in &members {
                if assignment.insert(h.clone(), id).is_some() {
                    return Err(TopicError::InvalidPartition(format!("{h:?} appears in two clusters")));
                }
            }
            clusters.insert(id, members);
        }
        Ok(Self { assignment, clusters, modularity: None, level_modularity: Vec::new() })
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }

    pub fn clusters(&self) -> &BTreeMap<usize, BTreeSet<String>> {
        &self.clusters
    }

    pub fn cluster_of(&self, hashtag: &str) -> Option<usize> {
        self.assignment.get(hashtag).copied()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Modularity recorded when the partition came out of Louvain.
    pub fn modularity(&self) -> Option<f64> {
        self.modularity
    }

    /// Modularity of the all-singletons start followed by one value per
    /// Louvain level. Empty for hand-built partitions.
    pub fn level_modularity(&self) -> &[f64] {
        &self.level_modularity
    }
}

/// Weighted Newman-Girvan modularity at resolution 1. A graph without edges
/// has modularity 0.
pub fn modularity(graph: &HashtagGraph, partition: &Partition) -> Result<f64, TopicError> {
    modularity_with_resolution(graph, partition, 1.0)
}

pub fn modularity_with_resolution(
    graph: &HashtagGraph,
    partition: &Partition,
    resolution: f64,
) -> Result<f64, TopicError> {
    let mut comm = Vec::with_capacity(graph.node_count());
    for h in graph.nodes() {
        comm.push(
            partition
                .cluster_of(h)
                .ok_or_else(|| TopicError::PartitionMismatch(format!("{h:?} is unassigned")))?,
        );
    }
    let two_m = 2.0 * graph.total_weight() as f64;
    if two_m == 0.0 {
        return Ok(0.0);
    }
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut total: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, nbrs) in graph.adjacency.iter().enumerate() {
        for (&j, &w) in nbrs {
            *total.entry(comm[i]).or_default() += w as f64;
            if comm[i] == comm[j] {
                *internal.entry(comm[i]).or_default() += w as f64;
            }
        }
    }
    Ok(total
        .iter()
        .map(|(c, tot)| internal.get(c).copied().unwrap_or(0.0) / two_m - resolution * (tot / two_m).powi(2))
        .sum())
}

/// Clusters the graph with Louvain. Cluster ids are assigned by decreasing
/// size, ties broken by the lexicographically smallest member.
pub fn louvain_partition(graph: &HashtagGraph, config: &LouvainConfig) -> Result<Partition, TopicError> {
    if graph.is_empty() {
        return Err(TopicError::EmptyGraph);
    }
    let outcome = louvain::louvain(graph.index_adjacency(), config);
    let mut groups: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (i, &c) in outcome.membership.iter().enumerate() {
        groups.entry(c).or_default().push(graph.nodes[i].as_str());
    }
    let mut groups: Vec<Vec<&str>> = groups.into_values().collect();
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(b[0])));
    let mut partition = Partition::from_groups(groups)?;
    partition.modularity = Some(modularity_with_resolution(graph, &partition, config.resolution)?);
    partition.level_modularity = outcome.level_modularity;
    Ok(partition)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quadrant {
    /// High-centrality quadrants.
    pub fn is_relevant(self) -> bool {
        matches!(self, Quadrant::Q1 | Quadrant::Q4)
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quadrant::Q1 => "Q1",
            Quadrant::Q2 => "Q2",
            Quadrant::Q3 => "Q3",
            Quadrant::Q4 => "Q4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicCluster {
    pub id: usize,
    pub hashtags: BTreeSet<String>,
    pub size: usize,
    pub centrality: f64,
    pub density: f64,
    /// `None` until [`strategic_quadrants`] has run.
    pub quadrant: Option<Quadrant>,
    pub relevant: bool,
}

impl TopicCluster {
    pub fn new(id: usize, hashtags: BTreeSet<String>) -> Self {
        Self { id, size: hashtags.len(), hashtags, centrality: 0.0, density: 0.0, quadrant: None, relevant: false }
    }

    /// Members sorted by tweet frequency (descending), then name.
    pub fn top_hashtags<'a>(&'a self, graph: &HashtagGraph, n: usize) -> Vec<&'a str> {
        let mut tags: Vec<&str> = self.hashtags.iter().map(String::as_str).collect();
        tags.sort_by(|a, b| graph.frequency(b).cmp(&graph.frequency(a)).then_with(|| a.cmp(b)));
        tags.truncate(n);
        tags
    }
}

/// Largest `n` such that at least `n` of the sizes are `>= n`.
pub fn h_index(sizes: &[usize]) -> usize {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted.iter().enumerate().take_while(|&(i, &s)| s > i).count()
}

/// The `N` largest clusters, where `N` is the H-index of the cluster sizes.
/// Ties in size go to the smaller cluster id.
pub fn select_significant_topics(partition: &Partition) -> Vec<TopicCluster> {
    let sizes: Vec<usize> = partition.clusters().values().map(BTreeSet::len).collect();
    let n = h_index(&sizes);
    let mut ranked: Vec<(&usize, &BTreeSet<String>)> = partition.clusters().iter().collect();
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().take(n).map(|(&id, tags)| TopicCluster::new(id, tags.clone())).collect()
}

fn check_cluster(cluster: &BTreeSet<String>, graph: &HashtagGraph) -> Result<Vec<usize>, TopicError> {
    if cluster.is_empty() {
        return Err(TopicError::EmptyCluster);
    }
    cluster
        .iter()
        .map(|h| graph.index.get(h).copied().ok_or_else(|| TopicError::UnknownHashtag(h.clone())))
        .collect()
}

/// Share of possible cluster-to-outside hashtag pairs that co-occur at least
/// once. Returns 0 when the cluster spans every hashtag.
pub fn topic_centrality(cluster: &BTreeSet<String>, graph: &HashtagGraph) -> Result<f64, TopicError> {
    let members = check_cluster(cluster, graph)?;
    let outside = graph.node_count() - members.len();
    if outside == 0 {
        return Ok(0.0);
    }
    let member_set: BTreeSet<usize> = members.iter().copied().collect();
    let cross: usize = members
        .iter()
        .map(|&i| graph.adjacency[i].keys().filter(|j| !member_set.contains(j)).count())
        .sum();
    Ok(cross as f64 / (outside * members.len()) as f64)
}

/// How internal edges are counted by [`topic_density`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityConvention {
    /// Sum over ordered pairs: each internal edge counts twice.
    #[default]
    OrderedPairs,
    /// Each internal edge counts once.
    Halved,
}

/// Internal binary edges per member beyond the first. Singleton clusters
/// have density 0.
pub fn topic_density(
    cluster: &BTreeSet<String>,
    graph: &HashtagGraph,
    convention: DensityConvention,
) -> Result<f64, TopicError> {
    let members = check_cluster(cluster, graph)?;
    if members.len() == 1 {
        return Ok(0.0);
    }
    let member_set: BTreeSet<usize> = members.iter().copied().collect();
    let ordered: usize = members
        .iter()
        .map(|&i| graph.adjacency[i].keys().filter(|j| member_set.contains(j)).count())
        .sum();
    let internal = match convention {
        DensityConvention::OrderedPairs => ordered as f64,
        DensityConvention::Halved => ordered as f64 / 2.0,
    };
    Ok(internal / (members.len() - 1) as f64)
}

/// Fills in centrality and density for each topic.
pub fn annotate_topics(
    topics: &mut [TopicCluster],
    graph: &HashtagGraph,
    convention: DensityConvention,
) -> Result<(), TopicError> {
    for t in topics.iter_mut() {
        t.centrality = topic_centrality(&t.hashtags, graph)?;
        t.density = topic_density(&t.hashtags, graph, convention)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdStat {
    #[default]
    Mean,
    Median,
}

impl ThresholdStat {
    pub fn apply(self, values: &[f64]) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Rounding in the mean can land just outside [lo, hi] when all values
        // are equal.
        let v = match self {
            ThresholdStat::Mean => values.iter().sum::<f64>() / values.len() as f64,
            ThresholdStat::Median => {
                let mut v = values.to_vec();
                v.sort_by(f64::total_cmp);
                let mid = v.len() / 2;
                if v.len() % 2 == 1 {
                    v[mid]
                } else {
                    (v[mid - 1] + v[mid]) / 2.0
                }
            }
        };
        v.clamp(lo, hi)
    }
}

/// Centrality and density cut lines of the strategic diagram.
pub fn quadrant_thresholds(topics: &[TopicCluster], stat: ThresholdStat) -> (f64, f64) {
    let cen: Vec<f64> = topics.iter().map(|t| t.centrality).collect();
    let den: Vec<f64> = topics.iter().map(|t| t.density).collect();
    (stat.apply(&cen), stat.apply(&den))
}

/// Places each topic in a quadrant. Values at a threshold count as high.
pub fn strategic_quadrants(mut topics: Vec<TopicCluster>, stat: ThresholdStat) -> Vec<TopicCluster> {
    let (c_bar, d_bar) = quadrant_thresholds(&topics, stat);
    for t in topics.iter_mut() {
        let q = match (t.centrality >= c_bar, t.density >= d_bar) {
            (true, true) => Quadrant::Q1,
            (true, false) => Quadrant::Q4,
            (false, true) => Quadrant::Q2,
            (false, false) => Quadrant::Q3,
        };
        t.quadrant = Some(q);
        t.relevant = q.is_relevant();
    }
    topics
}
