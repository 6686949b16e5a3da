//! Weighted Louvain modularity optimization.
//!
//! Two phases per level: local node moves until no move gains at least
//! `min_gain` modularity, then aggregation of each community into a single
//! node. Levels repeat until a local phase moves nothing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LouvainConfig {
    pub resolution: f64,
    pub min_gain: f64,
    pub seed: u64,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        Self { resolution: 1.0, min_gain: 1e-7, seed: 0 }
    }
}

/// Output of a run over an index-labelled graph.
#[derive(Debug, Clone)]
pub(crate) struct LouvainOutcome {
    /// Community index per original node, numbered by first appearance.
    pub membership: Vec<usize>,
    /// Modularity of the singleton start followed by one entry per level.
    pub level_modularity: Vec<f64>,
}

/// Adjacency with explicit self-loops. `self_loops[i]` holds the weight of
/// ordered internal pairs folded into node `i` (twice the internal edge
/// weight), so that `degree[i] = Σ_j adj[i][j] + self_loops[i]`.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
}

impl LevelGraph {
    fn new(adj: Vec<Vec<(usize, f64)>>, self_loops: Vec<f64>) -> Self {
        let degree = adj
            .iter()
            .zip(&self_loops)
            .map(|(nbrs, &l)| nbrs.iter().map(|&(_, w)| w).sum::<f64>() + l)
            .collect();
        Self { adj, self_loops, degree }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn modularity(&self, comm: &[usize], two_m: f64, resolution: f64) -> f64 {
        if two_m <= 0.0 {
            return 0.0;
        }
        let n_comm = comm.iter().max().map_or(0, |&c| c + 1);
        let mut internal = vec![0.0; n_comm];
        let mut total = vec![0.0; n_comm];
        for i in 0..self.len() {
            let c = comm[i];
            total[c] += self.degree[i];
            internal[c] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                if comm[j] == c {
                    internal[c] += w;
                }
            }
        }
        internal
            .iter()
            .zip(&total)
            .map(|(&inn, &tot)| inn / two_m - resolution * (tot / two_m).powi(2))
            .sum()
    }

    /// Greedy local moving. Returns the (renumbered) community of each node
    /// and whether any node moved.
    fn local_moves(&self, order: &[usize], two_m: f64, cfg: &LouvainConfig) -> (Vec<usize>, bool) {
        let n = self.len();
        let m = two_m / 2.0;
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.degree.clone();
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;

        loop {
            let mut moved = false;
            for &i in order {
                let k_i = self.degree[i];
                if k_i == 0.0 {
                    continue;
                }
                let own = comm[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if link[c] == 0.0 {
                        touched.push(c);
                    }
                    link[c] += w;
                }
                tot[own] -= k_i;

                let gain = |c: usize, link_c: f64| link_c - cfg.resolution * tot[c] * k_i / two_m;
                let own_gain = gain(own, link[own]);
                let mut best = own;
                let mut best_gain = own_gain;
                for &c in &touched {
                    let g = gain(c, link[c]);
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                if best != own && (best_gain - own_gain) / m <= cfg.min_gain {
                    best = own;
                }
                tot[best] += k_i;
                if best != own {
                    comm[i] = best;
                    moved = true;
                    moved_any = true;
                }
                for c in touched.drain(..) {
                    link[c] = 0.0;
                }
            }
            if !moved {
                break;
            }
        }
        (renumber(&comm), moved_any)
    }

    fn aggregate(&self, comm: &[usize]) -> LevelGraph {
        let n_comm = comm.iter().max().map_or(0, |&c| c + 1);
        let mut self_loops = vec![0.0; n_comm];
        let mut merged: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n_comm];
        for i in 0..self.len() {
            let ci = comm[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if ci == cj {
                    self_loops[ci] += w;
                } else {
                    *merged[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adj = merged.into_iter().map(|m| m.into_iter().collect()).collect();
        LevelGraph::new(adj, self_loops)
    }
}

fn renumber(comm: &[usize]) -> Vec<usize> {
    let mut map = vec![usize::MAX; comm.len()];
    let mut next = 0;
    comm.iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect()
}

/// Runs Louvain over `adj`, an undirected adjacency list without self-loops
/// (each edge listed from both ends). Node indices are assumed to be in
/// canonical (lexicographic) order; visiting order is that order shuffled by
/// `cfg.seed`.
pub(crate) fn louvain(adj: Vec<Vec<(usize, f64)>>, cfg: &LouvainConfig) -> LouvainOutcome {
    let n = adj.len();
    let mut graph = LevelGraph::new(adj, vec![0.0; n]);
    let two_m: f64 = graph.degree.iter().sum();
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level_modularity = vec![graph.modularity(&membership, two_m, cfg.resolution)];
    if two_m <= 0.0 {
        return LouvainOutcome { membership, level_modularity };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    loop {
        let mut order: Vec<usize> = (0..graph.len()).collect();
        order.shuffle(&mut rng);
        let (comm, moved) = graph.local_moves(&order, two_m, cfg);
        if !moved {
            break;
        }
        for c in membership.iter_mut() {
            *c = comm[*c];
        }
        graph = graph.aggregate(&comm);
        let singletons: Vec<usize> = (0..graph.len()).collect();
        level_modularity.push(graph.modularity(&singletons, two_m, cfg.resolution));
    }
    LouvainOutcome { membership, level_modularity }
}
