//! Louvain optimization of resolution-scaled modularity
//! `Q(γ) = 1/(2m) Σ_ij [A_ij − γ k_i k_j / (2m)] δ(c_i, c_j)`.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nullmodel::CoocNetwork;

/// Undirected weighted graph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(u32, f64)>>,
}

impl WeightedGraph {
    /// Parallel edges are summed; self-loops and non-positive weights are
    /// ignored.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut adj: Vec<Vec<(u32, f64)>> = alloc::vec![Vec::new(); n];
        for (a, b, w) in edges {
            if a == b || w <= 0.0 || !w.is_finite() {
                continue;
            }
            adj[a].push((b as u32, w));
            adj[b].push((a as u32, w));
        }
        for list in adj.iter_mut() {
            list.sort_by_key(|&(x, _)| x);
            list.dedup_by(|next, kept| {
                if next.0 == kept.0 {
                    kept.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }
        WeightedGraph { adj }
    }

    /// Residual-weighted graph over the network's nodes.
    pub fn from_network(network: &CoocNetwork) -> Self {
        Self::from_edges(network.nodes.len(), network.edges.iter().map(|e| (e.a as usize, e.b as usize, e.residual)))
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, node: usize) -> &[(u32, f64)] {
        &self.adj[node]
    }

    pub fn degree(&self, node: usize) -> f64 {
        self.adj[node].iter().map(|&(_, w)| w).sum()
    }

    /// Sum of all edge weights, `m`.
    pub fn total_weight(&self) -> f64 {
        self.adj.iter().flatten().map(|&(_, w)| w).sum::<f64>() / 2.0
    }
}

/// Community assignment of every node, indices contiguous from 0 in order
/// of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub assignment: Vec<u32>,
    pub gamma: f64,
    pub seed: u64,
    pub quality: f64,
}

impl Partition {
    pub fn num_communities(&self) -> usize {
        self.assignment.iter().map(|&c| c as usize + 1).max().unwrap_or(0)
    }
}

/// Resolution-scaled modularity of `labels` on `graph`. Zero for a graph
/// without edges.
pub fn modularity(graph: &WeightedGraph, labels: &[u32], gamma: f64) -> f64 {
    let n = graph.num_nodes();
    let communities = labels.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut internal = alloc::vec![0.0; communities];
    let mut total = alloc::vec![0.0; communities];
    let mut two_m = 0.0;
    for i in 0..n {
        let ci = labels[i] as usize;
        for &(j, w) in graph.neighbors(i) {
            two_m += w;
            total[ci] += w;
            if labels[j as usize] as usize == ci {
                internal[ci] += w;
            }
        }
    }
    if two_m == 0.0 {
        return 0.0;
    }
    internal.iter().zip(&total).map(|(&inn, &tot)| inn / two_m - gamma * (tot / two_m) * (tot / two_m)).sum()
}

fn relabel(labels: &mut [u32]) -> usize {
    let mut map = alloc::vec![u32::MAX; labels.len()];
    let mut next = 0u32;
    for l in labels.iter_mut() {
        let slot = &mut map[*l as usize];
        if *slot == u32::MAX {
            *slot = next;
            next += 1;
        }
        *l = *slot;
    }
    next as usize
}

/// Graph of one aggregation level; `self_loops[i]` is `A_ii`, counting
/// both directions of internal edges.
struct Level {
    adj: Vec<Vec<(u32, f64)>>,
    self_loops: Vec<f64>,
}

impl Level {
    fn degrees(&self) -> Vec<f64> {
        self.adj.iter().zip(&self.self_loops).map(|(list, &s)| list.iter().map(|&(_, w)| w).sum::<f64>() + s).collect()
    }

    fn aggregate(&self, labels: &[u32], communities: usize) -> Level {
        let mut self_loops = alloc::vec![0.0; communities];
        let mut adj: Vec<Vec<(u32, f64)>> = alloc::vec![Vec::new(); communities];
        for (i, list) in self.adj.iter().enumerate() {
            let ci = labels[i] as usize;
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in list {
                let cj = labels[j as usize];
                if cj as usize == ci {
                    self_loops[ci] += w;
                } else {
                    adj[ci].push((cj, w));
                }
            }
        }
        for list in adj.iter_mut() {
            list.sort_by_key(|&(x, _)| x);
            list.dedup_by(|next, kept| {
                if next.0 == kept.0 {
                    kept.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }
        Level { adj, self_loops }
    }
}

fn improves(candidate: f64, best: f64) -> bool {
    candidate - best > 1e-12 * (candidate.abs() + best.abs()).max(1e-300)
}

/// Local moving phase. Returns whether any node changed community.
fn move_nodes(level: &Level, labels: &mut [u32], gamma: f64, two_m: f64, rng: &mut ChaCha8Rng) -> bool {
    let n = level.adj.len();
    let k = level.degrees();
    let mut tot = alloc::vec![0.0; n];
    for i in 0..n {
        tot[labels[i] as usize] += k[i];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut weight_to = alloc::vec![0.0; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &i in &order {
            let ci = labels[i];
            touched.clear();
            for &(j, w) in &level.adj[i] {
                let cj = labels[j as usize];
                if weight_to[cj as usize] == 0.0 {
                    touched.push(cj);
                }
                weight_to[cj as usize] += w;
            }
            tot[ci as usize] -= k[i];
            let gain = |c: u32, w: f64| w - gamma * k[i] * tot[c as usize] / two_m;
            let mut best = ci;
            let mut best_gain = gain(ci, weight_to[ci as usize]);
            for &c in &touched {
                let g = gain(c, weight_to[c as usize]);
                if c != best && improves(g, best_gain) {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best as usize] += k[i];
            for &c in &touched {
                weight_to[c as usize] = 0.0;
            }
            if best != ci {
                labels[i] = best;
                moved = true;
                any_move = true;
            }
        }
        if !moved {
            break;
        }
    }
    any_move
}

/// Louvain run with the modularity reached after each aggregation level.
#[derive(Debug, Clone, PartialEq)]
pub struct LouvainRun {
    pub partition: Partition,
    pub level_qualities: Vec<f64>,
}

pub fn louvain_traced(graph: &WeightedGraph, gamma: f64, seed: u64) -> Result<LouvainRun> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Config("resolution must be a positive finite number".into()));
    }
    let n = graph.num_nodes();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_m = 2.0 * graph.total_weight();
    let mut membership: Vec<u32> = (0..n as u32).collect();
    let mut level_qualities = alloc::vec![modularity(graph, &membership, gamma)];
    if two_m > 0.0 {
        let mut level = Level { adj: graph.adj.clone(), self_loops: alloc::vec![0.0; n] };
        loop {
            let size = level.adj.len();
            let mut labels: Vec<u32> = (0..size as u32).collect();
            if !move_nodes(&level, &mut labels, gamma, two_m, &mut rng) {
                break;
            }
            let communities = relabel(&mut labels);
            for m in membership.iter_mut() {
                *m = labels[*m as usize];
            }
            level_qualities.push(modularity(graph, &membership, gamma));
            if communities == size {
                break;
            }
            level = level.aggregate(&labels, communities);
        }
    }
    relabel(&mut membership);
    let quality = modularity(graph, &membership, gamma);
    Ok(LouvainRun { partition: Partition { assignment: membership, gamma, seed, quality }, level_qualities })
}

/// Locally optimal partition of `Q(γ)`. Node sweep order is shuffled by
/// `seed`; isolated nodes stay singletons.
pub fn louvain(graph: &WeightedGraph, gamma: f64, seed: u64) -> Result<Partition> {
    louvain_traced(graph, gamma, seed).map(|run| run.partition)
}
