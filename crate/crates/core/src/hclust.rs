//! Agglomerative clustering of consensus matrices and flat cuts of the
//! resulting tree.

use alloc::string::String;
use alloc::vec::Vec;

use crate::consensus::ConsensusMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linkage {
    #[default]
    Average,
    Complete,
    Single,
}

/// One agglomeration step. Node ids follow the usual convention: leaves
/// are `0..n`, merge `i` creates node `n + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub values: Vec<String>,
    pub merges: Vec<Merge>,
    pub leaf_order: Vec<usize>,
}

impl Dendrogram {
    pub fn num_leaves(&self) -> usize {
        self.values.len()
    }

    /// Root node id, `None` for an empty tree.
    pub fn root(&self) -> Option<usize> {
        match self.num_leaves() {
            0 => None,
            n => Some(n - 1 + self.merges.len()),
        }
    }

    /// Children of an internal node.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        let m = self.merges.get(node.checked_sub(self.num_leaves())?)?;
        Some((m.left, m.right))
    }

    fn leaves_in_order(num_leaves: usize, merges: &[Merge]) -> Vec<usize> {
        if num_leaves == 0 {
            return Vec::new();
        }
        let mut order = Vec::with_capacity(num_leaves);
        let mut stack = alloc::vec![num_leaves - 1 + merges.len()];
        while let Some(node) = stack.pop() {
            if node < num_leaves {
                order.push(node);
            } else {
                let m = &merges[node - num_leaves];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        order
    }
}

/// Clusters on the dissimilarity `1 − prob`. Among equally close cluster
/// pairs the one with the lexicographically smallest pair of minimum leaf
/// indices merges first.
pub fn hier_cluster(consensus: &ConsensusMatrix, linkage: Linkage) -> Dendrogram {
    let n = consensus.len();
    // slot s holds the cluster whose smallest leaf is s
    let mut dist = alloc::vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = 1.0 - consensus.get(i, j);
        }
    }
    let mut active = alloc::vec![true; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut size = alloc::vec![1usize; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut last_height = f64::NEG_INFINITY;
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in (0..n).filter(|&a| active[a]) {
            for b in (a + 1..n).filter(|&b| active[b]) {
                let d = linked(&dist, n, a, b, &size, linkage);
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, d) = best.expect("at least two active clusters");
        let height = d.max(last_height);
        last_height = height;
        // fold b into a
        for c in (0..n).filter(|&c| active[c] && c != a && c != b) {
            let (ac, bc) = (dist[a * n + c], dist[b * n + c]);
            let merged = match linkage {
                Linkage::Average => ac + bc,
                Linkage::Complete => ac.max(bc),
                Linkage::Single => ac.min(bc),
            };
            dist[a * n + c] = merged;
            dist[c * n + a] = merged;
        }
        merges.push(Merge { left: node_id[a], right: node_id[b], height, size: size[a] + size[b] });
        size[a] += size[b];
        active[b] = false;
        node_id[a] = n + step;
    }
    let leaf_order = Dendrogram::leaves_in_order(n, &merges);
    Dendrogram { values: consensus.values.clone(), merges, leaf_order }
}

// For average linkage `dist` holds sums of leaf-pair dissimilarities.
fn linked(dist: &[f64], n: usize, a: usize, b: usize, size: &[usize], linkage: Linkage) -> f64 {
    let d = dist[a * n + b];
    match linkage {
        Linkage::Average => d / (size[a] * size[b]) as f64,
        Linkage::Complete | Linkage::Single => d,
    }
}

/// Flat clustering with `k` clusters numbered `1..=k` by first appearance
/// in the dendrogram's leaf order. `palette[c - 1]` is the color index of
/// cluster `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub values: Vec<String>,
    pub k: u32,
    pub assignment: Vec<u32>,
    pub palette: Vec<u32>,
}

impl ClusterAssignment {
    /// Rebuilds an assignment from parts, checking that exactly `k`
    /// clusters `1..=k` are in use.
    pub fn from_parts(values: Vec<String>, assignment: Vec<u32>, palette: Vec<u32>) -> Result<Self> {
        let k = assignment.iter().copied().max().unwrap_or(0);
        let mut used = alloc::vec![false; k as usize];
        for &c in &assignment {
            if c == 0 {
                return Err(Error::UnknownCluster(0));
            }
            used[c as usize - 1] = true;
        }
        if used.iter().any(|u| !u) || palette.len() != k as usize || values.len() != assignment.len() {
            return Err(Error::Config("cluster assignment is not contiguous".into()));
        }
        Ok(ClusterAssignment { values, k, assignment, palette })
    }

    pub fn cluster_of(&self, value_id: &str) -> Option<u32> {
        self.values.binary_search_by(|v| v.as_str().cmp(value_id)).ok().map(|i| self.assignment[i])
    }

    pub fn color_of(&self, cluster: u32) -> Option<u32> {
        cluster.checked_sub(1).and_then(|c| self.palette.get(c as usize)).copied()
    }

    pub fn contains_cluster(&self, cluster: u32) -> bool {
        (1..=self.k).contains(&cluster)
    }
}

/// Undoes the `k − 1` highest merges.
pub fn cut_tree(dendrogram: &Dendrogram, k: usize) -> Result<ClusterAssignment> {
    let n = dendrogram.num_leaves();
    if k == 0 || k > n {
        return Err(Error::CutOutOfRange { k, leaves: n });
    }
    let mut uf = crate::unionfind::UnionFind::new(n);
    let mut rep: Vec<usize> = (0..n).collect();
    rep.reserve(dendrogram.merges.len());
    for m in &dendrogram.merges[..n - k] {
        let r = uf.union(rep[m.left], rep[m.right]);
        rep.push(r);
    }
    let mut label_of_root = alloc::vec![0u32; n];
    let mut next = 0u32;
    let mut assignment = alloc::vec![0u32; n];
    for &leaf in &dendrogram.leaf_order {
        let r = uf.find(leaf);
        if label_of_root[r] == 0 {
            next += 1;
            label_of_root[r] = next;
        }
        assignment[leaf] = label_of_root[r];
    }
    Ok(ClusterAssignment {
        values: dendrogram.values.clone(),
        k: k as u32,
        assignment,
        palette: (0..k as u32).collect(),
    })
}
