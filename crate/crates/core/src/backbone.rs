//! Residual-ranked backbone: the shortest prefix of edges, by descending
//! residual, whose largest component spans the network's giant component.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::nullmodel::{CoocEdge, CoocNetwork};
use crate::unionfind::{largest_component, UnionFind};

#[derive(Debug, Clone, PartialEq)]
pub struct BackboneResult {
    /// Sorted by residual descending, then `(a, b)` ascending.
    pub ordered_edges: Vec<CoocEdge>,
    /// Number of leading edges in the backbone.
    pub stop_index: usize,
    /// Sorted node indices of the giant component.
    pub gcc_nodes: Vec<u32>,
    /// Ranks past `stop_index` holding the strongest edge of a node outside
    /// the giant component.
    pub off_gcc: Vec<usize>,
}

impl BackboneResult {
    pub fn backbone(&self) -> &[CoocEdge] {
        &self.ordered_edges[..self.stop_index]
    }

    pub fn is_off_gcc(&self, rank: usize) -> bool {
        self.off_gcc.binary_search(&rank).is_ok()
    }
}

pub fn rank_order(a: &CoocEdge, b: &CoocEdge) -> Ordering {
    b.residual.total_cmp(&a.residual).then(a.a.cmp(&b.a)).then(a.b.cmp(&b.b))
}

/// Whether the first `prefix` edges give a component equal to `gcc`.
pub fn prefix_restores(num_nodes: usize, edges: &[CoocEdge], prefix: usize, gcc: &[u32]) -> bool {
    let mut uf = UnionFind::new(num_nodes);
    for e in &edges[..prefix] {
        uf.union(e.a as usize, e.b as usize);
    }
    restores(&mut uf, gcc)
}

fn restores(uf: &mut UnionFind, gcc: &[u32]) -> bool {
    let Some(&first) = gcc.first() else {
        return true;
    };
    let root = uf.find(first as usize);
    uf.set_size(first as usize) == gcc.len() && gcc.iter().all(|&v| uf.find(v as usize) == root)
}

pub fn extract_backbone(network: &CoocNetwork) -> Result<BackboneResult> {
    if network.edges.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let n = network.nodes.len();
    let mut ordered = network.edges.clone();
    ordered.sort_by(rank_order);
    let gcc: Vec<u32> = largest_component(n, ordered.iter().map(|e| (e.a as usize, e.b as usize)))
        .into_iter()
        .map(|v| v as u32)
        .collect();
    let mut uf = UnionFind::new(n);
    let mut stop_index = ordered.len();
    for (i, e) in ordered.iter().enumerate() {
        uf.union(e.a as usize, e.b as usize);
        if restores(&mut uf, &gcc) {
            stop_index = i + 1;
            break;
        }
    }
    let mut in_gcc = alloc::vec![false; n];
    for &v in &gcc {
        in_gcc[v as usize] = true;
    }
    let mut covered = in_gcc.clone();
    for e in &ordered[..stop_index] {
        covered[e.a as usize] = true;
        covered[e.b as usize] = true;
    }
    let mut off_gcc = Vec::new();
    for (rank, e) in ordered.iter().enumerate().skip(stop_index) {
        let mut flag = false;
        for v in [e.a as usize, e.b as usize] {
            if !covered[v] {
                covered[v] = true;
                flag = true;
            }
        }
        if flag {
            off_gcc.push(rank);
        }
    }
    Ok(BackboneResult { ordered_edges: ordered, stop_index, gcc_nodes: gcc, off_gcc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nullmodel::NetworkKind;
    use alloc::string::ToString;
    use alloc::vec;

    fn net(n: usize, edges: &[(u32, u32, f64)]) -> CoocNetwork {
        CoocNetwork {
            nodes: (0..n).map(|i| alloc::format!("v{i}")).collect(),
            edges: edges
                .iter()
                .map(|&(a, b, r)| CoocEdge { a, b, observed: 1, expected: 0.0, sigma: 0.0, residual: r })
                .collect(),
            kind: NetworkKind::Positive,
        }
    }

    #[test]
    fn triangle_needs_two_edges() {
        let r = extract_backbone(&net(3, &[(0, 1, 3.0), (1, 2, 2.0), (0, 2, 1.0)])).unwrap();
        assert_eq!(r.stop_index, 2);
        assert_eq!(r.gcc_nodes, vec![0, 1, 2]);
        assert_eq!(r.backbone()[0].residual, 3.0);
    }

    #[test]
    fn path_needs_every_edge() {
        let r = extract_backbone(&net(4, &[(0, 1, 1.0), (1, 2, 5.0), (2, 3, 2.0)])).unwrap();
        assert_eq!(r.stop_index, 3);
    }

    #[test]
    fn empty_network_rejected() {
        assert_eq!(extract_backbone(&net(2, &[])), Err(Error::EmptyNetwork));
    }

    #[test]
    fn ties_break_on_node_order() {
        let r = extract_backbone(&net(3, &[(1, 2, 1.0), (0, 2, 1.0), (0, 1, 1.0)])).unwrap();
        let order: Vec<(u32, u32)> = r.ordered_edges.iter().map(|e| (e.a, e.b)).collect();
        assert_eq!(order, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(r.stop_index, 2);
    }

    #[test]
    fn off_component_edges_flagged() {
        // GCC {0,1,2}; {3,4} is a separate component ranked below it
        let r = extract_backbone(&net(5, &[(0, 1, 3.0), (1, 2, 2.0), (3, 4, 1.0), (0, 2, 0.5)])).unwrap();
        assert_eq!(r.stop_index, 2);
        assert_eq!(r.off_gcc, vec![2]);
        assert!(r.is_off_gcc(2));
        assert!(!r.is_off_gcc(3));
        assert_eq!(r.gcc_nodes.iter().map(|v| v.to_string()).collect::<Vec<_>>(), vec!["0", "1", "2"]);
    }
}
