//! Disjoint-set forest with union by size and path compression.

use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: alloc::vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; returns the new root.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let mut a = self.find(a);
        let mut b = self.find(b);
        if a == b {
            return a;
        }
        if self.size[a] < self.size[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        a
    }

    /// Size of the set containing `node`.
    pub fn set_size(&mut self, node: usize) -> usize {
        let r = self.find(node);
        self.size[r]
    }

    /// Component label per element, numbered by first appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.len();
        let mut label_of_root = alloc::vec![usize::MAX; n];
        let mut next = 0;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = self.find(i);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            out.push(label_of_root[r]);
        }
        out
    }
}

/// Nodes of the largest connected component of an undirected graph on
/// `n` nodes, sorted ascending. Ties go to the component holding the
/// smallest node index. Empty when `n == 0`.
pub fn largest_component(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut uf = UnionFind::new(n);
    for (a, b) in edges {
        uf.union(a, b);
    }
    let labels = uf.labels();
    let mut sizes = alloc::vec![0usize; n];
    for &l in &labels {
        sizes[l] += 1;
    }
    // labels are numbered by first appearance, so the lowest label among
    // equal sizes holds the smallest node
    let Some(best) = (0..n).filter(|&l| sizes[l] > 0).max_by(|&x, &y| sizes[x].cmp(&sizes[y]).then(y.cmp(&x))) else {
        return Vec::new();
    };
    (0..n).filter(|&i| labels[i] == best).collect()
}
