//! Small graphs for exhaustive modularity checks.
#![allow(dead_code)]

pub type Edges = Vec<(usize, usize, f64)>;

fn clique(nodes: &[usize], w: f64) -> Edges {
    let mut e = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            e.push((a, b, w));
        }
    }
    e
}

/// Named fixtures with at most 8 nodes.
pub fn small_fixtures() -> Vec<(&'static str, usize, Edges)> {
    let mut bridged = clique(&[0, 1, 2], 1.0);
    bridged.extend(clique(&[3, 4, 5], 1.0));
    bridged.push((2, 3, 1.0));
    let mut disjoint = clique(&[0, 1, 2], 1.0);
    disjoint.extend(clique(&[3, 4, 5], 1.0));
    let mut two_k4 = clique(&[0, 1, 2, 3], 1.0);
    two_k4.extend(clique(&[4, 5, 6, 7], 1.0));
    two_k4.push((3, 4, 1.0));
    let mut weighted = clique(&[0, 1, 2, 3], 2.5);
    weighted.extend([(3, 4, 0.7), (4, 5, 3.0), (5, 6, 1.2), (4, 6, 2.2), (6, 7, 0.4), (0, 7, 0.9), (1, 5, 0.3)]);
    let path: Edges = (0..4).map(|i| (i, i + 1, 1.0)).collect();
    let star: Edges = (1..7).map(|i| (0, i, 1.0)).collect();
    let mut triangles_chain = clique(&[0, 1, 2], 1.0);
    triangles_chain.extend(clique(&[2, 3, 4], 1.0));
    triangles_chain.extend(clique(&[4, 5, 6], 1.0));
    vec![
        ("k4", 4, clique(&[0, 1, 2, 3], 1.0)),
        ("bridged_triangles", 6, bridged),
        ("disjoint_triangles", 6, disjoint),
        ("two_k4_bridged", 8, two_k4),
        ("weighted_mixed", 8, weighted),
        ("path5", 5, path),
        ("star7", 7, star),
        ("triangle_chain", 7, triangles_chain),
    ]
}

/// Eight-cycle. Louvain stalls on it at four pairs (Q = 1/4 at γ = 1)
/// while the optimum splits 3/3/2 (Q = 9/32); no single move or merge is
/// strictly improving from the stalled state.
pub fn ring8() -> (usize, Edges) {
    (8, (0..8).map(|i| (i, (i + 1) % 8, 1.0)).collect())
}
