//! Hyperlink networks between biographies: contemporaneity filtering,
//! cluster-defined sub-populations, giant components and node coloring.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hclust::ClusterAssignment;
use crate::person::{Dimension, PersonRecord};
use crate::unionfind::largest_component;

/// Default maximum birth-year gap of a kept link.
pub const MAX_BIRTH_GAP: i32 = 75;

/// Person lookup by identifier.
#[derive(Debug, Clone, Default)]
pub struct PersonIndex<'a> {
    by_id: BTreeMap<&'a str, &'a PersonRecord>,
}

impl<'a> PersonIndex<'a> {
    pub fn new(persons: &'a [PersonRecord]) -> Self {
        PersonIndex { by_id: persons.iter().map(|p| (p.person_id.as_str(), p)).collect() }
    }

    pub fn get(&self, person_id: &str) -> Option<&'a PersonRecord> {
        self.by_id.get(person_id).copied()
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

/// Undirected simple graph over persons. Node ids are sorted; edges are
/// `(a, b)` node indices with `a < b`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HyperlinkGraph {
    pub nodes: Vec<String>,
    pub birth_years: Vec<i32>,
    pub edges: Vec<(u32, u32)>,
    /// Per edge: bit 0 set when `a` links to `b`, bit 1 when `b` links to `a`.
    pub directions: Vec<u8>,
}

pub const LINK_FORWARD: u8 = 1;
pub const LINK_BACKWARD: u8 = 2;

impl HyperlinkGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, person_id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(person_id)).ok()
    }

    /// Subgraph induced by the nodes with `keep[i]`.
    pub fn induced(&self, keep: &[bool]) -> HyperlinkGraph {
        let mut remap = alloc::vec![u32::MAX; self.nodes.len()];
        let mut out = HyperlinkGraph::default();
        for i in 0..self.nodes.len() {
            if keep[i] {
                remap[i] = out.nodes.len() as u32;
                out.nodes.push(self.nodes[i].clone());
                out.birth_years.push(self.birth_years[i]);
            }
        }
        for (&(a, b), &d) in self.edges.iter().zip(&self.directions) {
            if keep[a as usize] && keep[b as usize] {
                out.edges.push((remap[a as usize], remap[b as usize]));
                out.directions.push(d);
            }
        }
        out
    }

    /// Distinct directed links behind the undirected edges.
    pub fn num_directed_links(&self) -> usize {
        self.directions.iter().map(|d| d.count_ones() as usize).sum()
    }

    /// First edge breaking the gap rule, if any.
    pub fn gap_violation(&self, max_gap: i32) -> Option<(u32, u32)> {
        self.edges.iter().copied().find(|&(a, b)| {
            (self.birth_years[a as usize] as i64 - self.birth_years[b as usize] as i64).abs() > max_gap as i64
        })
    }
}

/// Edge counts at each filtering step of [`build_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildReport {
    pub input_edges: u64,
    pub unknown_person: u64,
    pub self_links: u64,
    pub missing_birth: u64,
    pub gap_exceeded: u64,
    /// Distinct kept `(source, target)` pairs, direction retained.
    pub directed_edges: u64,
    /// Distinct kept unordered pairs.
    pub undirected_edges: u64,
}

/// Drops direction and duplicates, and keeps links whose endpoints both
/// have a year-precision birth date at most `max_gap` years apart. Nodes
/// are the endpoints of kept links.
pub fn build_graph<'e>(
    edges: impl IntoIterator<Item = (&'e str, &'e str)>,
    persons: &PersonIndex<'_>,
    max_gap: i32,
) -> (HyperlinkGraph, BuildReport) {
    let mut report = BuildReport::default();
    let mut directed: Vec<(&str, &str)> = Vec::new();
    let mut births: BTreeMap<&str, i32> = BTreeMap::new();
    for (s, t) in edges {
        report.input_edges += 1;
        let (Some(ps), Some(pt)) = (persons.get(s), persons.get(t)) else {
            report.unknown_person += 1;
            continue;
        };
        if s == t {
            report.self_links += 1;
            continue;
        }
        let (Some(bs), Some(bt)) = (ps.dated_birth(), pt.dated_birth()) else {
            report.missing_birth += 1;
            continue;
        };
        if (bs as i64 - bt as i64).abs() > max_gap as i64 {
            report.gap_exceeded += 1;
            continue;
        }
        births.insert(ps.person_id.as_str(), bs);
        births.insert(pt.person_id.as_str(), bt);
        directed.push((ps.person_id.as_str(), pt.person_id.as_str()));
    }
    directed.sort_unstable();
    directed.dedup();
    report.directed_edges = directed.len() as u64;
    let nodes: Vec<&str> = births.keys().copied().collect();
    let index = |id: &str| nodes.binary_search(&id).expect("endpoint registered") as u32;
    let mut undirected: BTreeMap<(u32, u32), u8> = BTreeMap::new();
    for &(s, t) in &directed {
        let (a, b) = (index(s), index(t));
        let (key, bit) = if a < b { ((a, b), LINK_FORWARD) } else { ((b, a), LINK_BACKWARD) };
        *undirected.entry(key).or_insert(0) |= bit;
    }
    report.undirected_edges = undirected.len() as u64;
    let graph = HyperlinkGraph {
        birth_years: nodes.iter().map(|n| births[n]).collect(),
        nodes: nodes.into_iter().map(String::from).collect(),
        edges: undirected.keys().copied().collect(),
        directions: undirected.into_values().collect(),
    };
    (graph, report)
}

/// Sub-population whose `dimension` values fall in `clusters`; colored by
/// the other dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubnetSpec {
    pub dimension: Dimension,
    pub clusters: Vec<u32>,
}

impl SubnetSpec {
    pub fn color_dimension(&self) -> Dimension {
        self.dimension.other()
    }
}

/// Keeps persons with at least one `spec.dimension` value assigned to one
/// of the selected clusters, and the links among them.
pub fn select_subnet(
    graph: &HyperlinkGraph,
    persons: &PersonIndex<'_>,
    spec: &SubnetSpec,
    assignment: &ClusterAssignment,
) -> Result<HyperlinkGraph> {
    if let Some(&bad) = spec.clusters.iter().find(|&&c| !assignment.contains_cluster(c)) {
        return Err(Error::UnknownCluster(bad));
    }
    let keep: Vec<bool> = graph
        .nodes
        .iter()
        .map(|id| {
            persons.get(id).is_some_and(|p| {
                p.values(spec.dimension)
                    .iter()
                    .filter_map(|v| assignment.cluster_of(v))
                    .any(|c| spec.clusters.contains(&c))
            })
        })
        .collect();
    Ok(graph.induced(&keep))
}

/// Largest connected component; ties go to the one holding the smallest
/// person id.
pub fn giant_component(graph: &HyperlinkGraph) -> Result<HyperlinkGraph> {
    if graph.nodes.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let members = largest_component(graph.num_nodes(), graph.edges.iter().map(|&(a, b)| (a as usize, b as usize)));
    let mut keep = alloc::vec![false; graph.num_nodes()];
    for m in members {
        keep[m] = true;
    }
    Ok(graph.induced(&keep))
}

/// Cluster holding most of the person's values in the assignment's
/// dimension, ties to the lowest cluster; `None` means unassigned.
pub fn majority_cluster(values: &[String], assignment: &ClusterAssignment) -> Option<u32> {
    let mut votes: BTreeMap<u32, u32> = BTreeMap::new();
    for c in values.iter().filter_map(|v| assignment.cluster_of(v)) {
        *votes.entry(c).or_insert(0) += 1;
    }
    // BTreeMap iterates ascending, so max_by keeps the lowest on ties
    votes
        .into_iter()
        .fold(None, |best: Option<(u32, u32)>, (c, n)| match best {
            Some((_, bn)) if bn >= n => best,
            _ => Some((c, n)),
        })
        .map(|(c, _)| c)
}

/// Color-dimension cluster of every node.
pub fn colorize(
    graph: &HyperlinkGraph,
    persons: &PersonIndex<'_>,
    color_dimension: Dimension,
    assignment: &ClusterAssignment,
) -> Vec<Option<u32>> {
    graph
        .nodes
        .iter()
        .map(|id| persons.get(id).and_then(|p| majority_cluster(p.values(color_dimension), assignment)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn person(id: &str, birth: Option<i32>, occ: &[&str]) -> PersonRecord {
        let mut p = PersonRecord::new(id);
        p.birth_year = birth;
        p.occupation_ids = occ.iter().map(|s| s.to_string()).collect();
        p
    }

    fn assignment(pairs: &[(&str, u32)]) -> ClusterAssignment {
        let mut pairs = pairs.to_vec();
        pairs.sort();
        let k = pairs.iter().map(|p| p.1).max().unwrap();
        ClusterAssignment::from_parts(
            pairs.iter().map(|p| p.0.to_string()).collect(),
            pairs.iter().map(|p| p.1).collect(),
            (0..k).collect(),
        )
        .unwrap()
    }

    #[test]
    fn gap_boundary_is_inclusive() {
        let persons = vec![person("a", Some(1900), &[]), person("b", Some(1975), &[]), person("c", Some(1976), &[])];
        let idx = PersonIndex::new(&persons);
        let (g, r) = build_graph([("a", "b"), ("a", "c")], &idx, MAX_BIRTH_GAP);
        assert_eq!(g.nodes, vec!["a", "b"]);
        assert_eq!(g.edges, vec![(0, 1)]);
        assert_eq!(r.gap_exceeded, 1);
    }

    #[test]
    fn missing_birth_drops_link() {
        let persons = vec![person("a", Some(1900), &[]), person("b", None, &[])];
        let idx = PersonIndex::new(&persons);
        let (g, r) = build_graph([("a", "b")], &idx, MAX_BIRTH_GAP);
        assert!(g.edges.is_empty());
        assert_eq!(r.missing_birth, 1);
    }

    #[test]
    fn direction_and_duplicates_merge() {
        let persons = vec![person("a", Some(1900), &[]), person("b", Some(1910), &[])];
        let idx = PersonIndex::new(&persons);
        let (g, r) = build_graph([("a", "b"), ("b", "a"), ("a", "b"), ("a", "a"), ("a", "zz")], &idx, 75);
        assert_eq!(g.edges, vec![(0, 1)]);
        assert_eq!(g.directions, vec![LINK_FORWARD | LINK_BACKWARD]);
        assert_eq!(g.num_directed_links(), 2);
        assert_eq!((r.directed_edges, r.undirected_edges), (2, 1));
        assert_eq!((r.self_links, r.unknown_person), (1, 1));
    }

    #[test]
    fn subnet_needs_one_member_value() {
        let persons = vec![
            person("a", Some(1900), &["painter", "farmer"]),
            person("b", Some(1900), &["farmer"]),
            person("c", Some(1900), &[]),
            person("d", Some(1900), &["painter"]),
        ];
        let idx = PersonIndex::new(&persons);
        let (g, _) = build_graph([("a", "b"), ("b", "c"), ("a", "d"), ("c", "d")], &idx, 75);
        let ca = assignment(&[("painter", 1), ("farmer", 2)]);
        let spec = SubnetSpec { dimension: Dimension::Occupation, clusters: vec![1] };
        let sub = select_subnet(&g, &idx, &spec, &ca).unwrap();
        assert_eq!(sub.nodes, vec!["a", "d"]);
        assert_eq!(sub.edges, vec![(0, 1)]);
        let bad = SubnetSpec { dimension: Dimension::Occupation, clusters: vec![3] };
        assert_eq!(select_subnet(&g, &idx, &bad, &ca), Err(Error::UnknownCluster(3)));
    }

    #[test]
    fn giant_component_picks_largest() {
        let g = HyperlinkGraph {
            nodes: ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect(),
            birth_years: vec![0; 5],
            edges: vec![(0, 1), (2, 3), (3, 4)],
            directions: vec![LINK_FORWARD, LINK_BACKWARD, LINK_FORWARD | LINK_BACKWARD],
        };
        let gcc = giant_component(&g).unwrap();
        assert_eq!(gcc.nodes, vec!["c", "d", "e"]);
        assert_eq!(gcc.edges, vec![(0, 1), (1, 2)]);
        assert_eq!(giant_component(&gcc).unwrap(), gcc);
        assert_eq!(giant_component(&HyperlinkGraph::default()), Err(Error::EmptyGraph));
    }

    #[test]
    fn majority_coloring() {
        let ca = assignment(&[("a", 5), ("b", 5), ("c", 2), ("d", 1), ("e", 3), ("f", 4)]);
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(majority_cluster(&v(&["a", "b", "c"]), &ca), Some(5));
        assert_eq!(majority_cluster(&v(&["c", "a"]), &ca), Some(2));
        assert_eq!(majority_cluster(&v(&[]), &ca), None);
        assert_eq!(majority_cluster(&v(&["unknown"]), &ca), None);
    }
}
