//! Re-checks module invariants on the artifacts on disk.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use cohistory_core::affiliation::{StatsReport, ThresholdConfig};
use cohistory_core::backbone::prefix_restores;
use cohistory_core::hclust::cut_tree;
use cohistory_core::nullmodel::{project, CoocEdge, NetworkKind};
use cohistory_core::unionfind::largest_component;
use cohistory_core::Dimension;

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::formats::*;
use crate::pipeline::{read_manifest, Layout, Stage};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub violations: Vec<String>,
    /// Set when the stage has not been run, so nothing was checked.
    pub skipped: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations.len()).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.violations() == 0
    }

    /// All violation messages, prefixed with their check name.
    pub fn messages(&self) -> Vec<String> {
        self.checks.iter().flat_map(|c| c.violations.iter().map(move |v| format!("{}: {v}", c.name))).collect()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            if c.skipped {
                writeln!(f, "skip {} (stage not run)", c.name)?;
            } else if c.violations.is_empty() {
                writeln!(f, "ok   {}", c.name)?;
            } else {
                for v in &c.violations {
                    writeln!(f, "FAIL {}: {v}", c.name)?;
                }
            }
        }
        write!(f, "{} violation(s)", self.violations())
    }
}

/// Collects violations instead of stopping at the first one; unreadable
/// artifacts count as violations too.
struct Checker<'a> {
    layout: Layout,
    config: &'a PipelineConfig,
    report: VerifyReport,
}

impl Checker<'_> {
    fn run(&mut self, name: String, stage: Stage, body: impl FnOnce(&Self, &mut Vec<String>) -> Result<()>) {
        let ran = matches!(read_manifest(&self.layout, stage), Ok(Some(_)));
        let mut violations = Vec::new();
        if ran {
            if let Err(e) = body(self, &mut violations) {
                violations.push(e.to_string());
            }
        }
        self.report.checks.push(Check { name, violations, skipped: !ran });
    }
}

/// Keeps messages readable when an artifact is badly broken.
const MAX_PER_CHECK: usize = 20;

fn push(v: &mut Vec<String>, message: String) {
    if v.len() < MAX_PER_CHECK {
        v.push(message);
    }
}

pub fn verify(config: &PipelineConfig) -> Result<VerifyReport> {
    let mut c = Checker { layout: Layout::new(config.output_root()), config, report: VerifyReport::default() };
    c.run("ingest: person records".into(), Stage::Ingest, check_persons);
    for dim in Dimension::ALL {
        let d = dim.name();
        c.run(format!("affiliation/{d}: degree sums and thresholds"), Stage::Affiliation, |c, v| {
            check_affiliation(c, dim, v)
        });
        c.run(format!("score/{d}: scored pairs"), Stage::Score, |c, v| check_score(c, dim, v));
        c.run(format!("communities/{d}: partitions"), Stage::Communities, |c, v| check_partitions(c, dim, v));
        c.run(format!("consensus/{d}: matrix and dendrogram"), Stage::Consensus, |c, v| check_consensus(c, dim, v));
        c.run(format!("cut/{d}: cluster assignment"), Stage::Cut, |c, v| check_cut(c, dim, v));
        c.run(format!("backbone/{d}: prefix minimality"), Stage::Backbone, |c, v| check_backbone(c, dim, v));
        c.run(format!("timeline/{d}: ordering"), Stage::Timeline, |c, v| check_timeline(c, dim, v));
    }
    c.run("subnet: contemporaneity".into(), Stage::Subnet, check_subnet);
    Ok(c.report)
}

fn check_persons(c: &Checker, v: &mut Vec<String>) -> Result<()> {
    let persons = read_persons(&c.layout.persons())?;
    let mut ids = HashSet::new();
    for p in &persons {
        if !ids.insert(p.person_id.as_str()) {
            push(v, format!("duplicate person id {}", p.person_id));
        }
        if !p.is_valid() {
            push(v, format!("record {} breaks the record invariants", p.person_id));
        }
    }
    Ok(())
}

fn check_affiliation(c: &Checker, dim: Dimension, v: &mut Vec<String>) -> Result<()> {
    let table = read_affiliation(&c.layout.affiliation(dim))?;
    let catalog = read_value_catalog(&c.layout.values(dim))?;
    let threshold = c.config.threshold(dim);
    let degrees: BTreeMap<&str, u32> =
        table.values().iter().map(String::as_str).zip(table.col_degrees().iter().copied()).collect();
    let listed: BTreeMap<&str, u32> = catalog.iter().map(|(k, n)| (k.as_str(), *n)).collect();
    if degrees != listed {
        push(v, "value catalog counts differ from the affiliation column sums".into());
    }
    for (value, &n) in &listed {
        if n < threshold {
            push(v, format!("value {value} kept with {n} < {threshold} persons"));
        }
    }
    let col_sum: u64 = table.col_degrees().iter().map(|&d| d as u64).sum();
    let row_sum: u64 = table.row_degrees().iter().map(|&d| d as u64).sum();
    if col_sum != row_sum || row_sum != table.num_links() {
        push(v, format!("degree sums disagree: rows {row_sum}, columns {col_sum}"));
    }
    if let Ok(cfg) = ThresholdConfig::new(threshold) {
        if !table.check(cfg) {
            push(v, "affiliation table fails its own invariants".into());
        }
    }
    let stats: StatsReport = read_json::<StatsJson>(&c.layout.stats(dim))?.into();
    if !stats.is_consistent() {
        push(v, "stats rows do not reconcile".into());
    }
    let r = stats.reduced;
    if (r.persons, r.links, r.values) != (table.num_persons() as u64, table.num_links(), table.num_values() as u64) {
        push(v, "reduced stats row differs from the affiliation table".into());
    }
    Ok(())
}

fn check_score(c: &Checker, dim: Dimension, v: &mut Vec<String>) -> Result<()> {
    let all = read_cooc(&c.layout.cooc(dim, NetworkKind::All), NetworkKind::All)?;
    let positive = read_cooc(&c.layout.cooc(dim, NetworkKind::Positive), NetworkKind::Positive)?;
    let key = |n: &cohistory_core::nullmodel::CoocNetwork, e: &CoocEdge| {
        let (a, b) = n.endpoints(e);
        (a.to_string(), b.to_string())
    };
    let all_map: HashMap<(String, String), CoocEdge> = all.edges.iter().map(|e| (key(&all, e), *e)).collect();
    for e in &positive.edges {
        if e.residual.is_nan() || e.residual <= 0.0 {
            push(v, format!("positive network holds residual {}", e.residual));
        }
        let k = key(&positive, e);
        match all_map.get(&k) {
            Some(f)
                if (f.observed, f.expected, f.sigma, f.residual) == (e.observed, e.expected, e.sigma, e.residual) => {}
            _ => push(v, format!("positive pair {}-{} missing from or differing in the full list", k.0, k.1)),
        }
    }
    let positive_count = all.edges.iter().filter(|e| e.residual > 0.0).count();
    if positive_count != positive.edges.len() {
        push(v, format!("{positive_count} positive pairs in the full list, {} exported", positive.edges.len()));
    }
    for e in &all.edges {
        if !(e.expected >= 0.0 && e.sigma >= 0.0 && e.residual.is_finite()) {
            push(v, format!("bad moments on {}-{}", all.nodes[e.a as usize], all.nodes[e.b as usize]));
        }
    }
    let table = read_affiliation(&c.layout.affiliation(dim))?;
    if !table.is_empty() {
        let projected = project(&table)?;
        let observed: Vec<_> = projected.edges.iter().map(|e| (key(&projected, e), e.observed)).collect();
        let exported: Vec<_> = all.edges.iter().map(|e| (key(&all, e), e.observed)).collect();
        if observed != exported {
            push(v, "observed counts differ from a recount of the affiliation table".into());
        }
    }
    Ok(())
}

fn check_partitions(c: &Checker, dim: Dimension, v: &mut Vec<String>) -> Result<()> {
    let (ensemble, values) = read_partitions(&c.layout.partitions(dim))?;
    let positive = read_cooc(&c.layout.cooc(dim, NetworkKind::Positive), NetworkKind::Positive)?;
    if values.iter().collect::<BTreeSet<_>>() != positive.nodes.iter().collect::<BTreeSet<_>>() {
        push(v, "partitioned values differ from the positive network nodes".into());
    }
    let sweep = c.config.sweep_config(dim)?;
    if ensemble.gammas.len() != sweep.gammas.len() || ensemble.reps_per_gamma != sweep.reps_per_gamma {
        push(v, "ensemble shape differs from the sweep settings".into());
    }
    for (j, p) in ensemble.partitions.iter().enumerate() {
        let used: BTreeSet<u32> = p.assignment.iter().copied().collect();
        if used.iter().copied().ne(0..used.len() as u32) {
            push(v, format!("partition {j} has non-contiguous community labels"));
        }
    }
    Ok(())
}

fn check_consensus(c: &Checker, dim: Dimension, v: &mut Vec<String>) -> Result<()> {
    let matrix = read_consensus(&c.layout.consensus(dim))?;
    if let Some((i, j, p)) = matrix.violation() {
        push(
            v,
            format!("prob[{}][{}] = {p} breaks symmetry, unit diagonal or [0, 1]", matrix.values[i], matrix.values[j]),
        );
    }
    let (_, values) = read_partitions(&c.layout.partitions(dim))?;
    if matrix.values != values {
        push(v, "matrix values differ from the partitioned values".into());
    }
    let tree = read_dendrogram(&c.layout.dendrogram(dim))?;
    let n = tree.num_leaves();
    if tree.values != matrix.values {
        push(v, "dendrogram leaves differ from the matrix values".into());
    }
    if n > 0 && tree.merges.len() != n - 1 {
        push(v, format!("{} merges for {n} leaves", tree.merges.len()));
    }
    let mut sizes: Vec<usize> = vec![1; n];
    let mut used = vec![false; n + tree.merges.len()];
    for (i, m) in tree.merges.iter().enumerate() {
        let id = n + i;
        let valid = m.left < id && m.right < id && m.left != m.right && !used[m.left] && !used[m.right];
        if !valid {
            push(v, format!("merge {i} references an invalid or reused node"));
            return Ok(());
        }
        used[m.left] = true;
        used[m.right] = true;
        sizes.push(sizes[m.left] + sizes[m.right]);
        if sizes[id] != m.size {
            push(v, format!("merge {i} size {} should be {}", m.size, sizes[id]));
        }
        if i > 0 && m.height < tree.merges[i - 1].height {
            push(v, format!("merge {i} height decreases"));
        }
    }
    let mut order = tree.leaf_order.clone();
    order.sort_unstable();
    if order.into_iter().ne(0..n) {
        push(v, "leaf order is not a permutation of the leaves".into());
    }
    Ok(())
}

fn check_cut(c: &Checker, dim: Dimension, v: &mut Vec<String>) -> Result<()> {
    let clusters = read_clusters(&c.layout.clusters(dim))?;
    let k = c.config.clusters(dim);
    if clusters.k as usize != k {
        push(v, format!("{} clusters, configured {k}", clusters.k));
    }
    let tree = read_dendrogram(&c.layout.dendrogram(dim))?;
    match cut_tree(&tree, k) {
        Ok(expected) if expected == clusters => {}
        Ok(_) => push(v, "assignment differs from cutting the exported dendrogram".into()),
        Err(e) => push(v, e.to_string()),
    }
    Ok(())
}

fn check_backbone(c: &Checker, dim: Dimension, v: &mut Vec<String>) -> Result<()> {
    let rows = read_backbone(&c.layout.backbone(dim))?;
    let positive = read_cooc(&c.layout.cooc(dim, NetworkKind::Positive), NetworkKind::Positive)?;
    if rows.len() != positive.edges.len() {
        push(v, format!("{} ranked edges for {} positive edges", rows.len(), positive.edges.len()));
    }
    let mut edges = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r.rank != i {
            push(v, format!("rank {} at position {i}", r.rank));
        }
        if i > 0 && r.residual > rows[i - 1].residual {
            push(v, format!("rank {i} residual increases"));
        }
        let (Some(a), Some(b)) = (positive.node_index(&r.value_a), positive.node_index(&r.value_b)) else {
            push(v, format!("rank {i} names a value outside the positive network"));
            return Ok(());
        };
        edges.push(CoocEdge { a: a as u32, b: b as u32, observed: 0, expected: 0.0, sigma: 0.0, residual: r.residual });
    }
    let stop = rows.iter().take_while(|r| r.in_backbone).count();
    if rows[stop..].iter().any(|r| r.in_backbone) {
        push(v, "backbone flags do not form a prefix".into());
    }
    let n = positive.nodes.len();
    let gcc: Vec<u32> = largest_component(n, edges.iter().map(|e| (e.a as usize, e.b as usize)))
        .into_iter()
        .map(|x| x as u32)
        .collect();
    if !prefix_restores(n, &edges, stop, &gcc) {
        push(v, format!("prefix of {stop} edges does not span the giant component"));
    } else if stop > 0 && prefix_restores(n, &edges, stop - 1, &gcc) {
        push(v, format!("prefix of {} edges already spans the giant component", stop - 1));
    }
    if rows[..stop].iter().any(|r| r.off_gcc) {
        push(v, "backbone edge flagged as off-component".into());
    }
    Ok(())
}

fn check_timeline(c: &Checker, dim: Dimension, v: &mut Vec<String>) -> Result<()> {
    let ordering = read_ordering(&c.layout.ordering(dim))?;
    let catalog: BTreeSet<String> = read_value_catalog(&c.layout.values(dim))?.into_iter().map(|(k, _)| k).collect();
    for (i, (rank, value, year)) in ordering.iter().enumerate() {
        if *rank != i + 1 {
            push(v, format!("rank {rank} at position {}", i + 1));
        }
        if !catalog.contains(value) {
            push(v, format!("ordered value {value} is not in the value catalog"));
        }
        if i > 0 && *year < ordering[i - 1].2 {
            push(v, format!("rank {rank} starts before the previous value"));
        }
    }
    for (value, _, _) in read_timeline(&c.layout.timeline(dim))? {
        if !catalog.contains(&value) {
            push(v, format!("timeline value {value} is not in the value catalog"));
            break;
        }
    }
    Ok(())
}

fn check_subnet(c: &Checker, v: &mut Vec<String>) -> Result<()> {
    let persons = read_persons(&c.layout.persons())?;
    let births: HashMap<&str, Option<i32>> = persons.iter().map(|p| (p.person_id.as_str(), p.birth_year)).collect();
    let gap = c.config.biograph.max_birth_gap as i64;
    let mut files = vec![c.layout.hyperlinks()];
    files.extend(c.config.subnets.iter().map(|s| c.layout.subnet_edges(&s.name)));
    for path in files {
        let name = c.layout.relative(&path);
        for (a, b, _) in read_directed_edges(&path)? {
            match (births.get(a.as_str()).copied().flatten(), births.get(b.as_str()).copied().flatten()) {
                (Some(x), Some(y)) if (x as i64 - y as i64).abs() <= gap => {}
                (Some(x), Some(y)) => {
                    push(v, format!("{name}: {a}-{b} born {} years apart", (x as i64 - y as i64).abs()))
                }
                _ => push(v, format!("{name}: {a}-{b} lacks a birth year")),
            }
        }
    }
    Ok(())
}
