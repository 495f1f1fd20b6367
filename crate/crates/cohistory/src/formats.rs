//! Tab-separated and JSON artifact formats.
//!
//! Every writer goes through [`write_atomic`], so a reader never sees a
//! half-written file. Floats are printed with the shortest representation
//! that parses back to the same value.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use cohistory_core::affiliation::{AffiliationTable, StageCounts, StatsReport};
use cohistory_core::backbone::BackboneResult;
use cohistory_core::consensus::{ConsensusMatrix, PartitionEnsemble};
use cohistory_core::hclust::{ClusterAssignment, Dendrogram, Merge};
use cohistory_core::louvain::Partition;
use cohistory_core::nullmodel::{CoocEdge, CoocNetwork, NetworkKind};
use cohistory_core::timeline::{ActivitySeries, TimelineOrdering};
use cohistory_core::PersonRecord;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::error::{PipelineError, Result};

pub const PERSONS: [&str; 6] =
    ["person_id", "birth_year", "death_year", "nationalities", "occupations", "article_title"];
pub const EDGES: [&str; 2] = ["source_id", "target_id"];
pub const DIRECTED_EDGES: [&str; 4] = ["source_id", "target_id", "forward", "backward"];
pub const AFFILIATION: [&str; 2] = ["person_id", "value_id"];
pub const VALUE_CATALOG: [&str; 2] = ["value_id", "person_count"];
pub const COOC: [&str; 6] = ["value_a", "value_b", "observed", "expected", "sigma", "residual"];
pub const PARTITIONS: [&str; 4] = ["gamma", "rep", "value_id", "community"];
pub const CLUSTERS: [&str; 3] = ["value_id", "cluster", "color_index"];
pub const BACKBONE: [&str; 6] = ["rank", "value_a", "value_b", "residual", "in_backbone", "off_gcc"];
pub const TIMELINE: [&str; 3] = ["value_id", "year", "count"];
pub const ORDERING: [&str; 3] = ["rank", "value_id", "robust_first_year"];

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let io_err = |e| PipelineError::io(path, e);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    {
        let mut out = BufWriter::new(tmp.as_file_mut());
        body(&mut out).map_err(io_err)?;
        out.flush().map_err(io_err)?;
    }
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut de = serde_json::Deserializer::from_reader(BufReader::new(file));
    de.disable_recursion_limit();
    T::deserialize(&mut de).map_err(|e| PipelineError::parse(path, e.line(), e.to_string()))
}

/// Tabs and line breaks cannot appear inside a field.
fn field(text: &str) -> std::borrow::Cow<'_, str> {
    if text.contains(['\t', '\n', '\r']) {
        text.replace(['\t', '\n', '\r'], " ").into()
    } else {
        text.into()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn header(w: &mut dyn Write, columns: &[&str]) -> io::Result<()> {
    writeln!(w, "{}", columns.join("\t"))
}

/// One data line of a TSV file.
pub struct Row<'a> {
    path: &'a Path,
    pub line: usize,
    fields: &'a [&'a str],
    columns: &'a [&'a str],
}

impl<'a> Row<'a> {
    pub fn str(&self, i: usize) -> &'a str {
        self.fields[i]
    }

    pub fn parse<T: FromStr>(&self, i: usize) -> Result<T> {
        self.fields[i].parse().map_err(|_| {
            PipelineError::parse(self.path, self.line, format!("bad {} `{}`", self.columns[i], self.fields[i]))
        })
    }

    pub fn optional<T: FromStr>(&self, i: usize) -> Result<Option<T>> {
        if self.fields[i].is_empty() {
            Ok(None)
        } else {
            self.parse(i).map(Some)
        }
    }

    pub fn flag(&self, i: usize) -> Result<bool> {
        match self.fields[i] {
            "1" => Ok(true),
            "0" => Ok(false),
            _ => Err(self.error(format!("bad {} `{}`", self.columns[i], self.fields[i]))),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> PipelineError {
        PipelineError::parse(self.path, self.line, message)
    }
}

/// Streams the rows of a TSV file after checking its header.
pub fn read_tsv(path: &Path, columns: &[&str], mut each: impl FnMut(&Row) -> Result<()>) -> Result<()> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let head = lines
        .next()
        .transpose()
        .map_err(|e| PipelineError::io(path, e))?
        .ok_or_else(|| PipelineError::parse(path, 1, "missing header"))?;
    if head != columns.join("\t") {
        return Err(PipelineError::parse(path, 1, format!("expected header `{}`", columns.join(" "))));
    }
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        let fields: Vec<&str> = line.split('\t').collect();
        let number = i + 2;
        if fields.len() != columns.len() {
            return Err(PipelineError::parse(
                path,
                number,
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        each(&Row { path, line: number, fields: &fields, columns })?;
    }
    Ok(())
}

pub fn write_persons(path: &Path, persons: &[PersonRecord]) -> Result<()> {
    write_atomic(path, |w| {
        header(w, &PERSONS)?;
        for p in persons {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                field(&p.person_id),
                opt(p.birth_year),
                opt(p.death_year),
                p.nationality_ids.join("|"),
                p.occupation_ids.join("|"),
                field(p.article_title.as_deref().unwrap_or("")),
            )?;
        }
        Ok(())
    })
}

fn split_list(text: &str) -> Vec<String> {
    text.split('|').filter(|s| !s.is_empty()).map(String::from).collect()
}

pub fn read_persons(path: &Path) -> Result<Vec<PersonRecord>> {
    let mut out = Vec::new();
    read_tsv(path, &PERSONS, |row| {
        let mut p = PersonRecord::new(row.str(0));
        p.birth_year = row.optional(1)?;
        p.death_year = row.optional(2)?;
        p.nationality_ids = split_list(row.str(3));
        p.occupation_ids = split_list(row.str(4));
        p.article_title = Some(row.str(5)).filter(|t| !t.is_empty()).map(String::from);
        out.push(p);
        Ok(())
    })?;
    Ok(out)
}

pub fn write_edges(path: &Path, edges: &[(String, String)]) -> Result<()> {
    write_atomic(path, |w| {
        header(w, &EDGES)?;
        for (s, t) in edges {
            writeln!(w, "{s}\t{t}")?;
        }
        Ok(())
    })
}

pub fn read_edges(path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    read_tsv(path, &EDGES, |row| {
        out.push((row.str(0).to_string(), row.str(1).to_string()));
        Ok(())
    })?;
    Ok(out)
}

/// Undirected edges with the original link directions, `a`/`b` given as ids.
pub fn write_directed_edges(path: &Path, edges: &[(&str, &str, u8)]) -> Result<()> {
    use cohistory_core::biograph::{LINK_BACKWARD, LINK_FORWARD};
    write_atomic(path, |w| {
        header(w, &DIRECTED_EDGES)?;
        for &(a, b, d) in edges {
            writeln!(w, "{a}\t{b}\t{}\t{}", flag(d & LINK_FORWARD != 0), flag(d & LINK_BACKWARD != 0))?;
        }
        Ok(())
    })
}

pub fn read_directed_edges(path: &Path) -> Result<Vec<(String, String, u8)>> {
    let mut out = Vec::new();
    read_tsv(path, &DIRECTED_EDGES, |row| {
        let d = u8::from(row.flag(2)?) | (u8::from(row.flag(3)?) << 1);
        out.push((row.str(0).to_string(), row.str(1).to_string(), d));
        Ok(())
    })?;
    Ok(out)
}

pub fn write_affiliation(path: &Path, table: &AffiliationTable) -> Result<()> {
    write_atomic(path, |w| {
        header(w, &AFFILIATION)?;
        for (person, row) in table.persons().iter().zip(table.rows()) {
            for &v in row {
                writeln!(w, "{person}\t{}", table.values()[v as usize])?;
            }
        }
        Ok(())
    })
}

pub fn read_affiliation(path: &Path) -> Result<AffiliationTable> {
    let mut pairs = Vec::new();
    read_tsv(path, &AFFILIATION, |row| {
        pairs.push((row.str(0).to_string(), row.str(1).to_string()));
        Ok(())
    })?;
    Ok(AffiliationTable::from_pairs(pairs.iter().map(|(p, v)| (p.as_str(), v.as_str()))))
}

pub fn write_value_catalog(path: &Path, table: &AffiliationTable) -> Result<()> {
    write_atomic(path, |w| {
        header(w, &VALUE_CATALOG)?;
        for (v, d) in table.values().iter().zip(table.col_degrees()) {
            writeln!(w, "{v}\t{d}")?;
        }
        Ok(())
    })
}

pub fn read_value_catalog(path: &Path) -> Result<Vec<(String, u32)>> {
    let mut out = Vec::new();
    read_tsv(path, &VALUE_CATALOG, |row| {
        out.push((row.str(0).to_string(), row.parse(1)?));
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsJson {
    pub persons: u64,
    pub links: u64,
    pub values: u64,
}

impl From<StageCounts> for CountsJson {
    fn from(c: StageCounts) -> Self {
        CountsJson { persons: c.persons, links: c.links, values: c.values }
    }
}

impl From<CountsJson> for StageCounts {
    fn from(c: CountsJson) -> Self {
        StageCounts { persons: c.persons, links: c.links, values: c.values }
    }
}

/// The four accounting rows of one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsJson {
    pub raw: CountsJson,
    pub reduced: CountsJson,
    pub one_to_one: CountsJson,
    pub one_to_n: CountsJson,
}

impl From<StatsReport> for StatsJson {
    fn from(s: StatsReport) -> Self {
        StatsJson {
            raw: s.raw.into(),
            reduced: s.reduced.into(),
            one_to_one: s.one_to_one.into(),
            one_to_n: s.one_to_n.into(),
        }
    }
}

impl From<StatsJson> for StatsReport {
    fn from(s: StatsJson) -> Self {
        StatsReport {
            raw: s.raw.into(),
            reduced: s.reduced.into(),
            one_to_one: s.one_to_one.into(),
            one_to_n: s.one_to_n.into(),
        }
    }
}

pub fn write_cooc(path: &Path, network: &CoocNetwork) -> Result<()> {
    write_atomic(path, |w| {
        header(w, &COOC)?;
        for e in &network.edges {
            let (a, b) = network.endpoints(e);
            writeln!(w, "{a}\t{b}\t{}\t{}\t{}\t{}", e.observed, e.expected, e.sigma, e.residual)?;
        }
        Ok(())
    })
}

/// Rebuilds a network from its edge list; nodes are the endpoints seen.
pub fn read_cooc(path: &Path, kind: NetworkKind) -> Result<CoocNetwork> {
    let mut rows: Vec<(String, String, CoocEdge)> = Vec::new();
    read_tsv(path, &COOC, |row| {
        if row.str(0) >= row.str(1) {
            return Err(row.error("value_a must sort before value_b"));
        }
        let edge = CoocEdge {
            a: 0,
            b: 0,
            observed: row.parse(2)?,
            expected: row.parse(3)?,
            sigma: row.parse(4)?,
            residual: row.parse(5)?,
        };
        rows.push((row.str(0).to_string(), row.str(1).to_string(), edge));
        Ok(())
    })?;
    let nodes: Vec<String> =
        rows.iter().flat_map(|(a, b, _)| [a.clone(), b.clone()]).collect::<BTreeSet<_>>().into_iter().collect();
    let index = |v: &str| nodes.binary_search_by(|n| n.as_str().cmp(v)).unwrap() as u32;
    let mut edges: Vec<CoocEdge> = rows.iter().map(|(a, b, e)| CoocEdge { a: index(a), b: index(b), ..*e }).collect();
    edges.sort_by_key(|e| (e.a, e.b));
    if edges.windows(2).any(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
        return Err(PipelineError::parse(path, 0, "duplicate value pair"));
    }
    Ok(CoocNetwork { nodes, edges, kind })
}

pub fn write_partitions(path: &Path, ensemble: &PartitionEnsemble, values: &[String]) -> Result<()> {
    let reps = ensemble.reps_per_gamma as usize;
    write_atomic(path, |w| {
        header(w, &PARTITIONS)?;
        for (j, p) in ensemble.partitions.iter().enumerate() {
            let rep = j % reps;
            for (v, c) in values.iter().zip(&p.assignment) {
                writeln!(w, "{}\t{rep}\t{v}\t{c}", p.gamma)?;
            }
        }
        Ok(())
    })
}

/// Reads partitions back, returning the ensemble and the value order.
/// Seeds and qualities are not stored in the table and come back as zero.
pub fn read_partitions(path: &Path) -> Result<(PartitionEnsemble, Vec<String>)> {
    let mut values: Vec<String> = Vec::new();
    let mut gammas: Vec<f64> = Vec::new();
    let mut partitions: Vec<Partition> = Vec::new();
    let mut current: Option<(String, u32)> = None;
    let mut position = 0;
    read_tsv(path, &PARTITIONS, |row| {
        let key = (row.str(0).to_string(), row.parse::<u32>(1)?);
        if current.as_ref() != Some(&key) {
            let gamma: f64 = row.parse(0)?;
            if gammas.last() != Some(&gamma) {
                gammas.push(gamma);
            }
            if let Some(prev) = partitions.last() {
                if prev.assignment.len() != values.len() || values.is_empty() {
                    return Err(row.error("partition does not cover every value"));
                }
            }
            partitions.push(Partition { assignment: Vec::new(), gamma, seed: 0, quality: 0.0 });
            current = Some(key);
            position = 0;
        }
        let first = partitions.len() == 1;
        if first {
            values.push(row.str(2).to_string());
        } else if values.get(position).map(String::as_str) != Some(row.str(2)) {
            return Err(row.error("value order differs between partitions"));
        }
        position += 1;
        partitions.last_mut().unwrap().assignment.push(row.parse(3)?);
        Ok(())
    })?;
    if partitions.is_empty() || !partitions.len().is_multiple_of(gammas.len()) {
        return Err(PipelineError::parse(path, 0, "ensemble is empty or unbalanced"));
    }
    if partitions.last().unwrap().assignment.len() != values.len() {
        return Err(PipelineError::parse(path, 0, "partition does not cover every value"));
    }
    let reps_per_gamma = (partitions.len() / gammas.len()) as u32;
    Ok((PartitionEnsemble { partitions, gammas, reps_per_gamma }, values))
}

pub fn write_consensus(path: &Path, matrix: &ConsensusMatrix) -> Result<()> {
    write_atomic(path, |w| {
        write!(w, "value_id")?;
        for v in &matrix.values {
            write!(w, "\t{v}")?;
        }
        writeln!(w)?;
        for (i, v) in matrix.values.iter().enumerate() {
            write!(w, "{v}")?;
            for p in matrix.row(i) {
                write!(w, "\t{p}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

/// Reads a square matrix without checking its invariants.
pub fn read_consensus(path: &Path) -> Result<ConsensusMatrix> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let head = lines
        .next()
        .transpose()
        .map_err(|e| PipelineError::io(path, e))?
        .ok_or_else(|| PipelineError::parse(path, 1, "missing header"))?;
    let mut columns = head.split('\t');
    if columns.next() != Some("value_id") {
        return Err(PipelineError::parse(path, 1, "header must start with value_id"));
    }
    let values: Vec<String> = columns.map(String::from).collect();
    let mut prob = Vec::with_capacity(values.len() * values.len());
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        let mut fields = line.split('\t');
        if fields.next() != values.get(i).map(String::as_str) {
            return Err(PipelineError::parse(path, i + 2, "row label does not match header"));
        }
        let before = prob.len();
        for f in fields {
            let p: f64 = f.parse().map_err(|_| PipelineError::parse(path, i + 2, format!("bad probability `{f}`")))?;
            prob.push(p);
        }
        if prob.len() - before != values.len() {
            return Err(PipelineError::parse(path, i + 2, "row length does not match header"));
        }
        rows += 1;
    }
    if rows != values.len() {
        return Err(PipelineError::parse(path, rows + 1, "matrix is not square"));
    }
    Ok(ConsensusMatrix::from_dense(values, prob)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MergeJson {
    left: usize,
    right: usize,
    height: f64,
    size: usize,
}

/// Leaves are value ids; an internal node is `[left, right, height]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DendrogramJson {
    values: Vec<String>,
    leaf_order: Vec<String>,
    merges: Vec<MergeJson>,
    tree: Value,
}

fn nested_tree(d: &Dendrogram) -> Value {
    let n = d.num_leaves();
    let mut nodes: Vec<Value> = d.values.iter().map(|v| Value::String(v.clone())).collect();
    for m in &d.merges {
        let left = std::mem::take(&mut nodes[m.left]);
        let right = std::mem::take(&mut nodes[m.right]);
        nodes.push(Value::Array(vec![left, right, Value::from(m.height)]));
    }
    match n {
        0 => Value::Array(Vec::new()),
        _ => nodes.pop().unwrap(),
    }
}

pub fn write_dendrogram(path: &Path, d: &Dendrogram) -> Result<()> {
    let file = DendrogramJson {
        values: d.values.clone(),
        leaf_order: d.leaf_order.iter().map(|&i| d.values[i].clone()).collect(),
        merges: d
            .merges
            .iter()
            .map(|m| MergeJson { left: m.left, right: m.right, height: m.height, size: m.size })
            .collect(),
        tree: nested_tree(d),
    };
    write_atomic(path, |w| {
        serde_json::to_writer(&mut *w, &file)?;
        writeln!(w)
    })
}

pub fn read_dendrogram(path: &Path) -> Result<Dendrogram> {
    let file: DendrogramJson = read_json(path)?;
    let position: BTreeMap<&str, usize> = file.values.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let leaf_order = file
        .leaf_order
        .iter()
        .map(|v| position.get(v.as_str()).copied())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| PipelineError::parse(path, 0, "leaf order names an unknown value"))?;
    Ok(Dendrogram {
        values: file.values,
        merges: file
            .merges
            .into_iter()
            .map(|m| Merge { left: m.left, right: m.right, height: m.height, size: m.size })
            .collect(),
        leaf_order,
    })
}

pub fn write_clusters(path: &Path, clusters: &ClusterAssignment) -> Result<()> {
    write_atomic(path, |w| {
        header(w, &CLUSTERS)?;
        for (v, &c) in clusters.values.iter().zip(&clusters.assignment) {
            writeln!(w, "{v}\t{c}\t{}", clusters.color_of(c).unwrap_or(0))?;
        }
        Ok(())
    })
}

pub fn read_clusters(path: &Path) -> Result<ClusterAssignment> {
    let mut values = Vec::new();
    let mut assignment = Vec::new();
    let mut colors: BTreeMap<u32, u32> = BTreeMap::new();
    read_tsv(path, &CLUSTERS, |row| {
        let cluster: u32 = row.parse(1)?;
        let color: u32 = row.parse(2)?;
        if *colors.entry(cluster).or_insert(color) != color {
            return Err(row.error(format!("cluster {cluster} has two colors")));
        }
        values.push(row.str(0).to_string());
        assignment.push(cluster);
        Ok(())
    })?;
    let k = colors.len() as u32;
    if colors.keys().copied().ne(1..=k) {
        return Err(PipelineError::parse(path, 0, "clusters are not numbered 1..k"));
    }
    let palette = colors.into_values().collect();
    Ok(ClusterAssignment::from_parts(values, assignment, palette)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackboneRow {
    pub rank: usize,
    pub value_a: String,
    pub value_b: String,
    pub residual: f64,
    pub in_backbone: bool,
    pub off_gcc: bool,
}

pub fn write_backbone(path: &Path, network: &CoocNetwork, result: &BackboneResult) -> Result<()> {
    write_atomic(path, |w| {
        header(w, &BACKBONE)?;
        for (rank, e) in result.ordered_edges.iter().enumerate() {
            let (a, b) = network.endpoints(e);
            writeln!(
                w,
                "{rank}\t{a}\t{b}\t{}\t{}\t{}",
                e.residual,
                flag(rank < result.stop_index),
                flag(result.is_off_gcc(rank))
            )?;
        }
        Ok(())
    })
}

pub fn read_backbone(path: &Path) -> Result<Vec<BackboneRow>> {
    let mut out = Vec::new();
    read_tsv(path, &BACKBONE, |row| {
        out.push(BackboneRow {
            rank: row.parse(0)?,
            value_a: row.str(1).to_string(),
            value_b: row.str(2).to_string(),
            residual: row.parse(3)?,
            in_backbone: row.flag(4)?,
            off_gcc: row.flag(5)?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn write_timeline(path: &Path, series: &[ActivitySeries]) -> Result<()> {
    write_atomic(path, |w| {
        header(w, &TIMELINE)?;
        for s in series {
            for (year, count) in s.years() {
                writeln!(w, "{}\t{year}\t{count}", s.value_id)?;
            }
        }
        Ok(())
    })
}

pub fn read_timeline(path: &Path) -> Result<Vec<(String, i32, u32)>> {
    let mut out = Vec::new();
    read_tsv(path, &TIMELINE, |row| {
        out.push((row.str(0).to_string(), row.parse(1)?, row.parse(2)?));
        Ok(())
    })?;
    Ok(out)
}

pub fn write_ordering(path: &Path, ordering: &TimelineOrdering) -> Result<()> {
    write_atomic(path, |w| {
        header(w, &ORDERING)?;
        for (rank, (v, year)) in ordering.entries.iter().enumerate() {
            writeln!(w, "{}\t{v}\t{year}", rank + 1)?;
        }
        Ok(())
    })
}

pub fn read_ordering(path: &Path) -> Result<Vec<(usize, String, i32)>> {
    let mut out = Vec::new();
    read_tsv(path, &ORDERING, |row| {
        out.push((row.parse(0)?, row.str(1).to_string(), row.parse(2)?));
        Ok(())
    })?;
    Ok(out)
}
