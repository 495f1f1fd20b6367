//! Stage DAG, artifact layout, manifests and the stage bodies.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use cohistory_core::affiliation::{reference_stats, AffiliationTable, ThresholdConfig};
use cohistory_core::backbone::extract_backbone;
use cohistory_core::biograph::{
    build_graph, colorize, giant_component, select_subnet, HyperlinkGraph, PersonIndex, SubnetSpec,
};
use cohistory_core::consensus::mutual_community_matrix;
use cohistory_core::hclust::{cut_tree, hier_cluster, ClusterAssignment};
use cohistory_core::louvain::WeightedGraph;
use cohistory_core::nullmodel::{CoocNetwork, NetworkKind};
use cohistory_core::timeline::{activity_series, default_depth, order_values};
use cohistory_core::{Dimension, PersonRecord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};
use crate::export::{write_gexf, write_graphml, NodeAttributes};
use crate::formats::*;
use crate::ingest::{ingest_entities, open_input, parse_pagelinks, TitleIndex};
use crate::parallel::{score_parallel, sweep_parallel};

/// Bumped when an artifact format changes, so old caches are not reused.
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Affiliation,
    Score,
    Communities,
    Consensus,
    Cut,
    Backbone,
    Timeline,
    Subnet,
}

impl Stage {
    /// Topological order.
    pub const ALL: [Stage; 9] = [
        Stage::Ingest,
        Stage::Affiliation,
        Stage::Score,
        Stage::Communities,
        Stage::Consensus,
        Stage::Cut,
        Stage::Backbone,
        Stage::Timeline,
        Stage::Subnet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Affiliation => "affiliation",
            Stage::Score => "score",
            Stage::Communities => "communities",
            Stage::Consensus => "consensus",
            Stage::Cut => "cut",
            Stage::Backbone => "backbone",
            Stage::Timeline => "timeline",
            Stage::Subnet => "subnet",
        }
    }

    pub fn parse(name: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn dependencies(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Affiliation => &[Stage::Ingest],
            Stage::Score => &[Stage::Affiliation],
            Stage::Communities => &[Stage::Score],
            Stage::Consensus => &[Stage::Communities],
            Stage::Cut => &[Stage::Consensus],
            Stage::Backbone => &[Stage::Score],
            Stage::Timeline => &[Stage::Ingest, Stage::Affiliation],
            Stage::Subnet => &[Stage::Ingest, Stage::Cut],
        }
    }
}

/// Where every artifact lives under the output root.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Layout {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn file(&self, stage: Stage, name: &str) -> PathBuf {
        self.root.join(stage.name()).join(name)
    }

    fn dim_file(&self, stage: Stage, dim: Dimension, suffix: &str) -> PathBuf {
        self.file(stage, &format!("{}_{suffix}", dim.name()))
    }

    pub fn manifest(&self, stage: Stage) -> PathBuf {
        self.root.join("manifests").join(format!("{}.json", stage.name()))
    }

    pub fn report(&self, stage: Stage) -> PathBuf {
        self.file(stage, "report.json")
    }

    pub fn persons(&self) -> PathBuf {
        self.file(Stage::Ingest, "persons.tsv")
    }

    pub fn raw_links(&self) -> PathBuf {
        self.file(Stage::Ingest, "hyperlinks_raw.tsv")
    }

    pub fn affiliation(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Affiliation, dim, "affiliation.tsv")
    }

    pub fn values(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Affiliation, dim, "values.tsv")
    }

    pub fn raw_values(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Affiliation, dim, "values_raw.tsv")
    }

    pub fn stats(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Affiliation, dim, "stats.json")
    }

    pub fn cooc(&self, dim: Dimension, kind: NetworkKind) -> PathBuf {
        let suffix = match kind {
            NetworkKind::All => "cooc_all.tsv",
            NetworkKind::Positive => "cooc_positive.tsv",
        };
        self.dim_file(Stage::Score, dim, suffix)
    }

    pub fn partitions(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Communities, dim, "partitions.tsv")
    }

    pub fn consensus(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Consensus, dim, "consensus.tsv")
    }

    pub fn dendrogram(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Consensus, dim, "dendrogram.json")
    }

    pub fn clusters(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Cut, dim, "clusters.tsv")
    }

    pub fn backbone(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Backbone, dim, "backbone.tsv")
    }

    pub fn timeline(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Timeline, dim, "timeline.tsv")
    }

    pub fn ordering(&self, dim: Dimension) -> PathBuf {
        self.dim_file(Stage::Timeline, dim, "ordering.tsv")
    }

    /// Contemporaneous hyperlink graph over all persons.
    pub fn hyperlinks(&self) -> PathBuf {
        self.file(Stage::Subnet, "hyperlinks.tsv")
    }

    pub fn subnet_edges(&self, name: &str) -> PathBuf {
        self.file(Stage::Subnet, &format!("{name}_edges.tsv"))
    }

    pub fn graphml(&self, name: &str) -> PathBuf {
        self.file(Stage::Subnet, &format!("{name}.graphml"))
    }

    pub fn gexf(&self, name: &str) -> PathBuf {
        self.file(Stage::Subnet, &format!("{name}.gexf"))
    }

    /// Root-relative name with `/` separators, as stored in manifests.
    pub fn relative(&self, path: &Path) -> String {
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
    }
}

/// What a stage consumed and produced. Holds no timestamps, paths outside
/// the output root, or thread counts, so reruns compare byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn digest_file(path: &Path) -> Result<String> {
    let io_err = |e| PipelineError::io(path, e);
    let mut file = File::open(path).map_err(io_err)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(io_err)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub fn read_manifest(layout: &Layout, stage: Stage) -> Result<Option<Manifest>> {
    let path = layout.manifest(stage);
    match fs::metadata(&path) {
        Ok(_) => read_json(&path).map(Some),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(PipelineError::io(path, e)),
    }
}

/// The configuration a stage's outputs depend on directly. Upstream
/// settings reach it through input digests instead.
pub fn stage_settings(stage: Stage, config: &PipelineConfig) -> Value {
    let per_dim = |f: &dyn Fn(Dimension) -> Value| -> Value {
        Dimension::ALL.iter().map(|&d| (d.name().to_string(), f(d))).collect::<serde_json::Map<_, _>>().into()
    };
    let settings = match stage {
        // Input files are tracked by content digest, not by path.
        Stage::Ingest => json!({
            "dump_compression": config.input.dump_compression,
            "pagelinks_compression": config.input.pagelinks_compression,
            "wiki": config.input.wiki,
            "human_class": config.input.human_class,
        }),
        Stage::Affiliation => per_dim(&|d| json!(config.threshold(d))),
        Stage::Score => json!({ "master_seed": config.master_seed, "null_model": config.null_model }),
        Stage::Communities => json!({
            "master_seed": config.master_seed,
            "gammas": config.sweep_config(Dimension::Nationality).map(|s| s.gammas).unwrap_or_default(),
            "reps_per_gamma": config.sweep.reps_per_gamma,
        }),
        Stage::Consensus => json!({ "linkage": config.sweep.linkage }),
        Stage::Cut => per_dim(&|d| json!(config.clusters(d))),
        Stage::Backbone => json!({}),
        Stage::Timeline => json!(config.timeline),
        Stage::Subnet => json!({ "biograph": config.biograph, "subnets": config.subnets }),
    };
    json!({ "format": FORMAT_VERSION, "stage": stage.name(), "settings": settings })
}

pub fn config_hash(stage: Stage, config: &PipelineConfig) -> String {
    let bytes = serde_json::to_vec(&stage_settings(stage, config)).expect("settings serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRun {
    pub stage: Stage,
    pub cached: bool,
    pub manifest: Manifest,
}

fn current_inputs(stage: Stage, config: &PipelineConfig, layout: &Layout) -> Result<BTreeMap<String, String>> {
    let mut inputs = BTreeMap::new();
    for &dep in stage.dependencies() {
        let missing = PipelineError::MissingDependency { stage: stage.name(), prerequisite: dep.name() };
        let Some(manifest) = read_manifest(layout, dep)? else { return Err(missing) };
        for rel in manifest.outputs.keys() {
            let path = layout.root().join(rel);
            if !path.is_file() {
                return Err(missing);
            }
            inputs.insert(rel.clone(), digest_file(&path)?);
        }
    }
    if stage == Stage::Ingest {
        for (label, path) in [("dump", &config.input.dump), ("pagelinks", &config.input.pagelinks)] {
            let key = format!("input:{label}");
            inputs.insert(key, digest_file(&config.resolve(path))?);
        }
    }
    Ok(inputs)
}

fn outputs_intact(layout: &Layout, manifest: &Manifest) -> Result<bool> {
    for (rel, digest) in &manifest.outputs {
        let path = layout.root().join(rel);
        if !path.is_file() || digest_file(&path)? != *digest {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs one stage, or reports a cache hit when its settings, inputs and
/// outputs are unchanged since the last run. `force` recomputes in every
/// case and overrides a settings mismatch.
pub fn run_stage(stage: Stage, config: &PipelineConfig, force: bool) -> Result<StageRun> {
    let layout = Layout::new(config.output_root());
    let inputs = current_inputs(stage, config, &layout)?;
    let hash = config_hash(stage, config);
    let previous = read_manifest(&layout, stage)?;
    if let Some(prev) = &previous {
        if prev.config_hash != hash && !force {
            return Err(PipelineError::ConfigMismatch { stage: stage.name() });
        }
        if !force && prev.config_hash == hash && prev.inputs == inputs && outputs_intact(&layout, prev)? {
            return Ok(StageRun { stage, cached: true, manifest: prev.clone() });
        }
    }
    let produced = execute(stage, config, &layout)?;
    let mut outputs = BTreeMap::new();
    for path in &produced {
        outputs.insert(layout.relative(path), digest_file(path)?);
    }
    if let Some(prev) = &previous {
        for stale in prev.outputs.keys().filter(|k| !outputs.contains_key(*k)) {
            let _ = fs::remove_file(layout.root().join(stale));
        }
    }
    let manifest = Manifest { stage: stage.name().to_string(), config_hash: hash, inputs, outputs };
    write_json(&layout.manifest(stage), &manifest)?;
    Ok(StageRun { stage, cached: false, manifest })
}

pub fn run_all(config: &PipelineConfig, force: bool) -> Result<Vec<StageRun>> {
    Stage::ALL.iter().map(|&s| run_stage(s, config, force)).collect()
}

fn execute(stage: Stage, config: &PipelineConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    match stage {
        Stage::Ingest => run_ingest(config, layout),
        Stage::Affiliation => run_affiliation(config, layout),
        Stage::Score => run_score(config, layout),
        Stage::Communities => run_communities(config, layout),
        Stage::Consensus => run_consensus(config, layout),
        Stage::Cut => run_cut(config, layout),
        Stage::Backbone => run_backbone(layout),
        Stage::Timeline => run_timeline(config, layout),
        Stage::Subnet => run_subnet(config, layout),
    }
}

fn run_ingest(config: &PipelineConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    let dump = config.resolve(&config.input.dump);
    let reader = open_input(&dump, config.input.dump_compression).map_err(|e| PipelineError::io(&dump, e))?;
    let (persons, entities) =
        ingest_entities(reader, &config.extract_config()).map_err(|e| PipelineError::io(&dump, e))?;

    let index = TitleIndex::from_persons(&persons);
    let links = config.resolve(&config.input.pagelinks);
    let reader = open_input(&links, config.input.pagelinks_compression).map_err(|e| PipelineError::io(&links, e))?;
    let (edges, pagelinks) = parse_pagelinks(reader, &index).map_err(|e| PipelineError::io(&links, e))?;

    write_persons(&layout.persons(), &persons)?;
    write_edges(&layout.raw_links(), &edges)?;
    let report = json!({
        "entities": entities,
        "pagelinks": pagelinks,
        "indexed_titles": index.len(),
    });
    write_json(&layout.report(Stage::Ingest), &report)?;
    Ok(vec![layout.persons(), layout.raw_links(), layout.report(Stage::Ingest)])
}

fn run_affiliation(config: &PipelineConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    let persons = read_persons(&layout.persons())?;
    let mut out = Vec::new();
    let mut report = serde_json::Map::new();
    for dim in Dimension::ALL {
        let threshold = ThresholdConfig::new(config.threshold(dim))?;
        let raw = AffiliationTable::raw(&persons, dim);
        let reduced = raw.reduce(threshold);
        let stats = reference_stats(&raw, &reduced);
        if !stats.is_consistent() || !reduced.check(threshold) {
            return Err(PipelineError::Violations(1));
        }
        write_affiliation(&layout.affiliation(dim), &reduced)?;
        write_value_catalog(&layout.values(dim), &reduced)?;
        write_value_catalog(&layout.raw_values(dim), &raw)?;
        write_json(&layout.stats(dim), &StatsJson::from(stats))?;
        out.extend([layout.affiliation(dim), layout.values(dim), layout.raw_values(dim), layout.stats(dim)]);
        report.insert(
            dim.name().into(),
            json!({
                "min_value_occurrence": threshold.min_value_occurrence,
                "stats": StatsJson::from(stats),
            }),
        );
    }
    write_json(&layout.report(Stage::Affiliation), &report)?;
    out.push(layout.report(Stage::Affiliation));
    Ok(out)
}

/// Nodes touched by at least one edge.
fn incident_nodes(network: &CoocNetwork) -> usize {
    network.edges.iter().flat_map(|e| [e.a, e.b]).collect::<BTreeSet<_>>().len()
}

fn run_score(config: &PipelineConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut report = serde_json::Map::new();
    for dim in Dimension::ALL {
        let table = read_affiliation(&layout.affiliation(dim))?;
        let cfg = config.null_model_config(dim);
        let (all, positive) = score_parallel(&table, cfg)?;
        write_cooc(&layout.cooc(dim, NetworkKind::All), &all)?;
        write_cooc(&layout.cooc(dim, NetworkKind::Positive), &positive)?;
        out.extend([layout.cooc(dim, NetworkKind::All), layout.cooc(dim, NetworkKind::Positive)]);
        let trades = cfg.trades_for(&table);
        report.insert(
            dim.name().into(),
            json!({
                "master_seed": cfg.master_seed,
                "ensemble_size": cfg.ensemble_size,
                "trades_per_sample": trades,
                "axis": config.null_model.axis,
                "residual": config.null_model.residual,
                "all": { "nodes": incident_nodes(&all), "edges": all.edges.len() },
                "positive": { "nodes": incident_nodes(&positive), "edges": positive.edges.len() },
            }),
        );
    }
    write_json(&layout.report(Stage::Score), &report)?;
    out.push(layout.report(Stage::Score));
    Ok(out)
}

fn run_communities(config: &PipelineConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut report = serde_json::Map::new();
    for dim in Dimension::ALL {
        let network = read_cooc(&layout.cooc(dim, NetworkKind::Positive), NetworkKind::Positive)?;
        let graph = WeightedGraph::from_network(&network);
        let sweep = config.sweep_config(dim)?;
        let ensemble = sweep_parallel(&graph, &sweep)?;
        write_partitions(&layout.partitions(dim), &ensemble, &network.nodes)?;
        out.push(layout.partitions(dim));
        let runs: Vec<Value> = ensemble
            .partitions
            .iter()
            .enumerate()
            .map(|(job, p)| {
                let (g, rep) = sweep.job(job);
                json!({
                    "gamma_index": g,
                    "rep": rep,
                    "gamma": p.gamma,
                    "seed": p.seed,
                    "communities": p.num_communities(),
                    "quality": p.quality,
                })
            })
            .collect();
        report.insert(
            dim.name().into(),
            json!({
                "values": network.nodes.len(),
                "gammas": ensemble.gammas,
                "reps_per_gamma": ensemble.reps_per_gamma,
                "master_seed": sweep.master_seed,
                "runs": runs,
            }),
        );
    }
    write_json(&layout.report(Stage::Communities), &report)?;
    out.push(layout.report(Stage::Communities));
    Ok(out)
}

fn run_consensus(config: &PipelineConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut report = serde_json::Map::new();
    for dim in Dimension::ALL {
        let (ensemble, values) = read_partitions(&layout.partitions(dim))?;
        let matrix = mutual_community_matrix(&ensemble, &values)?;
        let tree = hier_cluster(&matrix, config.linkage());
        write_consensus(&layout.consensus(dim), &matrix)?;
        write_dendrogram(&layout.dendrogram(dim), &tree)?;
        out.extend([layout.consensus(dim), layout.dendrogram(dim)]);
        report.insert(
            dim.name().into(),
            json!({
                "values": values.len(),
                "partitions": ensemble.partitions.len(),
                "linkage": config.sweep.linkage,
                "root_height": tree.merges.last().map(|m| m.height),
            }),
        );
    }
    write_json(&layout.report(Stage::Consensus), &report)?;
    out.push(layout.report(Stage::Consensus));
    Ok(out)
}

fn cluster_sizes(a: &ClusterAssignment) -> Vec<usize> {
    let mut sizes = vec![0; a.k as usize];
    for &c in &a.assignment {
        sizes[c as usize - 1] += 1;
    }
    sizes
}

fn run_cut(config: &PipelineConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut report = serde_json::Map::new();
    for dim in Dimension::ALL {
        let tree = read_dendrogram(&layout.dendrogram(dim))?;
        let clusters = cut_tree(&tree, config.clusters(dim))?;
        write_clusters(&layout.clusters(dim), &clusters)?;
        out.push(layout.clusters(dim));
        report.insert(dim.name().into(), json!({ "k": clusters.k, "sizes": cluster_sizes(&clusters) }));
    }
    write_json(&layout.report(Stage::Cut), &report)?;
    out.push(layout.report(Stage::Cut));
    Ok(out)
}

fn run_backbone(layout: &Layout) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut report = serde_json::Map::new();
    for dim in Dimension::ALL {
        let network = read_cooc(&layout.cooc(dim, NetworkKind::Positive), NetworkKind::Positive)?;
        let result = extract_backbone(&network)?;
        write_backbone(&layout.backbone(dim), &network, &result)?;
        out.push(layout.backbone(dim));
        let backbone_nodes = result.backbone().iter().flat_map(|e| [e.a, e.b]).collect::<BTreeSet<_>>().len();
        report.insert(
            dim.name().into(),
            json!({
                "positive_nodes": network.nodes.len(),
                "positive_edges": network.edges.len(),
                "gcc_nodes": result.gcc_nodes.len(),
                "stop_index": result.stop_index,
                "backbone_nodes": backbone_nodes,
                "off_gcc_edges": result.off_gcc.len(),
            }),
        );
    }
    write_json(&layout.report(Stage::Backbone), &report)?;
    out.push(layout.report(Stage::Backbone));
    Ok(out)
}

fn run_timeline(config: &PipelineConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    let persons = read_persons(&layout.persons())?;
    let policy = config.lifespan_policy();
    let mut out = Vec::new();
    let mut report = serde_json::Map::new();
    for dim in Dimension::ALL {
        let values = read_value_catalog(&layout.values(dim))?;
        let mut holders: BTreeMap<&str, Vec<&PersonRecord>> =
            values.iter().map(|(v, _)| (v.as_str(), Vec::new())).collect();
        for p in &persons {
            for v in p.values(dim) {
                if let Some(list) = holders.get_mut(v.as_str()) {
                    list.push(p);
                }
            }
        }
        let series: Vec<_> =
            holders.par_iter().map(|(v, ps)| activity_series(ps.iter().copied(), dim, v, policy)).collect();
        let ordering = order_values(&series, config.timeline.depth);
        write_timeline(&layout.timeline(dim), &series)?;
        write_ordering(&layout.ordering(dim), &ordering)?;
        out.extend([layout.timeline(dim), layout.ordering(dim)]);
        let depths: Vec<usize> = series.iter().map(|s| default_depth(s.birth_years.len())).collect();
        report.insert(
            dim.name().into(),
            json!({
                "values": series.len(),
                "ordered": ordering.entries.len(),
                "excluded": ordering.excluded,
                "depth": config.timeline.depth,
                "max_default_depth": depths.iter().max(),
                "undated_holders": series.iter().map(|s| s.skipped as u64).sum::<u64>(),
            }),
        );
    }
    write_json(&layout.report(Stage::Timeline), &report)?;
    out.push(layout.report(Stage::Timeline));
    Ok(out)
}

fn graph_counts(g: &HyperlinkGraph) -> Value {
    json!({
        "nodes": g.num_nodes(),
        "edges": g.num_edges(),
        "directed_links": g.num_directed_links(),
    })
}

fn directed_rows(g: &HyperlinkGraph) -> Vec<(&str, &str, u8)> {
    g.edges
        .iter()
        .zip(&g.directions)
        .map(|(&(a, b), &d)| (g.nodes[a as usize].as_str(), g.nodes[b as usize].as_str(), d))
        .collect()
}

fn subnet_spec(
    section: &crate::config::SubnetSection,
    assignments: &BTreeMap<Dimension, ClusterAssignment>,
) -> Result<SubnetSpec> {
    let dimension = Dimension::parse(&section.dimension).expect("validated dimension");
    let assignment = &assignments[&dimension];
    let mut clusters: BTreeSet<u32> = section.clusters.iter().copied().collect();
    for value in &section.clusters_of {
        let c = assignment.cluster_of(value).ok_or_else(|| {
            PipelineError::Config(format!(
                "subnet `{}`: value `{value}` is not among the clustered {} values",
                section.name,
                dimension.name()
            ))
        })?;
        clusters.insert(c);
    }
    Ok(SubnetSpec { dimension, clusters: clusters.into_iter().collect() })
}

fn run_subnet(config: &PipelineConfig, layout: &Layout) -> Result<Vec<PathBuf>> {
    let persons = read_persons(&layout.persons())?;
    let index = PersonIndex::new(&persons);
    let raw = read_edges(&layout.raw_links())?;
    let gap = config.biograph.max_birth_gap;
    let (graph, build) = build_graph(raw.iter().map(|(s, t)| (s.as_str(), t.as_str())), &index, gap);
    if graph.gap_violation(gap).is_some() {
        return Err(PipelineError::Violations(1));
    }
    write_directed_edges(&layout.hyperlinks(), &directed_rows(&graph))?;
    let mut out = vec![layout.hyperlinks()];

    let mut assignments = BTreeMap::new();
    for dim in Dimension::ALL {
        assignments.insert(dim, read_clusters(&layout.clusters(dim))?);
    }
    let mut subnets = serde_json::Map::new();
    for section in &config.subnets {
        let spec = subnet_spec(section, &assignments)?;
        let selected = select_subnet(&graph, &index, &spec, &assignments[&spec.dimension])?;
        let gcc = if selected.nodes.is_empty() { selected.clone() } else { giant_component(&selected)? };
        let color_dim = spec.color_dimension();
        let colors = colorize(&gcc, &index, color_dim, &assignments[&color_dim]);
        let attrs: Vec<NodeAttributes> = gcc
            .nodes
            .iter()
            .zip(&colors)
            .map(|(id, &cluster)| NodeAttributes {
                cluster,
                color_index: cluster.and_then(|c| assignments[&color_dim].color_of(c)),
                article_title: index.get(id).and_then(|p| p.article_title.clone()),
            })
            .collect();
        let name = section.name.as_str();
        write_directed_edges(&layout.subnet_edges(name), &directed_rows(&gcc))?;
        write_graphml(&layout.graphml(name), &gcc, &attrs)?;
        write_gexf(&layout.gexf(name), &gcc, &attrs)?;
        out.extend([layout.subnet_edges(name), layout.graphml(name), layout.gexf(name)]);
        subnets.insert(
            name.into(),
            json!({
                "dimension": spec.dimension.name(),
                "clusters": spec.clusters,
                "color_dimension": color_dim.name(),
                "selected": graph_counts(&selected),
                "gcc": graph_counts(&gcc),
                "unassigned": colors.iter().filter(|c| c.is_none()).count(),
            }),
        );
    }
    let report = json!({
        "max_birth_gap": gap,
        "build": {
            "input_edges": build.input_edges,
            "unknown_person": build.unknown_person,
            "self_links": build.self_links,
            "missing_birth": build.missing_birth,
            "gap_exceeded": build.gap_exceeded,
            "directed_edges": build.directed_edges,
            "undirected_edges": build.undirected_edges,
        },
        "full": graph_counts(&graph),
        "subnets": subnets,
    });
    write_json(&layout.report(Stage::Subnet), &report)?;
    out.push(layout.report(Stage::Subnet));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dag_is_topological_and_complete() {
        for (i, s) in Stage::ALL.iter().enumerate() {
            assert_eq!(Stage::parse(s.name()), Some(*s));
            for d in s.dependencies() {
                assert!(Stage::ALL[..i].contains(d), "{} depends on later {}", s.name(), d.name());
            }
        }
    }

    #[test]
    fn settings_hash_tracks_only_relevant_fields() {
        let base = PipelineConfig::default();
        let mut other = base.clone();
        other.occupation.clusters = Some(5);
        assert_ne!(config_hash(Stage::Cut, &base), config_hash(Stage::Cut, &other));
        assert_eq!(config_hash(Stage::Score, &base), config_hash(Stage::Score, &other));
        other.output_dir = PathBuf::from("elsewhere");
        assert_eq!(config_hash(Stage::Ingest, &base), config_hash(Stage::Ingest, &other));
    }

    #[test]
    fn relative_names_use_forward_slashes() {
        let layout = Layout::new("/tmp/out");
        assert_eq!(layout.relative(&layout.clusters(Dimension::Occupation)), "cut/occupation_clusters.tsv");
    }
}
