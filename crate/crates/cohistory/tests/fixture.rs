//! Cross-stage bookkeeping on a full run of the bundled fixture.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use common::*;
use serde_json::Value;

fn artifacts() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("fixture_reconciliation");
        let _ = std::fs::remove_dir_all(&dir);
        run_fixture(&dir, &[]);
        dir
    })
}

fn report(stage: &str) -> Value {
    read_json(&artifacts().join(stage).join("report.json"))
}

fn rows(name: &str) -> Vec<Vec<String>> {
    tsv_rows(&artifacts().join(name))
}

const DIMS: [(&str, &str); 2] = [("nationality", "persons_with_p27"), ("occupation", "persons_with_p106")];

#[test]
fn ingest_counts_match_the_persons_table() {
    let r = report("ingest");
    let persons = rows("ingest/persons.tsv");
    assert_eq!(persons.len(), 200);
    assert_eq!(r["entities"]["persons_kept"], 200);
    assert_eq!(r["entities"]["malformed_records"], 1);
    assert_eq!(r["entities"]["duplicate_persons"], 1);
    assert_eq!(r["entities"]["persons_with_p27"], persons.iter().filter(|p| !p[3].is_empty()).count());
    assert_eq!(r["entities"]["persons_with_p106"], persons.iter().filter(|p| !p[4].is_empty()).count());
    assert_eq!(r["pagelinks"]["edges"], rows("ingest/hyperlinks_raw.tsv").len());
    assert_eq!(r["pagelinks"]["malformed_lines"], 2);
    assert_eq!(r["pagelinks"]["self_links"], 1);
}

#[test]
fn affiliation_counts_reconcile_with_ingest() {
    let ingest = report("ingest");
    let aff = report("affiliation");
    for (dim, holders) in DIMS {
        let stats = &aff[dim]["stats"];
        assert_eq!(stats["raw"]["persons"], ingest["entities"][holders], "{dim}");
        let table = rows(&format!("affiliation/{dim}_affiliation.tsv"));
        let catalog = rows(&format!("affiliation/{dim}_values.tsv"));
        assert_eq!(stats["reduced"]["links"], table.len(), "{dim}");
        assert_eq!(stats["reduced"]["values"], catalog.len(), "{dim}");
        let total: u64 = catalog.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
        assert_eq!(total, table.len() as u64, "{dim}");
        assert_eq!(
            rows(&format!("affiliation/{dim}_values_raw.tsv")).len() as u64,
            stats["raw"]["values"].as_u64().unwrap()
        );
    }
    // The rare values sit below the fixture thresholds.
    assert_eq!(aff["nationality"]["stats"]["raw"]["values"], 13);
    assert_eq!(aff["nationality"]["stats"]["reduced"]["values"], 12);
    assert_eq!(aff["occupation"]["stats"]["raw"]["values"], 16);
    assert_eq!(aff["occupation"]["stats"]["reduced"]["values"], 15);
}

#[test]
fn network_sizes_agree_across_stages() {
    let score = report("score");
    let consensus = report("consensus");
    let cut = report("cut");
    let backbone = report("backbone");
    let timeline = report("timeline");
    for (dim, _) in DIMS {
        let all = rows(&format!("score/{dim}_cooc_all.tsv"));
        let positive = rows(&format!("score/{dim}_cooc_positive.tsv"));
        assert_eq!(score[dim]["all"]["edges"], all.len());
        assert_eq!(score[dim]["positive"]["edges"], positive.len());
        let positive_nodes: BTreeSet<&String> = positive.iter().flat_map(|r| [&r[0], &r[1]]).collect();
        assert_eq!(score[dim]["positive"]["nodes"], positive_nodes.len());

        assert_eq!(consensus[dim]["values"], positive_nodes.len());
        let clusters = rows(&format!("cut/{dim}_clusters.tsv"));
        assert_eq!(clusters.len(), positive_nodes.len());
        let sizes: u64 = cut[dim]["sizes"].as_array().unwrap().iter().map(|s| s.as_u64().unwrap()).sum();
        assert_eq!(sizes, clusters.len() as u64);

        let bb = rows(&format!("backbone/{dim}_backbone.tsv"));
        assert_eq!(bb.len(), positive.len());
        assert_eq!(backbone[dim]["positive_edges"], positive.len());
        let kept = bb.iter().filter(|r| r[4] == "1").count();
        assert_eq!(backbone[dim]["stop_index"], kept);

        let catalog = rows(&format!("affiliation/{dim}_values.tsv"));
        assert_eq!(timeline[dim]["values"], catalog.len());
        assert_eq!(rows(&format!("timeline/{dim}_ordering.tsv")).len(), catalog.len());
    }
}

#[test]
fn planted_blocks_are_recovered() {
    for (dim, prefixes) in [("nationality", ["Q10", "Q11", "Q12"]), ("occupation", ["Q20", "Q21", "Q22"])] {
        let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for r in rows(&format!("cut/{dim}_clusters.tsv")) {
            groups.entry(r[1].clone()).or_default().insert(r[0][..3].to_string());
        }
        assert_eq!(groups.len(), 3, "{dim}");
        let blocks: BTreeSet<Vec<String>> = groups.values().map(|s| s.iter().cloned().collect()).collect();
        let expected: BTreeSet<Vec<String>> = prefixes.iter().map(|p| vec![p.to_string()]).collect();
        assert_eq!(blocks, expected, "{dim}");
    }
}

#[test]
fn subnet_graphs_are_drawn_from_the_contemporaneous_graph() {
    let r = report("subnet");
    let full = rows("subnet/hyperlinks.tsv");
    assert_eq!(r["full"]["edges"], full.len());
    let full_set: BTreeSet<(String, String)> = full.iter().map(|e| (e[0].clone(), e[1].clone())).collect();
    for name in ["first_region", "arts"] {
        let edges = rows(&format!("subnet/{name}_edges.tsv"));
        assert_eq!(r["subnets"][name]["gcc"]["edges"], edges.len());
        assert!(!edges.is_empty(), "{name}");
        for e in &edges {
            assert!(full_set.contains(&(e[0].clone(), e[1].clone())), "{name}: {e:?}");
        }
        let graphml = std::fs::read_to_string(artifacts().join(format!("subnet/{name}.graphml"))).unwrap();
        assert_eq!(graphml.matches("<edge ").count(), edges.len());
        let gexf = std::fs::read_to_string(artifacts().join(format!("subnet/{name}.gexf"))).unwrap();
        assert_eq!(gexf.matches("<edge ").count(), edges.len());
    }
}
