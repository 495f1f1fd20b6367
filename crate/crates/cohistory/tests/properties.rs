use std::fmt::Write as _;

use cohistory::formats::{read_cooc, read_persons, write_cooc, write_persons};
use cohistory::ingest::{
    extract_person, normalize_title, parse_triple, percent_decode, title_from_iri, EntityDoc, ExtractConfig, Term,
};
use cohistory_core::nullmodel::{CoocEdge, CoocNetwork, NetworkKind};
use cohistory_core::person::{DatePrecision, PersonRecord};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Value {
    Item(u32),
    Time { year: i32, precision: u8 },
    Absent,
}

#[derive(Debug, Clone)]
struct ClaimSpec {
    property: &'static str,
    rank: &'static str,
    value: Value,
}

fn arb_claim() -> impl Strategy<Value = ClaimSpec> {
    let property = prop::sample::select(vec!["P31", "P27", "P106", "P569", "P570", "P21"]);
    let rank = prop::sample::select(vec!["preferred", "normal", "deprecated"]);
    let value = prop_oneof![
        (1u32..12).prop_map(Value::Item),
        (-3000i32..2100, 0u8..15).prop_map(|(year, precision)| Value::Time { year, precision }),
        Just(Value::Absent),
    ];
    (property, rank, value).prop_map(|(property, rank, value)| ClaimSpec { property, rank, value })
}

fn claim_json(c: &ClaimSpec) -> String {
    let snak = match &c.value {
        Value::Item(q) => format!(
            r#"{{"snaktype":"value","property":"{}","datavalue":{{"value":{{"entity-type":"item","numeric-id":{q}}},"type":"wikibase-entityid"}}}}"#,
            c.property
        ),
        Value::Time { year, precision } => {
            let sign = if *year < 0 { '-' } else { '+' };
            format!(
                r#"{{"snaktype":"value","property":"{}","datavalue":{{"value":{{"time":"{sign}{:04}-01-01T00:00:00Z","precision":{precision}}},"type":"time"}}}}"#,
                c.property,
                year.unsigned_abs()
            )
        }
        Value::Absent => format!(r#"{{"snaktype":"novalue","property":"{}"}}"#, c.property),
    };
    format!(r#"{{"mainsnak":{snak},"type":"statement","rank":"{}"}}"#, c.rank)
}

fn entity_json(claims: &[ClaimSpec], title: Option<&str>) -> String {
    let mut by_prop: std::collections::BTreeMap<&str, Vec<String>> = Default::default();
    for c in claims {
        by_prop.entry(c.property).or_default().push(claim_json(c));
    }
    let mut body = String::new();
    for (i, (p, list)) in by_prop.iter().enumerate() {
        if i > 0 {
            body.push(',');
        }
        write!(body, r#""{p}":[{}]"#, list.join(",")).unwrap();
    }
    let sitelinks = title.map_or("[]".to_string(), |t| {
        format!(r#"{{"enwiki":{{"site":"enwiki","title":{}}}}}"#, serde_json::to_string(t).unwrap())
    });
    format!(r#"{{"id":"Q1","type":"item","claims":{{{body}}},"sitelinks":{sitelinks}}}"#)
}

fn has_precise(claims: &[ClaimSpec], property: &str) -> bool {
    claims.iter().any(|c| {
        c.property == property
            && c.rank != "deprecated"
            && matches!(c.value, Value::Time { precision, .. } if precision >= 9)
    })
}

fn arb_person() -> impl Strategy<Value = PersonRecord> {
    let ids = prop::collection::btree_set("Q[1-9][0-9]{0,4}", 0..4);
    (
        "Q[1-9][0-9]{0,6}",
        prop::option::of(-3000i32..2020),
        prop::option::of(0i32..120),
        ids.clone(),
        ids,
        prop::option::of("[^\t\n\r]{1,20}"),
    )
        .prop_map(|(id, birth, span, nats, occs, title)| PersonRecord {
            person_id: id,
            birth_year: birth,
            birth_precision: DatePrecision::YearOrFiner,
            death_year: birth.zip(span).map(|(b, s)| b + s),
            nationality_ids: nats.into_iter().collect(),
            occupation_ids: occs.into_iter().collect(),
            article_title: title.filter(|t| !t.trim().is_empty() && t.trim() == t),
        })
}

fn encode(title: &str) -> String {
    let mut out = String::new();
    for b in title.replace(' ', "_").bytes() {
        if b.is_ascii_alphanumeric() || b == b'_' {
            out.push(b as char);
        } else {
            write!(out, "%{b:02X}").unwrap();
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn extraction_is_total_and_yields_valid_records(claims in prop::collection::vec(arb_claim(), 0..14), title in prop::option::of("[A-Za-z ]{1,12}")) {
        let text = entity_json(&claims, title.as_deref());
        let doc = EntityDoc::parse(&text).unwrap();
        let human = claims.iter().any(|c| c.property == "P31" && c.rank != "deprecated" && matches!(c.value, Value::Item(5)));
        match extract_person(&doc, &ExtractConfig::default()) {
            None => prop_assert!(!human),
            Some(p) => {
                prop_assert!(human);
                prop_assert!(p.is_valid());
                prop_assert_eq!(p.birth_year.is_some(), has_precise(&claims, "P569"));
                if p.death_year.is_some() {
                    prop_assert!(has_precise(&claims, "P570"));
                }
                for (prop_id, values) in [("P27", &p.nationality_ids), ("P106", &p.occupation_ids)] {
                    for v in values {
                        let listed = claims.iter().any(|c| {
                            c.property == prop_id && c.rank != "deprecated" && matches!(c.value, Value::Item(q) if format!("Q{q}") == *v)
                        });
                        prop_assert!(listed, "{} not claimed under {}", v, prop_id);
                    }
                }
                prop_assert_eq!(p.article_title, title);
            }
        }
    }

    #[test]
    fn persons_table_round_trips(persons in prop::collection::vec(arb_person(), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("persons.tsv");
        write_persons(&path, &persons).unwrap();
        prop_assert_eq!(read_persons(&path).unwrap(), persons);
    }

    #[test]
    fn scored_network_round_trips(raw in prop::collection::btree_map((0u32..12, 0u32..12), (0u64..50, 0.0f64..40.0, 0.0f64..9.0), 1..30)) {
        let nodes: Vec<String> = (0..12).map(|i| format!("Q{}", 100 + i)).collect();
        let edges: Vec<CoocEdge> = raw
            .into_iter()
            .filter(|((a, b), _)| a < b)
            .map(|((a, b), (observed, expected, sigma))| CoocEdge {
                a, b, observed, expected, sigma,
                residual: (observed as f64 - expected) / expected.max(0.01).sqrt(),
            })
            .collect();
        prop_assume!(!edges.is_empty());
        let network = CoocNetwork { nodes, edges, kind: NetworkKind::All };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cooc.tsv");
        write_cooc(&path, &network).unwrap();
        let back = read_cooc(&path, NetworkKind::All).unwrap();
        let pairs = |n: &CoocNetwork| -> Vec<(String, String, u64, u64, u64, u64)> {
            n.edges
                .iter()
                .map(|e| {
                    let (a, b) = n.endpoints(e);
                    (a.to_string(), b.to_string(), e.observed, e.expected.to_bits(), e.sigma.to_bits(), e.residual.to_bits())
                })
                .collect()
        };
        prop_assert_eq!(pairs(&back), pairs(&network));
    }

    #[test]
    fn normalization_is_idempotent(title in "\\PC{0,30}") {
        let once = normalize_title(&title);
        prop_assert_eq!(normalize_title(&once), once.clone());
        prop_assert!(!once.contains('_'));
    }

    #[test]
    fn encoded_iris_decode_to_the_sitelink_title(title in "[\\p{L}\\p{N} ,.'&()%+-]{1,25}") {
        prop_assume!(!title.trim().is_empty());
        prop_assert_eq!(percent_decode(&encode(&title)), title.replace(' ', "_"));
        let iri = format!("http://dbpedia.org/resource/{}", encode(&title));
        prop_assert_eq!(title_from_iri(&iri), Some(normalize_title(&title)));
    }

    #[test]
    fn triples_between_encoded_iris_parse(a in "[A-Za-z0-9_%]{1,20}", b in "[A-Za-z0-9_%]{1,20}") {
        let line = format!("<http://dbpedia.org/resource/{a}> <http://dbpedia.org/ontology/wikiPageWikiLink> <http://dbpedia.org/resource/{b}> .");
        let t = parse_triple(&line).unwrap().unwrap();
        prop_assert_eq!(t.subject, Term::Iri(format!("http://dbpedia.org/resource/{a}")));
        prop_assert_eq!(t.object, Term::Iri(format!("http://dbpedia.org/resource/{b}")));
    }

    #[test]
    fn arbitrary_lines_never_panic_the_triple_parser(line in "\\PC{0,80}") {
        let _ = parse_triple(&line);
    }
}
