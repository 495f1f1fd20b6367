//! Regenerates the bundled synthetic fixture:
//!
//!     cargo run -p cohistory --example make_fixture -- fixtures/synthetic200
//!
//! 200 persons in three regional nationality blocks and three occupation
//! blocks, spread over five eras, plus non-person entities, dump noise and a
//! page-link file with planted edge cases.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PERSONS: usize = 200;
const SEED: u64 = 200;

const NATIONALITY_BLOCKS: [[u32; 4]; 3] = [[101, 102, 103, 104], [111, 112, 113, 114], [121, 122, 123, 124]];
/// Below the fixture threshold of 3 holders.
const RARE_NATIONALITY: u32 = 199;
const OCCUPATION_BLOCKS: [[u32; 5]; 3] =
    [[201, 202, 203, 204, 205], [211, 212, 213, 214, 215], [221, 222, 223, 224, 225]];
/// Below the fixture threshold of 5 holders.
const RARE_OCCUPATION: u32 = 299;
const ERAS: [(i32, i32); 5] = [(-500, -150), (800, 1150), (1450, 1700), (1780, 1880), (1890, 1990)];

const SYLLABLES: [&str; 16] =
    ["ka", "lo", "mi", "ren", "sa", "tor", "vi", "el", "an", "dru", "fe", "gi", "ho", "ju", "ne", "pa"];

struct Person {
    id: u32,
    birth: Option<(i32, u8)>,
    death: Option<i32>,
    nationalities: Vec<u32>,
    occupations: Vec<u32>,
    title: Option<String>,
    other_wiki_only: bool,
}

fn name(rng: &mut ChaCha8Rng, i: usize) -> String {
    let mut word = |n: usize| {
        let mut w: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        w[..1].make_ascii_uppercase();
        w
    };
    let first = word(2);
    let last = word(3);
    match i {
        7 => format!("Élodie {last}"),
        8 => format!("{first} & {last}"),
        9 => format!("{first} {last} (100%)"),
        _ => format!("{first} {last} {i}"),
    }
}

fn make_persons(rng: &mut ChaCha8Rng) -> Vec<Person> {
    let mut out = Vec::new();
    for i in 0..PERSONS {
        let era = ERAS[i % ERAS.len()];
        let region = (i / 5) % 3;
        let block = if rng.gen_bool(0.7) { i % 3 } else { rng.gen_range(0..3) };

        let mut nationalities = vec![*NATIONALITY_BLOCKS[region].choose(rng).unwrap()];
        let extra: f64 = rng.gen();
        if extra < 0.3 {
            nationalities.push(*NATIONALITY_BLOCKS[region].choose(rng).unwrap());
        }
        if extra < 0.06 {
            nationalities.push(*NATIONALITY_BLOCKS[(region + 1) % 3].choose(rng).unwrap());
        }
        let mut occupations = vec![*OCCUPATION_BLOCKS[block].choose(rng).unwrap()];
        let extra: f64 = rng.gen();
        if extra < 0.45 {
            occupations.push(*OCCUPATION_BLOCKS[block].choose(rng).unwrap());
        }
        if extra < 0.1 {
            occupations.push(*OCCUPATION_BLOCKS[(block + 1) % 3].choose(rng).unwrap());
        }
        if i % 100 == 3 {
            nationalities.push(RARE_NATIONALITY);
        }
        if i % 60 == 4 {
            occupations.push(RARE_OCCUPATION);
        }
        if i % 25 == 11 {
            nationalities.clear();
        }
        if i % 33 == 12 {
            occupations.clear();
        }

        let year = rng.gen_range(era.0..=era.1);
        let birth = match i % 20 {
            13 => None,
            17 => Some((year, 7)),
            _ => Some((year, if rng.gen_bool(0.5) { 9 } else { 11 })),
        };
        let death = match (birth, i % 10) {
            (Some((b, _)), 0..=6) => Some(b + rng.gen_range(25..95)),
            _ => None,
        };
        out.push(Person {
            id: 3000 + i as u32,
            birth,
            death,
            nationalities,
            occupations,
            title: (i % 40 != 21).then(|| name(rng, i)),
            other_wiki_only: i % 40 == 21,
        });
    }
    // Planted contemporaneity boundary: exactly 75 and 76 years apart.
    out[0].birth = Some((1850, 11));
    out[1].birth = Some((1925, 11));
    out[2].birth = Some((1926, 9));
    for p in &mut out[..3] {
        p.death = None;
    }
    // Death recorded before birth; the extractor drops it.
    out[5].birth = Some((1800, 9));
    out[5].death = Some(1790);
    out
}

fn item_claim(property: &str, q: u32, rank: &str, numeric_only: bool) -> String {
    let value = if numeric_only {
        format!(r#"{{"entity-type":"item","numeric-id":{q}}}"#)
    } else {
        format!(r#"{{"entity-type":"item","numeric-id":{q},"id":"Q{q}"}}"#)
    };
    format!(
        r#"{{"mainsnak":{{"snaktype":"value","property":"{property}","datavalue":{{"value":{value},"type":"wikibase-entityid"}},"datatype":"wikibase-item"}},"type":"statement","rank":"{rank}"}}"#
    )
}

fn time_claim(property: &str, year: i32, precision: u8) -> String {
    let sign = if year <= 0 { '-' } else { '+' };
    // Historical numbering in the dump: astronomical 0 is written -0001.
    let shown = if year <= 0 { 1 - year } else { year };
    format!(
        r#"{{"mainsnak":{{"snaktype":"value","property":"{property}","datavalue":{{"value":{{"time":"{sign}{shown:04}-00-00T00:00:00Z","timezone":0,"before":0,"after":0,"precision":{precision},"calendarmodel":"http://www.wikidata.org/entity/Q1985727"}},"type":"time"}},"datatype":"time"}},"type":"statement","rank":"normal"}}"#
    )
}

fn entity_json(p: &Person, i: usize) -> String {
    let numeric_only = i % 9 == 4;
    let mut instance = vec![item_claim("P31", 5, "normal", numeric_only)];
    if i % 37 == 6 {
        instance.insert(0, item_claim("P31", 215627, "normal", false));
    }
    let mut claims = vec![format!(r#""P31":[{}]"#, instance.join(","))];
    let mut p27: Vec<String> = p.nationalities.iter().map(|&q| item_claim("P27", q, "normal", numeric_only)).collect();
    if i % 45 == 10 {
        p27.push(item_claim("P27", NATIONALITY_BLOCKS[2][3], "deprecated", false));
    }
    if !p27.is_empty() {
        claims.push(format!(r#""P27":[{}]"#, p27.join(",")));
    }
    if !p.occupations.is_empty() {
        let p106: Vec<String> = p.occupations.iter().map(|&q| item_claim("P106", q, "normal", false)).collect();
        claims.push(format!(r#""P106":[{}]"#, p106.join(",")));
    }
    if let Some((year, precision)) = p.birth {
        claims.push(format!(r#""P569":[{}]"#, time_claim("P569", year, precision)));
    }
    if let Some(year) = p.death {
        claims.push(format!(r#""P570":[{}]"#, time_claim("P570", year, 9)));
    }
    let sitelinks = match (&p.title, p.other_wiki_only) {
        (Some(t), _) => format!(
            r#"{{"enwiki":{{"site":"enwiki","title":{},"badges":[]}},"dewiki":{{"site":"dewiki","title":{},"badges":[]}}}}"#,
            json_string(t),
            json_string(t)
        ),
        (None, true) => r#"{"dewiki":{"site":"dewiki","title":"Nur Deutsch","badges":[]}}"#.to_string(),
        (None, false) => "[]".to_string(),
    };
    format!(
        r#"{{"type":"item","id":"Q{}","labels":{{"en":{{"language":"en","value":"person {i}"}}}},"claims":{{{}}},"sitelinks":{sitelinks}}}"#,
        p.id,
        claims.join(",")
    )
}

fn json_string(text: &str) -> String {
    let mut out = String::from("\"");
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if c.is_ascii() => out.push(c),
            c => {
                let mut buf = [0u16; 2];
                for unit in c.encode_utf16(&mut buf) {
                    write!(out, "\\u{unit:04x}").unwrap();
                }
            }
        }
    }
    out.push('"');
    out
}

fn non_person(q: u32, class: u32, label: &str) -> String {
    format!(
        r#"{{"type":"item","id":"Q{q}","labels":{{"en":{{"language":"en","value":"{label}"}}}},"claims":{{"P31":[{}]}},"sitelinks":{{"enwiki":{{"site":"enwiki","title":"{label}","badges":[]}}}}}}"#,
        item_claim("P31", class, "normal", false)
    )
}

fn dump(persons: &[Person]) -> String {
    let mut lines = Vec::new();
    for (i, p) in persons.iter().enumerate() {
        lines.push(entity_json(p, i));
        if i % 20 == 9 {
            lines.push(non_person(9000 + i as u32, if i % 40 == 9 { 11424 } else { 515 }, &format!("Place {i}")));
        }
        if i == 120 {
            lines.push(r#"{"type":"item","id":"Q9999","claims":{"P31":[{"mainsnak""#.to_string());
        }
        if i == 150 {
            // The same document twice.
            lines.push(entity_json(&persons[42], 42));
        }
    }
    let mut out = String::from("[\n");
    let n = lines.len();
    for (i, l) in lines.into_iter().enumerate() {
        out.push_str(&l);
        out.push_str(if i + 1 < n { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

fn iri(title: &str) -> String {
    let mut out = String::from("http://dbpedia.org/resource/");
    for c in title.replace(' ', "_").chars() {
        match c {
            c if c.is_ascii_alphanumeric() || "_-.()/,".contains(c) => out.push(c),
            c => {
                let mut buf = [0u8; 4];
                for b in c.encode_utf8(&mut buf).bytes() {
                    write!(out, "%{b:02X}").unwrap();
                }
            }
        }
    }
    out
}

const LINK: &str = "http://dbpedia.org/ontology/wikiPageWikiLink";

fn triple(source: &str, target: &str) -> String {
    format!("<{}> <{LINK}> <{}> .\n", iri(source), iri(target))
}

fn pagelinks(rng: &mut ChaCha8Rng, persons: &[Person]) -> String {
    let titled: Vec<&Person> = persons.iter().filter(|p| p.title.is_some()).collect();
    let title = |p: &Person| p.title.clone().unwrap();
    let born = |p: &Person| p.birth.map(|b| b.0);
    let mut out = String::from("# synthetic page links\n\n");
    for p in &titled {
        let near: Vec<&&Person> = titled
            .iter()
            .filter(|q| q.id != p.id)
            .filter(|q| match (born(p), born(q)) {
                (Some(a), Some(b)) => (a - b).abs() <= 60,
                _ => false,
            })
            .collect();
        for q in near.choose_multiple(rng, 3) {
            out.push_str(&triple(&title(p), &title(q)));
        }
        if rng.gen_bool(0.3) {
            let q = titled.choose(rng).unwrap();
            if q.id != p.id {
                out.push_str(&triple(&title(p), &title(q)));
            }
        }
        if rng.gen_bool(0.5) {
            out.push_str(&triple(&title(p), &format!("Place {}", rng.gen_range(0..20))));
        }
    }
    let (a, b, c) = (title(&persons[0]), title(&persons[1]), title(&persons[2]));
    out.push_str(&triple(&a, &b));
    out.push_str(&triple(&a, &c));
    out.push_str(&triple(&b, &a));
    out.push_str(&triple(&b, &a));
    out.push_str(&triple(&c, &c));
    // First letter lowercased in the IRI.
    let lower = {
        let t = title(&persons[3]);
        let mut chars = t.chars();
        let first = chars.next().unwrap().to_lowercase().collect::<String>();
        first + chars.as_str()
    };
    out.push_str(&triple(&lower, &title(&persons[4])));
    out.push_str(&format!(
        "<{}> <http://www.w3.org/2000/01/rdf-schema#label> \"{}\"@en .\n",
        iri(&title(&persons[6])),
        title(&persons[6])
    ));
    out.push_str("<http://dbpedia.org/resource/Broken> <http://p> .\n");
    out.push_str("this is not a triple\n");
    out
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures/synthetic200".into()));
    fs::create_dir_all(&dir).expect("create fixture directory");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let persons = make_persons(&mut rng);
    fs::write(dir.join("entities.json"), dump(&persons)).expect("write dump");
    fs::write(dir.join("pagelinks.nt"), pagelinks(&mut rng, &persons)).expect("write page links");
    println!("wrote {} persons to {}", persons.len(), dir.display());
}
