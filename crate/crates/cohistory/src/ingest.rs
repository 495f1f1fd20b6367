//! Streaming readers for entity dumps and page-link triple files.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use bzip2::read::MultiBzDecoder;
use cohistory_core::{DatePrecision, PersonRecord};
use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::Value;

pub const INSTANCE_OF: &str = "P31";
pub const CITIZENSHIP: &str = "P27";
pub const OCCUPATION: &str = "P106";
pub const DATE_OF_BIRTH: &str = "P569";
pub const DATE_OF_DEATH: &str = "P570";
const KEPT_PROPERTIES: [&str; 5] = [INSTANCE_OF, CITIZENSHIP, OCCUPATION, DATE_OF_BIRTH, DATE_OF_DEATH];

/// Time precision code for "year"; larger codes are finer.
pub const YEAR_PRECISION: u8 = 9;

const READ_BUFFER: usize = 1 << 20;
const BATCH_LINES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compression {
    None,
    Gzip,
    Bzip2,
}

impl Compression {
    /// Guess from the file extension.
    pub fn from_path(path: &Path) -> Compression {
        match path.extension().and_then(|e| e.to_str()) {
            Some("gz") => Compression::Gzip,
            Some("bz2") => Compression::Bzip2,
            _ => Compression::None,
        }
    }
}

pub fn decoder<'a, R: Read + 'a>(inner: R, compression: Compression) -> Box<dyn BufRead + 'a> {
    match compression {
        Compression::None => Box::new(BufReader::with_capacity(READ_BUFFER, inner)),
        Compression::Gzip => Box::new(BufReader::with_capacity(READ_BUFFER, MultiGzDecoder::new(inner))),
        Compression::Bzip2 => Box::new(BufReader::with_capacity(READ_BUFFER, MultiBzDecoder::new(inner))),
    }
}

/// Opens a possibly compressed input; `None` picks the codec from the extension.
pub fn open_input(path: &Path, compression: Option<Compression>) -> io::Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    Ok(decoder(file, compression.unwrap_or_else(|| Compression::from_path(path))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rank {
    Deprecated,
    Normal,
    Preferred,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SnakValue {
    Item(String),
    Time {
        year: i32,
        precision: u8,
    },
    /// "somevalue", "novalue" or a datatype we do not read.
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub rank: Rank,
    pub value: SnakValue,
}

/// The parts of an entity document the pipeline reads. Claims are kept
/// only for the five properties of interest.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntityDoc {
    pub id: String,
    pub claims: BTreeMap<String, Vec<Claim>>,
    pub sitelinks: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct WireEntity<'a> {
    #[serde(borrow)]
    id: Cow<'a, str>,
    #[serde(borrow, default)]
    claims: Option<&'a RawValue>,
    #[serde(borrow, default)]
    sitelinks: Option<&'a RawValue>,
}

#[derive(Deserialize)]
struct WireClaim {
    mainsnak: WireSnak,
    #[serde(default)]
    rank: Option<String>,
}

#[derive(Deserialize)]
struct WireSnak {
    #[serde(default)]
    snaktype: Option<String>,
    #[serde(default)]
    datavalue: Option<WireDataValue>,
}

#[derive(Deserialize)]
struct WireDataValue {
    value: Value,
}

#[derive(Deserialize)]
struct WireSitelink {
    title: String,
}

impl EntityDoc {
    /// Parses one entity object. Claims with an unexpected shape are dropped
    /// rather than failing the document.
    pub fn parse(text: &str) -> Result<EntityDoc, serde_json::Error> {
        let wire: WireEntity = serde_json::from_str(text)?;
        let mut doc = EntityDoc { id: wire.id.into_owned(), ..EntityDoc::default() };
        // Older dumps write empty maps as `[]`.
        if let Some(raw) = wire.claims.filter(|r| r.get().starts_with('{')) {
            let map: HashMap<Cow<str>, &RawValue> = serde_json::from_str(raw.get())?;
            for property in KEPT_PROPERTIES {
                let Some(list) = map.get(property) else { continue };
                let Ok(items) = serde_json::from_str::<Vec<&RawValue>>(list.get()) else { continue };
                let claims: Vec<Claim> = items
                    .iter()
                    .filter_map(|c| serde_json::from_str::<WireClaim>(c.get()).ok())
                    .map(Claim::from_wire)
                    .collect();
                doc.claims.insert(property.to_string(), claims);
            }
        }
        if let Some(raw) = wire.sitelinks.filter(|r| r.get().starts_with('{')) {
            let map: HashMap<Cow<str>, &RawValue> = serde_json::from_str(raw.get())?;
            for (site, link) in map {
                if let Ok(link) = serde_json::from_str::<WireSitelink>(link.get()) {
                    doc.sitelinks.insert(site.into_owned(), link.title);
                }
            }
        }
        Ok(doc)
    }

    pub fn claims(&self, property: &str) -> &[Claim] {
        self.claims.get(property).map_or(&[], Vec::as_slice)
    }
}

impl Claim {
    fn from_wire(wire: WireClaim) -> Claim {
        let rank = match wire.rank.as_deref() {
            Some("preferred") => Rank::Preferred,
            Some("deprecated") => Rank::Deprecated,
            _ => Rank::Normal,
        };
        let value = match (wire.mainsnak.snaktype.as_deref(), wire.mainsnak.datavalue) {
            (Some("value") | None, Some(dv)) => snak_value(&dv.value),
            _ => SnakValue::Other,
        };
        Claim { rank, value }
    }
}

fn snak_value(value: &Value) -> SnakValue {
    if let Some(time) = value.get("time").and_then(Value::as_str) {
        let precision = value.get("precision").and_then(Value::as_u64).unwrap_or(0);
        return match parse_year(time) {
            Some(year) => SnakValue::Time { year, precision: precision.min(u8::MAX as u64) as u8 },
            None => SnakValue::Other,
        };
    }
    if let Some(id) = value.get("id").and_then(Value::as_str) {
        return SnakValue::Item(id.to_string());
    }
    // Early dumps carry only the numeric part.
    let is_item = value.get("entity-type").and_then(Value::as_str).is_none_or(|t| t == "item");
    match value.get("numeric-id").and_then(Value::as_u64) {
        Some(n) if is_item => SnakValue::Item(format!("Q{n}")),
        _ => SnakValue::Other,
    }
}

/// Year of a timestamp like `+1879-03-14T00:00:00Z` or `-00000000044-00-00T00:00:00Z`.
///
/// The dump numbers years without a year zero (`-0001` is 1 BCE); the result
/// is astronomical, so 1 BCE becomes 0.
pub fn parse_year(timestamp: &str) -> Option<i32> {
    let (negative, rest) = match timestamp.as_bytes().first()? {
        b'-' => (true, &timestamp[1..]),
        b'+' => (false, &timestamp[1..]),
        _ => (false, timestamp),
    };
    let digits = rest.split('-').next()?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let year: i64 = digits.parse().ok()?;
    let year = if negative && year > 0 { 1 - year } else { year };
    i32::try_from(year).ok()
}

#[derive(Debug, Clone)]
pub struct ExtractConfig {
    /// Sitelink key of the wiki edition, e.g. `enwiki`.
    pub wiki: String,
    pub human_class: String,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig { wiki: "enwiki".into(), human_class: "Q5".into() }
    }
}

enum DateChoice {
    Year(i32),
    Coarse,
    Missing,
}

fn item_targets(claims: &[Claim]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for claim in claims.iter().filter(|c| c.rank != Rank::Deprecated) {
        if let SnakValue::Item(id) = &claim.value {
            if seen.insert(id.as_str()) {
                out.push(id.clone());
            }
        }
    }
    out
}

/// Best rank among year-precise claims, then the earliest year.
fn choose_year(claims: &[Claim]) -> DateChoice {
    let mut any_time = false;
    let mut best: Option<(Rank, i32)> = None;
    for claim in claims.iter().filter(|c| c.rank != Rank::Deprecated) {
        let SnakValue::Time { year, precision } = claim.value else { continue };
        any_time = true;
        if precision < YEAR_PRECISION {
            continue;
        }
        best = match best {
            Some((rank, y)) if rank > claim.rank || (rank == claim.rank && y <= year) => Some((rank, y)),
            _ => Some((claim.rank, year)),
        };
    }
    match (best, any_time) {
        (Some((_, year)), _) => DateChoice::Year(year),
        (None, true) => DateChoice::Coarse,
        (None, false) => DateChoice::Missing,
    }
}

/// A record for every entity with a non-deprecated instance-of claim on the
/// human class, `None` otherwise.
pub fn extract_person(doc: &EntityDoc, config: &ExtractConfig) -> Option<PersonRecord> {
    let human = doc
        .claims(INSTANCE_OF)
        .iter()
        .any(|c| c.rank != Rank::Deprecated && matches!(&c.value, SnakValue::Item(q) if *q == config.human_class));
    if !human || doc.id.is_empty() {
        return None;
    }
    let mut record = PersonRecord::new(doc.id.clone());
    record.nationality_ids = item_targets(doc.claims(CITIZENSHIP));
    record.occupation_ids = item_targets(doc.claims(OCCUPATION));
    match choose_year(doc.claims(DATE_OF_BIRTH)) {
        DateChoice::Year(y) => record.birth_year = Some(y),
        DateChoice::Coarse => record.birth_precision = DatePrecision::Coarser,
        DateChoice::Missing => {}
    }
    if let DateChoice::Year(d) = choose_year(doc.claims(DATE_OF_DEATH)) {
        record.death_year = Some(d);
    }
    if let (Some(b), Some(d)) = (record.birth_year, record.death_year) {
        if d < b {
            record.death_year = None;
        }
    }
    record.article_title = doc.sitelinks.get(&config.wiki).cloned();
    Some(record)
}

/// Parses one dump line into `out`; returns the number of malformed documents.
fn parse_dump_line(bytes: &[u8], out: &mut Vec<EntityDoc>) -> u64 {
    let Ok(text) = std::str::from_utf8(bytes) else { return 1 };
    let text = text.trim();
    let text = text.strip_suffix(',').unwrap_or(text).trim_end();
    if text.is_empty() || text == "[" || text == "]" {
        return 0;
    }
    if text.starts_with('[') {
        // Whole array on one line.
        let Ok(items) = serde_json::from_str::<Vec<&RawValue>>(text) else { return 1 };
        let mut bad = 0;
        for item in items {
            match EntityDoc::parse(item.get()) {
                Ok(doc) => out.push(doc),
                Err(_) => bad += 1,
            }
        }
        return bad;
    }
    match EntityDoc::parse(text) {
        Ok(doc) => {
            out.push(doc);
            0
        }
        Err(_) => 1,
    }
}

/// Reads one line as raw bytes; `false` at end of input.
fn next_line<R: BufRead>(reader: &mut R, buf: &mut Vec<u8>) -> io::Result<bool> {
    buf.clear();
    Ok(reader.read_until(b'\n', buf)? > 0)
}

/// Entity documents from a line-delimited or array-wrapped dump, one at a time.
pub struct EntityStream<R> {
    reader: R,
    line: Vec<u8>,
    pending: VecDeque<EntityDoc>,
    malformed: u64,
}

pub fn stream_entities<R: BufRead>(reader: R) -> EntityStream<R> {
    EntityStream { reader, line: Vec::new(), pending: VecDeque::new(), malformed: 0 }
}

impl<R> EntityStream<R> {
    /// Documents skipped so far because they failed to parse.
    pub fn malformed(&self) -> u64 {
        self.malformed
    }
}

impl<R: BufRead> Iterator for EntityStream<R> {
    type Item = io::Result<EntityDoc>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut docs = Vec::new();
        while self.pending.is_empty() {
            match next_line(&mut self.reader, &mut self.line) {
                Ok(true) => {}
                Ok(false) => return None,
                Err(e) => return Some(Err(e)),
            }
            self.malformed += parse_dump_line(&self.line, &mut docs);
            self.pending.extend(docs.drain(..));
        }
        self.pending.pop_front().map(Ok)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub entities_seen: u64,
    pub persons_kept: u64,
    pub persons_with_p27: u64,
    pub persons_with_p106: u64,
    pub malformed_records: u64,
    /// Person documents dropped because their id was already kept.
    pub duplicate_persons: u64,
}

fn read_batch<R: BufRead>(reader: &mut R, batch: &mut Vec<Vec<u8>>) -> io::Result<()> {
    batch.clear();
    let mut line = Vec::new();
    while batch.len() < BATCH_LINES && next_line(reader, &mut line)? {
        batch.push(std::mem::take(&mut line));
    }
    Ok(())
}

/// Streams a dump and keeps the person records, in input order.
///
/// Lines are parsed in parallel batches on the current rayon pool; only kept
/// records and their ids outlive a batch.
pub fn ingest_entities<R: BufRead>(
    mut reader: R,
    config: &ExtractConfig,
) -> io::Result<(Vec<PersonRecord>, IngestReport)> {
    let mut report = IngestReport::default();
    let mut persons = Vec::new();
    let mut kept_ids: HashSet<String> = HashSet::new();
    let mut batch = Vec::with_capacity(BATCH_LINES);
    loop {
        read_batch(&mut reader, &mut batch)?;
        if batch.is_empty() {
            break;
        }
        let parsed: Vec<(u64, u64, Vec<PersonRecord>)> = batch
            .par_iter()
            .map(|line| {
                let mut docs = Vec::new();
                let bad = parse_dump_line(line, &mut docs);
                let found = docs.iter().filter_map(|d| extract_person(d, config)).collect();
                (docs.len() as u64, bad, found)
            })
            .collect();
        for (seen, bad, found) in parsed {
            report.entities_seen += seen;
            report.malformed_records += bad;
            for person in found {
                if kept_ids.contains(&person.person_id) {
                    report.duplicate_persons += 1;
                    continue;
                }
                kept_ids.insert(person.person_id.clone());
                report.persons_kept += 1;
                report.persons_with_p27 += u64::from(!person.nationality_ids.is_empty());
                report.persons_with_p106 += u64::from(!person.occupation_ids.is_empty());
                persons.push(person);
            }
        }
    }
    Ok((persons, report))
}

/// Uppercases the first character and maps underscores to spaces.
pub fn normalize_title(title: &str) -> String {
    let spaced = title.replace('_', " ");
    let spaced = spaced.trim();
    let mut chars = spaced.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// `%XX` decoding; malformed escapes are kept literally.
pub fn percent_decode(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            let pair = &bytes[i + 1..i + 3];
            if pair.iter().all(u8::is_ascii_hexdigit) {
                let hex = std::str::from_utf8(pair).expect("hex digits are ascii");
                out.push(u8::from_str_radix(hex, 16).expect("checked hex digits"));
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Normalized article title behind a `.../resource/<title>` IRI.
pub fn title_from_iri(iri: &str) -> Option<String> {
    const MARKER: &str = "/resource/";
    let start = iri.find(MARKER)? + MARKER.len();
    let title = normalize_title(&percent_decode(&iri[start..]));
    (!title.is_empty()).then_some(title)
}

/// Normalized article title to person id. Built once, then shared read-only.
#[derive(Debug, Clone, Default)]
pub struct TitleIndex {
    map: HashMap<String, String>,
}

impl TitleIndex {
    /// The first person carrying a title wins if titles collide.
    pub fn from_persons(persons: &[PersonRecord]) -> TitleIndex {
        let mut map = HashMap::new();
        for person in persons {
            if let Some(title) = &person.article_title {
                map.entry(normalize_title(title)).or_insert_with(|| person.person_id.clone());
            }
        }
        TitleIndex { map }
    }

    pub fn insert(&mut self, title: &str, person_id: &str) {
        self.map.entry(normalize_title(title)).or_insert_with(|| person_id.to_string());
    }

    /// Looks up an already normalized title.
    pub fn resolve(&self, title: &str) -> Option<&str> {
        self.map.get(title).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad triple at byte {offset}: {reason}")]
pub struct SyntaxError {
    pub offset: usize,
    pub reason: &'static str,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn fail<T>(&self, reason: &'static str) -> Result<T, SyntaxError> {
        Err(SyntaxError { offset: self.pos, reason })
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, SyntaxError> {
        let end = self.pos + digits;
        let code = self.text.get(self.pos..end).and_then(|h| u32::from_str_radix(h, 16).ok()).and_then(char::from_u32);
        match code {
            Some(c) => {
                self.pos = end;
                Ok(c)
            }
            None => self.fail("bad unicode escape"),
        }
    }

    fn iri(&mut self) -> Result<String, SyntaxError> {
        if self.bump() != Some('<') {
            return self.fail("expected '<'");
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    _ => return self.fail("bad IRI escape"),
                },
                Some(c) if c.is_whitespace() || c == '<' || c == '"' => return self.fail("illegal IRI character"),
                Some(c) => out.push(c),
                None => return self.fail("unterminated IRI"),
            }
        }
    }

    fn blank(&mut self) -> Result<String, SyntaxError> {
        self.pos += 2;
        let start = self.pos;
        while matches!(self.peek(), Some(c) if !c.is_whitespace() && c != '.') {
            self.bump();
        }
        if self.pos == start {
            return self.fail("empty blank node label");
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn literal(&mut self) -> Result<String, SyntaxError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return self.fail("bad string escape"),
                    };
                    out.push(c);
                }
                Some(c) => out.push(c),
                None => return self.fail("unterminated literal"),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.bump();
                }
                if self.pos == start {
                    return self.fail("empty language tag");
                }
            }
            Some('^') => {
                self.bump();
                if self.bump() != Some('^') {
                    return self.fail("expected '^^'");
                }
                self.iri()?;
            }
            _ => {}
        }
        Ok(out)
    }

    fn term(&mut self, allow_literal: bool) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some('<') => self.iri().map(Term::Iri),
            Some('_') if self.text[self.pos..].starts_with("_:") => self.blank().map(Term::Blank),
            Some('"') if allow_literal => self.literal().map(Term::Literal),
            _ => self.fail("expected a term"),
        }
    }
}

/// Parses one N-Triples line; `Ok(None)` for blank and comment lines.
pub fn parse_triple(line: &str) -> Result<Option<Triple>, SyntaxError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut cur = Cursor { text: trimmed, pos: 0 };
    let subject = cur.term(false)?;
    cur.skip_ws();
    let predicate = cur.iri()?;
    cur.skip_ws();
    let object = cur.term(true)?;
    cur.skip_ws();
    if cur.bump() != Some('.') {
        return cur.fail("expected '.'");
    }
    cur.skip_ws();
    if !matches!(cur.peek(), None | Some('#')) {
        return cur.fail("trailing content");
    }
    Ok(Some(Triple { subject, predicate, object }))
}

/// A link between two article titles, both normalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PagelinkEdge {
    pub source_title: String,
    pub target_title: String,
}

impl PagelinkEdge {
    /// `None` unless both ends are article IRIs with distinct titles.
    pub fn from_triple(triple: &Triple) -> Option<PagelinkEdge> {
        let (Term::Iri(s), Term::Iri(o)) = (&triple.subject, &triple.object) else {
            return None;
        };
        Some(PagelinkEdge { source_title: title_from_iri(s)?, target_title: title_from_iri(o)? })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PagelinkReport {
    pub triples_seen: u64,
    pub malformed_lines: u64,
    pub self_links: u64,
    pub unresolved: u64,
    pub edges: u64,
}

enum LinkOutcome {
    Skip,
    Malformed,
    SelfLink,
    Unresolved,
    Edge(String, String),
}

fn resolve_line(bytes: &[u8], index: &TitleIndex) -> LinkOutcome {
    let Ok(text) = std::str::from_utf8(bytes) else { return LinkOutcome::Malformed };
    let triple = match parse_triple(text) {
        Ok(Some(t)) => t,
        Ok(None) => return LinkOutcome::Skip,
        Err(_) => return LinkOutcome::Malformed,
    };
    let Some(edge) = PagelinkEdge::from_triple(&triple) else { return LinkOutcome::Unresolved };
    if edge.source_title == edge.target_title {
        return LinkOutcome::SelfLink;
    }
    match (index.resolve(&edge.source_title), index.resolve(&edge.target_title)) {
        (Some(s), Some(t)) if s == t => LinkOutcome::SelfLink,
        (Some(s), Some(t)) => LinkOutcome::Edge(s.to_string(), t.to_string()),
        _ => LinkOutcome::Unresolved,
    }
}

/// Person-to-person links in input order, direction and duplicates kept.
pub fn parse_pagelinks<R: BufRead>(
    mut reader: R,
    index: &TitleIndex,
) -> io::Result<(Vec<(String, String)>, PagelinkReport)> {
    let mut report = PagelinkReport::default();
    let mut edges = Vec::new();
    let mut batch = Vec::with_capacity(BATCH_LINES);
    loop {
        read_batch(&mut reader, &mut batch)?;
        if batch.is_empty() {
            break;
        }
        let outcomes: Vec<LinkOutcome> = batch.par_iter().map(|l| resolve_line(l, index)).collect();
        for outcome in outcomes {
            match outcome {
                LinkOutcome::Skip => continue,
                LinkOutcome::Malformed => report.malformed_lines += 1,
                LinkOutcome::SelfLink => report.self_links += 1,
                LinkOutcome::Unresolved => report.unresolved += 1,
                LinkOutcome::Edge(s, t) => {
                    report.edges += 1;
                    edges.push((s, t));
                }
            }
            report.triples_seen += 1;
        }
    }
    report.triples_seen -= report.malformed_lines;
    Ok((edges, report))
}
