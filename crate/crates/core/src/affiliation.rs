//! Bipartite person × value affiliation tables, occurrence thresholding and
//! reference accounting.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::person::{Dimension, PersonRecord};

/// Minimum number of persons a value needs to survive reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdConfig {
    pub min_value_occurrence: u32,
}

impl ThresholdConfig {
    pub fn new(min_value_occurrence: u32) -> Result<Self> {
        if min_value_occurrence == 0 {
            return Err(Error::Config("min_value_occurrence must be at least 1".into()));
        }
        Ok(ThresholdConfig { min_value_occurrence })
    }

    /// Default for nationalities.
    pub const NATIONALITY: ThresholdConfig = ThresholdConfig { min_value_occurrence: 10 };
    /// Default for occupations.
    pub const OCCUPATION: ThresholdConfig = ThresholdConfig { min_value_occurrence: 100 };

    pub fn default_for(dimension: Dimension) -> Self {
        match dimension {
            Dimension::Nationality => Self::NATIONALITY,
            Dimension::Occupation => Self::OCCUPATION,
        }
    }
}

/// Sparse binary person × value incidence.
///
/// Persons and values are sorted by identifier. `rows[p]` holds the sorted
/// value indices of person `p`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AffiliationTable {
    persons: Vec<String>,
    values: Vec<String>,
    rows: Vec<Vec<u32>>,
    row_degrees: Vec<u32>,
    col_degrees: Vec<u32>,
}

impl AffiliationTable {
    /// Unthresholded table for one dimension. Persons without values of
    /// that dimension are left out.
    pub fn raw(persons: &[PersonRecord], dimension: Dimension) -> Self {
        Self::from_pairs(
            persons.iter().flat_map(|p| p.values(dimension).iter().map(move |v| (p.person_id.as_str(), v.as_str()))),
        )
    }

    /// Builds a table from (person, value) links. Duplicate links collapse.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut links: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (p, v) in pairs {
            links.entry(p).or_default().push(v);
        }
        let mut value_set: Vec<&str> = links.values().flatten().copied().collect();
        value_set.sort_unstable();
        value_set.dedup();
        let value_index: BTreeMap<&str, u32> = value_set.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
        let mut persons = Vec::with_capacity(links.len());
        let mut rows = Vec::with_capacity(links.len());
        for (p, vs) in links {
            let mut row: Vec<u32> = vs.iter().map(|v| value_index[v]).collect();
            row.sort_unstable();
            row.dedup();
            persons.push(String::from(p));
            rows.push(row);
        }
        let values = value_set.into_iter().map(String::from).collect();
        Self::from_parts(persons, values, rows)
    }

    /// Assembles a table from already indexed rows. Rows are sorted and
    /// deduplicated; degrees are recomputed.
    pub fn from_parts(persons: Vec<String>, values: Vec<String>, mut rows: Vec<Vec<u32>>) -> Self {
        let mut col_degrees = alloc::vec![0u32; values.len()];
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            for &v in row.iter() {
                col_degrees[v as usize] += 1;
            }
        }
        let row_degrees = rows.iter().map(|r| r.len() as u32).collect();
        AffiliationTable { persons, values, rows, row_degrees, col_degrees }
    }

    /// Drops values held by fewer than `min_value_occurrence` persons, then
    /// drops persons left without values. One pass over the current counts.
    pub fn reduce(&self, config: ThresholdConfig) -> Self {
        let min = config.min_value_occurrence;
        let mut remap = alloc::vec![u32::MAX; self.values.len()];
        let mut values = Vec::new();
        for (i, v) in self.values.iter().enumerate() {
            if self.col_degrees[i] >= min {
                remap[i] = values.len() as u32;
                values.push(v.clone());
            }
        }
        let mut persons = Vec::new();
        let mut rows = Vec::new();
        for (p, row) in self.persons.iter().zip(&self.rows) {
            let kept: Vec<u32> = row.iter().map(|&v| remap[v as usize]).filter(|&v| v != u32::MAX).collect();
            if !kept.is_empty() {
                persons.push(p.clone());
                rows.push(kept);
            }
        }
        Self::from_parts(persons, values, rows)
    }

    pub fn persons(&self) -> &[String] {
        &self.persons
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn row(&self, person: usize) -> &[u32] {
        &self.rows[person]
    }

    pub fn row_degrees(&self) -> &[u32] {
        &self.row_degrees
    }

    pub fn col_degrees(&self) -> &[u32] {
        &self.col_degrees
    }

    pub fn num_persons(&self) -> usize {
        self.persons.len()
    }

    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    pub fn num_links(&self) -> u64 {
        self.row_degrees.iter().map(|&d| d as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
    }

    pub fn value_index(&self, value_id: &str) -> Option<usize> {
        self.values.binary_search_by(|v| v.as_str().cmp(value_id)).ok()
    }

    pub fn person_index(&self, person_id: &str) -> Option<usize> {
        self.persons.binary_search_by(|p| p.as_str().cmp(person_id)).ok()
    }

    /// Checks the table invariants: 0/1 incidence, consistent degrees,
    /// non-empty rows, column floor.
    pub fn check(&self, config: ThresholdConfig) -> bool {
        if self.rows.len() != self.persons.len() || self.row_degrees.len() != self.rows.len() {
            return false;
        }
        let mut cols = alloc::vec![0u32; self.values.len()];
        for (row, &deg) in self.rows.iter().zip(&self.row_degrees) {
            if row.is_empty() || row.len() as u32 != deg || row.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &v in row {
                match cols.get_mut(v as usize) {
                    Some(c) => *c += 1,
                    None => return false,
                }
            }
        }
        cols == self.col_degrees && cols.iter().all(|&c| c >= config.min_value_occurrence)
    }
}

/// Builds the reduced table of `dimension` for the given persons.
pub fn build_affiliation(persons: &[PersonRecord], dimension: Dimension, config: ThresholdConfig) -> AffiliationTable {
    AffiliationTable::raw(persons, dimension).reduce(config)
}

/// Persons, links and distinct values of one accounting stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StageCounts {
    pub persons: u64,
    pub links: u64,
    pub values: u64,
}

/// Reference accounting across reduction stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StatsReport {
    pub raw: StageCounts,
    pub reduced: StageCounts,
    /// Persons holding exactly one retained value.
    pub one_to_one: StageCounts,
    /// Persons holding two or more retained values.
    pub one_to_n: StageCounts,
}

impl StatsReport {
    /// Checks the accounting identities between the stages.
    pub fn is_consistent(&self) -> bool {
        self.one_to_one.persons + self.one_to_n.persons == self.reduced.persons
            && self.one_to_one.links == self.one_to_one.persons
            && self.one_to_n.links >= 2 * self.one_to_n.persons
            && self.reduced.links == self.one_to_one.links + self.one_to_n.links
    }
}

fn stage_counts(table: &AffiliationTable, keep: impl Fn(usize) -> bool) -> StageCounts {
    let mut seen = alloc::vec![false; table.num_values()];
    let mut counts = StageCounts::default();
    for row in table.rows().iter().filter(|r| keep(r.len())) {
        counts.persons += 1;
        counts.links += row.len() as u64;
        for &v in row {
            if !seen[v as usize] {
                seen[v as usize] = true;
                counts.values += 1;
            }
        }
    }
    counts
}

pub fn reference_stats(raw: &AffiliationTable, reduced: &AffiliationTable) -> StatsReport {
    StatsReport {
        raw: stage_counts(raw, |_| true),
        reduced: stage_counts(reduced, |_| true),
        one_to_one: stage_counts(reduced, |d| d == 1),
        one_to_n: stage_counts(reduced, |d| d >= 2),
    }
}
