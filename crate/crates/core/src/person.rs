//! Person records and the two affiliation dimensions.

use alloc::string::String;
use alloc::vec::Vec;

/// Declared precision of a date value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum DatePrecision {
    /// Year, month or day precision.
    #[default]
    YearOrFiner,
    /// Decade, century, millennium or coarser.
    Coarser,
}

/// Which value list of a person an analysis uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    /// Country of citizenship (P27).
    Nationality,
    /// Occupation (P106).
    Occupation,
}

impl Dimension {
    pub const ALL: [Dimension; 2] = [Dimension::Nationality, Dimension::Occupation];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Nationality => "nationality",
            Dimension::Occupation => "occupation",
        }
    }

    pub fn other(self) -> Dimension {
        match self {
            Dimension::Nationality => Dimension::Occupation,
            Dimension::Occupation => Dimension::Nationality,
        }
    }

    pub fn parse(s: &str) -> Option<Dimension> {
        match s {
            "nationality" | "nationalities" => Some(Dimension::Nationality),
            "occupation" | "occupations" => Some(Dimension::Occupation),
            _ => None,
        }
    }
}

/// One notable individual.
///
/// Years use astronomical numbering, so 1 BCE is year 0 and 44 BCE is -43.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PersonRecord {
    pub person_id: String,
    pub birth_year: Option<i32>,
    pub birth_precision: DatePrecision,
    pub death_year: Option<i32>,
    pub nationality_ids: Vec<String>,
    pub occupation_ids: Vec<String>,
    pub article_title: Option<String>,
}

impl PersonRecord {
    pub fn new(person_id: impl Into<String>) -> Self {
        PersonRecord { person_id: person_id.into(), ..Default::default() }
    }

    pub fn values(&self, dimension: Dimension) -> &[String] {
        match dimension {
            Dimension::Nationality => &self.nationality_ids,
            Dimension::Occupation => &self.occupation_ids,
        }
    }

    /// Birth year usable for year-resolution rules.
    pub fn dated_birth(&self) -> Option<i32> {
        match self.birth_precision {
            DatePrecision::YearOrFiner => self.birth_year,
            DatePrecision::Coarser => None,
        }
    }

    /// Checks the record invariants: non-empty id, no duplicate values,
    /// death not before birth.
    pub fn is_valid(&self) -> bool {
        fn unique(values: &[String]) -> bool {
            let mut sorted: Vec<&String> = values.iter().collect();
            sorted.sort();
            sorted.windows(2).all(|w| w[0] != w[1])
        }
        if self.person_id.is_empty() {
            return false;
        }
        if let (Some(b), Some(d)) = (self.birth_year, self.death_year) {
            if d < b {
                return false;
            }
        }
        unique(&self.nationality_ids) && unique(&self.occupation_ids)
    }
}
