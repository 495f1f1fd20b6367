//! Per-value activity over time from person life spans, and ordering of
//! values by an outlier-robust first occurrence.

use alloc::string::String;
use alloc::vec::Vec;

use crate::person::{Dimension, PersonRecord};

/// Closing rule for life spans without a death year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LifespanPolicy {
    pub imputed_lifespan: i32,
    pub dump_year: i32,
}

impl Default for LifespanPolicy {
    fn default() -> Self {
        LifespanPolicy { imputed_lifespan: 80, dump_year: 2015 }
    }
}

impl LifespanPolicy {
    /// Last year a person born in `birth` counts as active.
    pub fn effective_death(&self, birth: i32, death: Option<i32>) -> i32 {
        let end = death.unwrap_or_else(|| (birth + self.imputed_lifespan).min(self.dump_year));
        end.max(birth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySeries {
    pub value_id: String,
    /// First year of `counts`; meaningless when `counts` is empty.
    pub min_year: i32,
    /// Persons alive per year from `min_year` on.
    pub counts: Vec<u32>,
    /// Sorted birth years of the dated persons holding the value.
    pub birth_years: Vec<i32>,
    /// Holders without a year-precision birth date.
    pub skipped: u32,
}

impl ActivitySeries {
    pub fn max_year(&self) -> Option<i32> {
        (!self.counts.is_empty()).then(|| self.min_year + self.counts.len() as i32 - 1)
    }

    pub fn count_at(&self, year: i32) -> u32 {
        let offset = year as i64 - self.min_year as i64;
        if offset < 0 {
            return 0;
        }
        self.counts.get(offset as usize).copied().unwrap_or(0)
    }

    pub fn years(&self) -> impl Iterator<Item = (i32, u32)> + '_ {
        self.counts.iter().enumerate().map(move |(i, &c)| (self.min_year + i as i32, c))
    }
}

/// Activity series of `value_id` in `dimension`. Persons not holding the
/// value are ignored, so callers may pass a pre-filtered subset.
pub fn activity_series<'p>(
    persons: impl IntoIterator<Item = &'p PersonRecord>,
    dimension: Dimension,
    value_id: &str,
    policy: LifespanPolicy,
) -> ActivitySeries {
    let mut spans = Vec::new();
    let mut skipped = 0;
    for p in persons.into_iter().filter(|p| p.values(dimension).iter().any(|v| v == value_id)) {
        match p.dated_birth() {
            Some(b) => spans.push((b, policy.effective_death(b, p.death_year))),
            None => skipped += 1,
        }
    }
    let mut birth_years: Vec<i32> = spans.iter().map(|s| s.0).collect();
    birth_years.sort_unstable();
    let (min_year, counts) = match (spans.iter().map(|s| s.0).min(), spans.iter().map(|s| s.1).max()) {
        (Some(lo), Some(hi)) => {
            let mut diff = alloc::vec![0i64; (hi - lo) as usize + 2];
            for &(b, d) in &spans {
                diff[(b - lo) as usize] += 1;
                diff[(d - lo) as usize + 1] -= 1;
            }
            let mut acc = 0i64;
            let counts = diff[..diff.len() - 1]
                .iter()
                .map(|d| {
                    acc += d;
                    acc as u32
                })
                .collect();
            (lo, counts)
        }
        _ => (0, Vec::new()),
    };
    ActivitySeries { value_id: value_id.into(), min_year, counts, birth_years, skipped }
}

/// Default outlier depth: `max(2, ceil(1%))` of the dated persons.
pub fn default_depth(dated: usize) -> usize {
    dated.div_ceil(100).max(2)
}

/// Birth year of the `q`-th earliest dated person, or the earliest when
/// fewer than `q` are dated. `None` without dated persons.
pub fn robust_first_year(series: &ActivitySeries, q: usize) -> Option<i32> {
    let n = series.birth_years.len();
    if n == 0 {
        return None;
    }
    let q = q.max(1);
    Some(if n < q { series.birth_years[0] } else { series.birth_years[q - 1] })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TimelineOrdering {
    /// `(value_id, robust first year)` ascending by year, then id.
    pub entries: Vec<(String, i32)>,
    /// Values without dated persons.
    pub excluded: Vec<String>,
}

/// Orders values by robust first year. `depth = None` uses
/// [`default_depth`] per value.
pub fn order_values(series: &[ActivitySeries], depth: Option<usize>) -> TimelineOrdering {
    let mut out = TimelineOrdering::default();
    for s in series {
        let q = depth.unwrap_or_else(|| default_depth(s.birth_years.len()));
        match robust_first_year(s, q) {
            Some(y) => out.entries.push((s.value_id.clone(), y)),
            None => out.excluded.push(s.value_id.clone()),
        }
    }
    out.entries.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out.excluded.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn holder(id: &str, value: &str, birth: Option<i32>, death: Option<i32>) -> PersonRecord {
        let mut p = PersonRecord::new(id);
        p.occupation_ids = vec![value.to_string()];
        p.birth_year = birth;
        p.death_year = death;
        p
    }

    fn series_of(births: &[i32]) -> ActivitySeries {
        let persons: Vec<_> = births
            .iter()
            .enumerate()
            .map(|(i, &b)| holder(&alloc::format!("p{i}"), "X", Some(b), Some(b + 10)))
            .collect();
        activity_series(&persons, Dimension::Occupation, "X", LifespanPolicy::default())
    }

    #[test]
    fn closed_span_counts_inclusive_years() {
        let s = activity_series(
            &[holder("a", "X", Some(1900), Some(1950))],
            Dimension::Occupation,
            "X",
            LifespanPolicy::default(),
        );
        assert_eq!(s.counts.len(), 51);
        assert_eq!(s.counts.iter().sum::<u32>(), 51);
        assert_eq!((s.min_year, s.max_year()), (1900, Some(1950)));
    }

    #[test]
    fn open_span_capped_at_dump_year() {
        let s = activity_series(
            &[holder("a", "X", Some(1990), None)],
            Dimension::Occupation,
            "X",
            LifespanPolicy::default(),
        );
        assert_eq!((s.min_year, s.max_year()), (1990, Some(2015)));
        let s = activity_series(
            &[holder("a", "X", Some(1800), None)],
            Dimension::Occupation,
            "X",
            LifespanPolicy::default(),
        );
        assert_eq!(s.max_year(), Some(1880));
    }

    #[test]
    fn overlapping_spans_add_up() {
        let persons = [holder("a", "X", Some(1900), Some(1950)), holder("b", "X", Some(1940), Some(1960))];
        let s = activity_series(&persons, Dimension::Occupation, "X", LifespanPolicy::default());
        for y in 1940..=1950 {
            assert_eq!(s.count_at(y), 2);
        }
        assert_eq!(s.count_at(1939), 1);
        assert_eq!(s.count_at(1951), 1);
        assert_eq!(s.count_at(1961), 0);
    }

    #[test]
    fn undated_holders_are_skipped() {
        let persons = [holder("a", "X", None, None), holder("b", "X", Some(-43), Some(14))];
        let s = activity_series(&persons, Dimension::Occupation, "X", LifespanPolicy::default());
        assert_eq!(s.skipped, 1);
        assert_eq!(s.min_year, -43);
        assert_eq!(s.counts.len(), 58);
    }

    #[test]
    fn robust_year_disregards_early_outlier() {
        let s = series_of(&[1000, 1500, 1502, 1510]);
        assert_eq!(robust_first_year(&s, 2), Some(1500));
        assert_eq!(robust_first_year(&s, 1), Some(1000));
        assert_eq!(robust_first_year(&series_of(&[1900]), 2), Some(1900));
        assert_eq!(robust_first_year(&series_of(&[]), 2), None);
    }

    #[test]
    fn ordering_sorts_by_year_then_id() {
        let mut a = series_of(&[1200, 1201]);
        a.value_id = "a".into();
        let mut b = series_of(&[800, 805]);
        b.value_id = "b".into();
        let mut c = series_of(&[800, 805]);
        c.value_id = "c".into();
        let mut empty = series_of(&[]);
        empty.value_id = "e".into();
        let o = order_values(&[c, a, b, empty], Some(1));
        let ids: Vec<&str> = o.entries.iter().map(|e| e.0.as_str()).collect();
        assert_eq!(ids, vec!["b", "c", "a"]);
        assert_eq!(o.excluded, vec!["e".to_string()]);
    }

    #[test]
    fn default_depth_rule() {
        assert_eq!(default_depth(1), 2);
        assert_eq!(default_depth(200), 2);
        assert_eq!(default_depth(201), 3);
        assert_eq!(default_depth(1000), 10);
    }
}
