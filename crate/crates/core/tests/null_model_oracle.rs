mod support;

use std::collections::HashMap;

use cohistory_core::affiliation::AffiliationTable;
use cohistory_core::nullmodel::{score, Curveball, NullModelConfig, TradeAxis};
use support::{chi_square_critical_99, enumerate_matrices, exact_moments};

/// Persons p0..p5 over values A..D with margins [3,2,2,1,1,1] × [4,3,2,1].
fn fixture() -> AffiliationTable {
    let rows: &[&[&str]] = &[&["A", "B", "C"], &["A", "B"], &["A", "D"], &["A"], &["B"], &["C"]];
    let names: Vec<String> = (0..rows.len()).map(|i| format!("p{i}")).collect();
    AffiliationTable::from_pairs(rows.iter().zip(&names).flat_map(|(r, p)| r.iter().map(move |v| (p.as_str(), *v))))
}

fn margins(t: &AffiliationTable) -> (Vec<usize>, Vec<usize>) {
    (t.row_degrees().iter().map(|&d| d as usize).collect(), t.col_degrees().iter().map(|&d| d as usize).collect())
}

#[test]
fn fixture_has_few_admissible_matrices() {
    let t = fixture();
    let (r, c) = margins(&t);
    let all = enumerate_matrices(&r, &c);
    assert_eq!(all.len(), 128);
    assert!(all.contains(&t.rows().to_vec()));
}

fn uniformity_statistic(axis: TradeAxis, trades: Option<u64>) -> (f64, f64) {
    let t = fixture();
    let (r, c) = margins(&t);
    let all = enumerate_matrices(&r, &c);
    let index: HashMap<Vec<Vec<u32>>, usize> = all.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let trades = trades.unwrap_or_else(|| cohistory_core::nullmodel::default_trades(&t));
    let cb = Curveball::new(&t, trades, axis);
    let n = 10_000u64;
    let mut freq = vec![0u64; all.len()];
    for s in 0..n {
        let m = cb.sample(cohistory_core::nullmodel::sample_seed(1, s));
        freq[index[&m.rows().to_vec()]] += 1;
    }
    let expected = n as f64 / all.len() as f64;
    let chi2: f64 = freq.iter().map(|&f| (f as f64 - expected).powi(2) / expected).sum();
    (chi2, chi_square_critical_99(all.len() as f64 - 1.0))
}

#[test]
fn samples_are_uniform_over_admissible_matrices() {
    // the default trades on the 4 values; the explicit axes get a longer chain
    for (axis, trades) in [(TradeAxis::Auto, None), (TradeAxis::Persons, Some(100)), (TradeAxis::Values, Some(100))] {
        let (chi2, crit) = uniformity_statistic(axis, trades);
        eprintln!("{axis:?}: chi2={chi2:.2} critical={crit:.2}");
        assert!(chi2 < crit, "{axis:?}: chi2 {chi2} >= {crit}");
    }
}

#[test]
fn ensemble_expectation_matches_enumeration() {
    let t = fixture();
    let (r, c) = margins(&t);
    let all = enumerate_matrices(&r, &c);
    let n = 10_000u32;
    let cfg = NullModelConfig { ensemble_size: n, master_seed: 3, ..Default::default() };
    let (scored, _) = score(&t, cfg).unwrap();
    for e in &scored.edges {
        let (a, b) = scored.endpoints(e);
        let a = t.value_index(a).unwrap() as u32;
        let b = t.value_index(b).unwrap() as u32;
        let (mean, sigma) = exact_moments(&all, a, b);
        let tol = 4.0 * sigma / (n as f64).sqrt();
        assert!((e.expected - mean).abs() <= tol, "pair {a}-{b}: {} vs {mean} (tol {tol})", e.expected);
        let exact_residual = (e.observed as f64 - mean) / mean.max(1.0 / n as f64).sqrt();
        assert!((e.residual - exact_residual).abs() <= 0.05, "residual {} vs {exact_residual}", e.residual);
    }
}
