//! Brute-force oracles shared by the integration and acceptance suites.
//! Nothing here calls into the code paths it checks.
#![allow(dead_code)]

pub mod graphs;

/// Every 0/1 matrix with the given row and column sums, row-major as
/// per-row sorted column lists.
pub fn enumerate_matrices(row_sums: &[usize], col_sums: &[usize]) -> Vec<Vec<Vec<u32>>> {
    fn rec(
        r: usize,
        row_sums: &[usize],
        remaining: &mut Vec<usize>,
        current: &mut Vec<Vec<u32>>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) {
        if r == row_sums.len() {
            if remaining.iter().all(|&c| c == 0) {
                out.push(current.clone());
            }
            return;
        }
        let ncols = remaining.len();
        for mask in 0u32..(1 << ncols) {
            if mask.count_ones() as usize != row_sums[r] {
                continue;
            }
            if (0..ncols).any(|c| mask & (1 << c) != 0 && remaining[c] == 0) {
                continue;
            }
            let row: Vec<u32> = (0..ncols as u32).filter(|c| mask & (1 << c) != 0).collect();
            for &c in &row {
                remaining[c as usize] -= 1;
            }
            current.push(row.clone());
            rec(r + 1, row_sums, remaining, current, out);
            current.pop();
            for &c in &row {
                remaining[c as usize] += 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, row_sums, &mut col_sums.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Co-occurrence count of columns `a` and `b` in a row-major matrix.
pub fn cooccurrence(matrix: &[Vec<u32>], a: u32, b: u32) -> u64 {
    matrix.iter().filter(|r| r.contains(&a) && r.contains(&b)).count() as u64
}

/// Exact mean and population standard deviation of a pair's co-occurrence
/// under the uniform distribution over `matrices`.
pub fn exact_moments(matrices: &[Vec<Vec<u32>>], a: u32, b: u32) -> (f64, f64) {
    let n = matrices.len() as f64;
    let counts: Vec<f64> = matrices.iter().map(|m| cooccurrence(m, a, b) as f64).collect();
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Resolution-scaled modularity straight from the double-sum definition.
pub fn modularity(n: usize, edges: &[(usize, usize, f64)], labels: &[usize], gamma: f64) -> f64 {
    let mut adj = vec![vec![0.0; n]; n];
    for &(a, b, w) in edges {
        adj[a][b] += w;
        adj[b][a] += w;
    }
    let k: Vec<f64> = adj.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += adj[i][j] - gamma * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Every set partition of `n` nodes as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=max + 1 {
            if i == 0 && l > 0 {
                break;
            }
            cur.push(l);
            rec(i + 1, n, cur, if i == 0 { 0 } else { max.max(l) }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    rec(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Maximum modularity over all partitions and every partition attaining it
/// (within 1e-12).
pub fn best_partitions(n: usize, edges: &[(usize, usize, f64)], gamma: f64) -> (f64, Vec<Vec<usize>>) {
    let parts = all_partitions(n);
    let qs: Vec<f64> = parts.iter().map(|p| modularity(n, edges, p, gamma)).collect();
    let best = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let argmax = parts.into_iter().zip(&qs).filter(|(_, &q)| (q - best).abs() <= 1e-12).map(|(p, _)| p).collect();
    (best, argmax)
}

/// Relabels a partition by first appearance for comparison up to labels.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Upper 1% critical value of the chi-square distribution.
pub fn chi_square_critical_99(df: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df).unwrap().inverse_cdf(0.99)
}
