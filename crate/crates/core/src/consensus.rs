//! Multi-resolution partition ensembles and their mutual-community
//! (co-classification) matrix.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::louvain::{louvain, Partition, WeightedGraph};
use crate::seed::derive_seed;

/// `count` resolutions spaced evenly in log2 between `lo` and `hi`.
pub fn log_grid(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (libm::log2(lo), libm::log2(hi));
            (0..count).map(|i| libm::exp2(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub gammas: Vec<f64>,
    pub reps_per_gamma: u32,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    /// 16 resolutions from 1/8 to 8, 25 runs each.
    fn default() -> Self {
        SweepConfig { gammas: log_grid(16, 0.125, 8.0), reps_per_gamma: 25, master_seed: 0 }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(Error::Config("resolution grid is empty".into()));
        }
        if self.gammas.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(Error::Config("resolutions must be positive".into()));
        }
        if self.gammas.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("resolutions must be sorted ascending".into()));
        }
        if self.reps_per_gamma == 0 {
            return Err(Error::Config("reps_per_gamma must be positive".into()));
        }
        Ok(())
    }

    pub fn num_jobs(&self) -> usize {
        self.gammas.len() * self.reps_per_gamma as usize
    }

    /// `(gamma index, rep)` of job `job`, gamma-major.
    pub fn job(&self, job: usize) -> (usize, u32) {
        let reps = self.reps_per_gamma as usize;
        (job / reps, (job % reps) as u32)
    }

    pub fn seed(&self, gamma_index: usize, rep: u32) -> u64 {
        derive_seed(self.master_seed, &[gamma_index as u64, rep as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEnsemble {
    /// Gamma-major: all reps of `gammas[0]` first.
    pub partitions: Vec<Partition>,
    pub gammas: Vec<f64>,
    pub reps_per_gamma: u32,
}

/// Runs sweep job `job` (see [`SweepConfig::job`]).
pub fn sweep_job(graph: &WeightedGraph, config: &SweepConfig, job: usize) -> Result<Partition> {
    let (g, rep) = config.job(job);
    louvain(graph, config.gammas[g], config.seed(g, rep))
}

pub fn sweep(graph: &WeightedGraph, config: &SweepConfig) -> Result<PartitionEnsemble> {
    config.validate()?;
    let partitions = (0..config.num_jobs()).map(|job| sweep_job(graph, config, job)).collect::<Result<Vec<_>>>()?;
    Ok(PartitionEnsemble { partitions, gammas: config.gammas.clone(), reps_per_gamma: config.reps_per_gamma })
}

/// Symmetric matrix of same-community frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusMatrix {
    pub values: Vec<String>,
    prob: Vec<f64>,
}

impl ConsensusMatrix {
    /// Row-major square matrix; `prob.len()` must be `values.len()²`.
    pub fn from_dense(values: Vec<String>, prob: Vec<f64>) -> Result<Self> {
        if prob.len() != values.len() * values.len() {
            return Err(Error::Config("consensus matrix is not square".into()));
        }
        Ok(ConsensusMatrix { values, prob })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.prob[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.prob[i * n..(i + 1) * n]
    }

    /// First violated invariant, if any: unit diagonal, symmetry, [0, 1].
    pub fn violation(&self) -> Option<(usize, usize, f64)> {
        let n = self.len();
        for i in 0..n {
            if self.get(i, i) != 1.0 {
                return Some((i, i, self.get(i, i)));
            }
            for j in 0..n {
                let p = self.get(i, j);
                if !(0.0..=1.0).contains(&p) || p != self.get(j, i) {
                    return Some((i, j, p));
                }
            }
        }
        None
    }
}

/// `prob[i][j]` is the fraction of partitions placing `i` and `j` together.
pub fn mutual_community_matrix(ensemble: &PartitionEnsemble, values: &[String]) -> Result<ConsensusMatrix> {
    let total = ensemble.partitions.len();
    if total == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let n = values.len();
    if ensemble.partitions.iter().any(|p| p.assignment.len() != n) {
        return Err(Error::Config("partition size does not match value list".into()));
    }
    let mut together = alloc::vec![0u32; n * n];
    for p in &ensemble.partitions {
        let a = &p.assignment;
        for i in 0..n {
            for j in i + 1..n {
                if a[i] == a[j] {
                    together[i * n + j] += 1;
                }
            }
        }
    }
    let mut prob = alloc::vec![0.0; n * n];
    for i in 0..n {
        prob[i * n + i] = 1.0;
        for j in i + 1..n {
            let p = together[i * n + j] as f64 / total as f64;
            prob[i * n + j] = p;
            prob[j * n + i] = p;
        }
    }
    Ok(ConsensusMatrix { values: values.to_vec(), prob })
}
