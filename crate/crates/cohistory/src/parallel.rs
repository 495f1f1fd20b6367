//! Rayon drivers for the two expensive loops. Work is split into units whose
//! boundaries do not depend on the thread count, and merged in a way that
//! gives the same bits however the units were scheduled.

use cohistory_core::affiliation::AffiliationTable;
use cohistory_core::consensus::{sweep_job, PartitionEnsemble, SweepConfig};
use cohistory_core::louvain::WeightedGraph;
use cohistory_core::nullmodel::{CoocNetwork, NullModel, NullModelConfig, PairMoments};
use rayon::prelude::*;

/// Null samples per work unit.
pub const SAMPLE_CHUNK: u64 = 32;

/// Moments are integer sums, so the reduction order does not matter.
pub fn score_parallel(
    table: &AffiliationTable,
    config: NullModelConfig,
) -> cohistory_core::Result<(CoocNetwork, CoocNetwork)> {
    let model = NullModel::new(table, config)?;
    let total = config.ensemble_size as u64;
    let pairs = model.num_pairs();
    let moments = (0..total.div_ceil(SAMPLE_CHUNK))
        .into_par_iter()
        .map(|c| model.run_samples(c * SAMPLE_CHUNK..((c + 1) * SAMPLE_CHUNK).min(total)))
        .reduce(
            || PairMoments::new(pairs),
            |mut a, b| {
                a.merge(&b);
                a
            },
        );
    model.finish(&moments)
}

/// One job per (gamma, rep), each with its own derived seed.
pub fn sweep_parallel(graph: &WeightedGraph, config: &SweepConfig) -> cohistory_core::Result<PartitionEnsemble> {
    config.validate()?;
    let partitions = (0..config.num_jobs())
        .into_par_iter()
        .map(|job| sweep_job(graph, config, job))
        .collect::<cohistory_core::Result<Vec<_>>>()?;
    Ok(PartitionEnsemble { partitions, gammas: config.gammas.clone(), reps_per_gamma: config.reps_per_gamma })
}
