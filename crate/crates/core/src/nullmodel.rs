//! Value co-occurrence projection and scoring against a fixed-degree-sequence
//! null model.
//!
//! Random affiliation matrices with the observed row and column sums are
//! drawn with curveball trades. Each sample restarts from the observed
//! matrix and is seeded from `(master_seed, sample_index)`, so samples can
//! be computed in any order or on any number of threads. Per-pair moments
//! are accumulated as exact integers, which makes merging associative and
//! the final statistics independent of scheduling.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affiliation::AffiliationTable;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Which side of the matrix the curveball trades run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TradeAxis {
    /// The smaller of the two dimensions.
    #[default]
    Auto,
    /// Trades between two persons' value sets.
    Persons,
    /// Trades between two values' person sets.
    Values,
}

/// Edge weight used to rank co-occurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualKind {
    /// `(O - E) / sqrt(max(E, 1/N))`.
    #[default]
    Pearson,
    /// `(O - E) / max(sigma, 1/N)`.
    ZScore,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullModelConfig {
    pub ensemble_size: u32,
    /// `None` uses `5 * min(#persons, #values)`.
    pub trades_per_sample: Option<u64>,
    pub master_seed: u64,
    pub axis: TradeAxis,
    pub residual: ResidualKind,
}

impl Default for NullModelConfig {
    fn default() -> Self {
        NullModelConfig {
            ensemble_size: 10_000,
            trades_per_sample: None,
            master_seed: 0,
            axis: TradeAxis::Auto,
            residual: ResidualKind::Pearson,
        }
    }
}

impl NullModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size < 2 {
            return Err(Error::Config("ensemble_size must be at least 2".into()));
        }
        if self.trades_per_sample == Some(0) {
            return Err(Error::Config("trades_per_sample must be positive".into()));
        }
        Ok(())
    }

    pub fn trades_for(&self, table: &AffiliationTable) -> u64 {
        self.trades_per_sample.unwrap_or_else(|| default_trades(table))
    }
}

pub fn default_trades(table: &AffiliationTable) -> u64 {
    5 * table.num_persons().min(table.num_values()) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkKind {
    All,
    Positive,
}

/// Scored co-occurrence of two values; `a < b` index into the network nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoocEdge {
    pub a: u32,
    pub b: u32,
    pub observed: u64,
    pub expected: f64,
    pub sigma: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoocNetwork {
    /// Values with at least one observed co-occurrence, sorted.
    pub nodes: Vec<String>,
    /// Sorted by `(a, b)`.
    pub edges: Vec<CoocEdge>,
    pub kind: NetworkKind,
}

impl CoocNetwork {
    pub fn node_index(&self, value_id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|v| v.as_str().cmp(value_id)).ok()
    }

    /// Edge endpoints as value identifiers.
    pub fn endpoints(&self, edge: &CoocEdge) -> (&str, &str) {
        (&self.nodes[edge.a as usize], &self.nodes[edge.b as usize])
    }
}

/// Observed co-occurrence counts keyed by table value indices.
fn observed_pairs(table: &AffiliationTable) -> BTreeMap<(u32, u32), u64> {
    let mut pairs = BTreeMap::new();
    for row in table.rows() {
        for (i, &a) in row.iter().enumerate() {
            for &b in &row[i + 1..] {
                *pairs.entry((a, b)).or_insert(0u64) += 1;
            }
        }
    }
    pairs
}

/// Projects the table onto value co-occurrences. Pairs never observed
/// together are omitted.
pub fn project(table: &AffiliationTable) -> Result<CoocNetwork> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let pairs = observed_pairs(table);
    let (nodes, remap) = pair_nodes(table, &pairs);
    let edges = pairs
        .iter()
        .map(|(&(a, b), &observed)| CoocEdge {
            a: remap[a as usize],
            b: remap[b as usize],
            observed,
            expected: 0.0,
            sigma: 0.0,
            residual: 0.0,
        })
        .collect();
    Ok(CoocNetwork { nodes, edges, kind: NetworkKind::All })
}

fn pair_nodes(table: &AffiliationTable, pairs: &BTreeMap<(u32, u32), u64>) -> (Vec<String>, Vec<u32>) {
    let mut used = alloc::vec![false; table.num_values()];
    for &(a, b) in pairs.keys() {
        used[a as usize] = true;
        used[b as usize] = true;
    }
    let mut remap = alloc::vec![u32::MAX; table.num_values()];
    let mut nodes = Vec::new();
    for (i, v) in table.values().iter().enumerate() {
        if used[i] {
            remap[i] = nodes.len() as u32;
            nodes.push(v.clone());
        }
    }
    (nodes, remap)
}

/// Curveball sampler of binary matrices with fixed margins.
#[derive(Debug, Clone)]
pub struct Curveball {
    /// Sorted member lists along the trade axis.
    lists: Vec<Vec<u32>>,
    trade_on_values: bool,
    trades: u64,
    persons: Vec<String>,
    values: Vec<String>,
    row_degrees: Vec<u32>,
}

impl Curveball {
    pub fn new(table: &AffiliationTable, trades: u64, axis: TradeAxis) -> Self {
        let trade_on_values = match axis {
            TradeAxis::Persons => false,
            TradeAxis::Values => true,
            TradeAxis::Auto => table.num_values() < table.num_persons(),
        };
        let lists = if trade_on_values {
            let mut cols = alloc::vec![Vec::new(); table.num_values()];
            for (p, row) in table.rows().iter().enumerate() {
                for &v in row {
                    cols[v as usize].push(p as u32);
                }
            }
            cols
        } else {
            table.rows().to_vec()
        };
        Curveball {
            lists,
            trade_on_values,
            trades,
            persons: table.persons().to_vec(),
            values: table.values().to_vec(),
            row_degrees: table.row_degrees().to_vec(),
        }
    }

    pub fn trades(&self) -> u64 {
        self.trades
    }

    pub fn trades_on_values(&self) -> bool {
        self.trade_on_values
    }

    /// Draws one randomized matrix into `scratch` and returns its
    /// person-major rows.
    pub fn sample_into<'s>(&self, seed: u64, scratch: &'s mut Scratch) -> PersonRows<'s> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        scratch.lists.clone_from(&self.lists);
        let n = scratch.lists.len();
        if n >= 2 {
            for _ in 0..self.trades {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                trade(&mut scratch.lists, i, j, &mut rng, &mut scratch.trade);
            }
        }
        if self.trade_on_values {
            transpose_into(&scratch.lists, &self.row_degrees, &mut scratch.offsets, &mut scratch.flat);
            PersonRows::Flat { offsets: &scratch.offsets, flat: &scratch.flat }
        } else {
            PersonRows::Lists(&scratch.lists)
        }
    }

    pub fn sample(&self, seed: u64) -> AffiliationTable {
        let mut scratch = Scratch::default();
        let rows = self.sample_into(seed, &mut scratch);
        let rows: Vec<Vec<u32>> = (0..rows.len()).map(|p| rows.row(p).to_vec()).collect();
        AffiliationTable::from_parts(self.persons.clone(), self.values.clone(), rows)
    }
}

/// Reusable buffers for [`Curveball::sample_into`].
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    lists: Vec<Vec<u32>>,
    trade: TradeBuffers,
    offsets: Vec<usize>,
    flat: Vec<u32>,
}

/// Person-major view of a sampled matrix.
pub enum PersonRows<'s> {
    Lists(&'s [Vec<u32>]),
    Flat { offsets: &'s [usize], flat: &'s [u32] },
}

impl PersonRows<'_> {
    pub fn len(&self) -> usize {
        match self {
            PersonRows::Lists(l) => l.len(),
            PersonRows::Flat { offsets, .. } => offsets.len().saturating_sub(1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, p: usize) -> &[u32] {
        match self {
            PersonRows::Lists(l) => &l[p],
            PersonRows::Flat { offsets, flat } => &flat[offsets[p]..offsets[p + 1]],
        }
    }
}

fn transpose_into(cols: &[Vec<u32>], row_degrees: &[u32], offsets: &mut Vec<usize>, flat: &mut Vec<u32>) {
    offsets.clear();
    offsets.push(0);
    let mut acc = 0usize;
    for &d in row_degrees {
        acc += d as usize;
        offsets.push(acc);
    }
    flat.clear();
    flat.resize(acc, 0);
    let mut cursor: Vec<usize> = offsets[..row_degrees.len()].to_vec();
    for (v, col) in cols.iter().enumerate() {
        for &p in col {
            let slot = &mut cursor[p as usize];
            flat[*slot] = v as u32;
            *slot += 1;
        }
    }
}

/// One curveball trade: the symmetric difference of lists `i` and `j` is
/// redistributed uniformly, keeping both list lengths.
fn trade<R: Rng>(lists: &mut [Vec<u32>], i: usize, j: usize, rng: &mut R, buf: &mut TradeBuffers) {
    buf.pool.clear();
    buf.common.clear();
    let (li, lj) = (&lists[i], &lists[j]);
    let mut only_i = 0usize;
    let (mut x, mut y) = (0, 0);
    while x < li.len() && y < lj.len() {
        match li[x].cmp(&lj[y]) {
            core::cmp::Ordering::Less => {
                buf.pool.push(li[x]);
                only_i += 1;
                x += 1;
            }
            core::cmp::Ordering::Greater => {
                buf.pool.push(lj[y]);
                y += 1;
            }
            core::cmp::Ordering::Equal => {
                buf.common.push(li[x]);
                x += 1;
                y += 1;
            }
        }
    }
    only_i += li.len() - x;
    buf.pool.extend_from_slice(&li[x..]);
    buf.pool.extend_from_slice(&lj[y..]);
    if only_i == 0 || only_i == buf.pool.len() {
        return;
    }
    let (to_i, to_j) = buf.pool.partial_shuffle(rng, only_i);
    to_i.sort_unstable();
    to_j.sort_unstable();
    merge_sorted_into(&mut lists[i], &buf.common, to_i);
    merge_sorted_into(&mut lists[j], &buf.common, to_j);
}

fn merge_sorted_into(out: &mut Vec<u32>, a: &[u32], b: &[u32]) {
    out.clear();
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        if a[x] < b[y] {
            out.push(a[x]);
            x += 1;
        } else {
            out.push(b[y]);
            y += 1;
        }
    }
    out.extend_from_slice(&a[x..]);
    out.extend_from_slice(&b[y..]);
}

#[derive(Debug, Default, Clone)]
struct TradeBuffers {
    pool: Vec<u32>,
    common: Vec<u32>,
}

/// Draws one degree-preserving randomization of `table` with the default
/// trade count and axis.
pub fn sample_null(table: &AffiliationTable, sample_seed: u64) -> AffiliationTable {
    Curveball::new(table, default_trades(table), TradeAxis::Auto).sample(sample_seed)
}

/// Seed of ensemble sample `index`.
pub fn sample_seed(master_seed: u64, index: u64) -> u64 {
    derive_seed(master_seed, &[index])
}

/// Lookup from a table value pair to its observed-edge slot.
#[derive(Debug, Clone)]
enum PairLookup {
    Dense { n: usize, slots: Vec<u32> },
    Sparse(Vec<Vec<(u32, u32)>>),
}

const DENSE_LIMIT: usize = 1 << 22;

impl PairLookup {
    fn new(num_values: usize, pairs: &BTreeMap<(u32, u32), u64>) -> Self {
        if num_values * num_values <= DENSE_LIMIT {
            let mut slots = alloc::vec![u32::MAX; num_values * num_values];
            for (e, &(a, b)) in pairs.keys().enumerate() {
                slots[a as usize * num_values + b as usize] = e as u32;
            }
            PairLookup::Dense { n: num_values, slots }
        } else {
            let mut adj = alloc::vec![Vec::new(); num_values];
            for (e, &(a, b)) in pairs.keys().enumerate() {
                adj[a as usize].push((b, e as u32));
            }
            PairLookup::Sparse(adj)
        }
    }

    #[inline]
    fn slot(&self, a: u32, b: u32) -> Option<usize> {
        match self {
            PairLookup::Dense { n, slots } => {
                let s = slots[a as usize * n + b as usize];
                (s != u32::MAX).then_some(s as usize)
            }
            PairLookup::Sparse(adj) => {
                let list = &adj[a as usize];
                list.binary_search_by(|&(x, _)| x.cmp(&b)).ok().map(|i| list[i].1 as usize)
            }
        }
    }
}

/// Exact per-pair co-occurrence moments over a set of samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairMoments {
    pub samples: u64,
    pub sum: Vec<u64>,
    pub sum_sq: Vec<u128>,
}

impl PairMoments {
    pub fn new(num_pairs: usize) -> Self {
        PairMoments { samples: 0, sum: alloc::vec![0; num_pairs], sum_sq: alloc::vec![0; num_pairs] }
    }

    pub fn merge(&mut self, other: &PairMoments) {
        self.samples += other.samples;
        for (s, o) in self.sum.iter_mut().zip(&other.sum) {
            *s += o;
        }
        for (s, o) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *s += o;
        }
    }

    /// Ensemble mean of pair `e`.
    pub fn mean(&self, e: usize) -> f64 {
        self.sum[e] as f64 / self.samples as f64
    }

    /// Ensemble (population) standard deviation of pair `e`.
    pub fn sigma(&self, e: usize) -> f64 {
        let n = self.samples as u128;
        let s = self.sum[e] as u128;
        let num = n * self.sum_sq[e] - s * s;
        libm::sqrt(num as f64) / self.samples as f64
    }
}

/// Prepared null-model run over one affiliation table.
#[derive(Debug, Clone)]
pub struct NullModel {
    config: NullModelConfig,
    sampler: Curveball,
    lookup: PairLookup,
    observed: CoocNetwork,
}

impl NullModel {
    pub fn new(table: &AffiliationTable, config: NullModelConfig) -> Result<Self> {
        config.validate()?;
        if table.is_empty() {
            return Err(Error::EmptyTable);
        }
        let pairs = observed_pairs(table);
        let lookup = PairLookup::new(table.num_values(), &pairs);
        let observed = project(table)?;
        let sampler = Curveball::new(table, config.trades_for(table), config.axis);
        Ok(NullModel { config, sampler, lookup, observed })
    }

    pub fn config(&self) -> &NullModelConfig {
        &self.config
    }

    pub fn sampler(&self) -> &Curveball {
        &self.sampler
    }

    pub fn observed(&self) -> &CoocNetwork {
        &self.observed
    }

    pub fn num_pairs(&self) -> usize {
        self.observed.edges.len()
    }

    /// Accumulates the samples with indices in `range`.
    pub fn run_samples(&self, range: Range<u64>) -> PairMoments {
        let mut moments = PairMoments::new(self.num_pairs());
        let mut scratch = Scratch::default();
        let mut counts = alloc::vec![0u64; self.num_pairs()];
        for index in range {
            self.count_sample(index, &mut scratch, &mut counts);
            for (e, c) in counts.iter_mut().enumerate() {
                moments.sum[e] += *c;
                moments.sum_sq[e] += (*c as u128) * (*c as u128);
                *c = 0;
            }
            moments.samples += 1;
        }
        moments
    }

    /// Co-occurrence counts of sample `index` on the observed pairs.
    pub fn count_sample(&self, index: u64, scratch: &mut Scratch, counts: &mut [u64]) {
        let rows = self.sampler.sample_into(sample_seed(self.config.master_seed, index), scratch);
        for p in 0..rows.len() {
            let row = rows.row(p);
            if row.len() < 2 {
                continue;
            }
            for (i, &a) in row.iter().enumerate() {
                for &b in &row[i + 1..] {
                    if let Some(e) = self.lookup.slot(a, b) {
                        counts[e] += 1;
                    }
                }
            }
        }
    }

    /// Turns accumulated moments into the scored and positive networks.
    pub fn finish(&self, moments: &PairMoments) -> Result<(CoocNetwork, CoocNetwork)> {
        if moments.samples < 2 || moments.sum.len() != self.num_pairs() {
            return Err(Error::Config("moments do not match this null model".into()));
        }
        let floor = 1.0 / moments.samples as f64;
        let mut all = self.observed.clone();
        for (e, edge) in all.edges.iter_mut().enumerate() {
            edge.expected = moments.mean(e);
            edge.sigma = moments.sigma(e);
            let diff = edge.observed as f64 - edge.expected;
            edge.residual = match self.config.residual {
                ResidualKind::Pearson => diff / libm::sqrt(edge.expected.max(floor)),
                ResidualKind::ZScore => diff / edge.sigma.max(floor),
            };
        }
        let positive = CoocNetwork {
            nodes: all.nodes.clone(),
            edges: all.edges.iter().copied().filter(|e| e.residual > 0.0).collect(),
            kind: NetworkKind::Positive,
        };
        Ok((all, positive))
    }
}

/// Scores every observed pair against `config.ensemble_size` samples on the
/// current thread.
pub fn score(table: &AffiliationTable, config: NullModelConfig) -> Result<(CoocNetwork, CoocNetwork)> {
    let model = NullModel::new(table, config)?;
    let moments = model.run_samples(0..config.ensemble_size as u64);
    model.finish(&moments)
}
