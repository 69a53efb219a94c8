use alloc::vec::Vec;

use rand::Rng;

use crate::community::Partition;
use crate::graph::{Edge, EdgeLabel, SignedDigraph};
use crate::hash::set_with_capacity;
use crate::math::{ceil_ln_budget, mean, sample_std};
use crate::rng::{derive_seed, stream_rng, Stream};

use super::census::{meso_consistency_count, triad_census, BALANCED_PATTERNS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwapStats {
    pub attempted: u64,
    pub accepted: u64,
}

impl SwapStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}

/// `ceil(|E|·ln|E|)` proposals for `|E|` labeled edges.
pub fn default_swap_budget(g: &SignedDigraph) -> u64 {
    ceil_ln_budget(g.num_labeled())
}

/// One draw of the signed degree-preserving null model.
///
/// Each proposal picks a labeled edge `(a, b)` uniformly and a second distinct
/// edge `(c, d)` of the same sign, and rewires them to `(a, d)`, `(c, b)`.
/// Proposals creating a self-loop, a no-op, or an ordered pair already present
/// in any edge set (whatever its sign) are rejected. The budget counts
/// proposals. Unlabeled edges never move but still block proposals.
pub fn null_model_sample(g: &SignedDigraph, seed: u64, swaps: Option<u64>) -> (SignedDigraph, SwapStats) {
    let budget = swaps.unwrap_or_else(|| default_swap_budget(g));
    let mut groups: [Vec<Edge>; 2] = [g.positive_edges().to_vec(), g.negative_edges().to_vec()];
    let mut occupied = set_with_capacity(g.num_edges());
    for (e, _) in g.edges() {
        occupied.insert(e.key());
    }
    let total = groups[0].len() + groups[1].len();
    let mut stats = SwapStats { attempted: budget, accepted: 0 };
    let mut rng = stream_rng(seed, Stream::NullModel);
    if total >= 2 {
        for _ in 0..budget {
            let first = rng.random_range(0..total);
            let (gi, i) = if first < groups[0].len() { (0, first) } else { (1, first - groups[0].len()) };
            let group = &mut groups[gi];
            if group.len() < 2 {
                continue;
            }
            let mut j = rng.random_range(0..group.len() - 1);
            if j >= i {
                j += 1;
            }
            let (Edge { src: a, dst: b }, Edge { src: c, dst: d }) = (group[i], group[j]);
            if a == c || b == d || a == d || c == b {
                continue;
            }
            let (ad, cb) = (Edge::new(a, d), Edge::new(c, b));
            if occupied.contains(&ad.key()) || occupied.contains(&cb.key()) {
                continue;
            }
            occupied.remove(&group[i].key());
            occupied.remove(&group[j].key());
            occupied.insert(ad.key());
            occupied.insert(cb.key());
            group[i] = ad;
            group[j] = cb;
            stats.accepted += 1;
        }
    }
    let edges = groups[0]
        .iter()
        .map(|&e| (e, EdgeLabel::Positive))
        .chain(groups[1].iter().map(|&e| (e, EdgeLabel::Negative)))
        .chain(g.unlabeled_edges().iter().map(|&e| (e, EdgeLabel::Unlabeled)));
    let sample = SignedDigraph::new(g.num_nodes(), edges).expect("swaps keep the graph simple");
    (sample, stats)
}

/// Statistics of one null-model draw.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NullSampleStats {
    pub pattern_counts: [u64; 8],
    pub meso_consistent: Option<u64>,
    pub swaps: SwapStats,
}

/// Draws null sample `index` (its seed derived from `seed`) and measures it.
/// The partition, when given, stays the one computed on the original graph.
pub fn null_sample_statistics(
    g: &SignedDigraph,
    partition: Option<&Partition>,
    seed: u64,
    index: u64,
    swaps: Option<u64>,
) -> NullSampleStats {
    let (sample, swaps) = null_model_sample(g, derive_seed(seed, index), swaps);
    let census = triad_census(&sample, None);
    NullSampleStats {
        pattern_counts: census.counts,
        meso_consistent: partition.map(|p| meso_consistency_count(&sample, p)),
        swaps,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZScore {
    pub empirical: f64,
    pub null_mean: f64,
    pub null_std: f64,
    /// `None` when the null distribution has zero spread.
    pub z: Option<f64>,
}

impl ZScore {
    pub fn new(empirical: f64, null_values: &[f64]) -> Self {
        let null_mean = mean(null_values);
        let null_std = sample_std(null_values);
        let z = (null_std > 0.0).then(|| (empirical - null_mean) / null_std);
        Self { empirical, null_mean, null_std, z }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZScoreReport {
    /// One entry per [`BALANCED_PATTERNS`] element, same order.
    pub balanced: [ZScore; 4],
    /// All eight patterns, indexed by `Pattern::index`.
    pub patterns: [ZScore; 8],
    pub meso: Option<ZScore>,
    pub swaps: Vec<SwapStats>,
}

impl ZScoreReport {
    pub fn from_samples(g: &SignedDigraph, partition: Option<&Partition>, samples: &[NullSampleStats]) -> Self {
        let census = triad_census(g, partition);
        let patterns: [ZScore; 8] = core::array::from_fn(|i| {
            let null: Vec<f64> = samples.iter().map(|s| s.pattern_counts[i] as f64).collect();
            ZScore::new(census.counts[i] as f64, &null)
        });
        let balanced = BALANCED_PATTERNS.map(|p| patterns[p.index()]);
        let meso = census.meso_consistent.map(|emp| {
            let null: Vec<f64> = samples.iter().filter_map(|s| s.meso_consistent).map(|m| m as f64).collect();
            ZScore::new(emp as f64, &null)
        });
        Self { balanced, patterns, meso, swaps: samples.iter().map(|s| s.swaps).collect() }
    }
}

/// Sequential z-score report over `n_samples` null draws.
pub fn zscore_report(
    g: &SignedDigraph,
    partition: Option<&Partition>,
    n_samples: usize,
    seed: u64,
    swaps: Option<u64>,
) -> ZScoreReport {
    let samples: Vec<_> =
        (0..n_samples as u64).map(|i| null_sample_statistics(g, partition, seed, i, swaps)).collect();
    ZScoreReport::from_samples(g, partition, &samples)
}
