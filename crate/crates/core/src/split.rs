//! Train/validation/test split protocol and label-noise injection.

use alloc::vec::Vec;

use rand::seq::index;

use crate::graph::{Edge, Sign, SignedDigraph, SignedEdge};
use crate::math::{floor_fraction, round};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitFractions {
    pub val: f64,
    pub test: f64,
    /// Share of the post-val/test remainder that loses its labels.
    pub unlabeled: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self { val: 0.05, test: 0.05, unlabeled: 0.75 }
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<()> {
        for (name, value) in [("val", self.val), ("test", self.test), ("unlabeled", self.unlabeled)] {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::InvalidFraction { name, value });
            }
        }
        if self.val + self.test >= 1.0 {
            return Err(Error::InvalidFraction { name: "val + test", value: self.val + self.test });
        }
        Ok(())
    }
}

/// Partition of a labeled edge universe into training-labeled,
/// training-unlabeled, validation and test edges.
///
/// `unlabeled_truth[i]` is the hidden sign of `train_unlabeled[i]`. It is kept
/// for diagnostics (e.g. pseudo-label accuracy) and never read by training.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitDataset {
    pub num_nodes: usize,
    pub train_labeled: Vec<SignedEdge>,
    pub train_unlabeled: Vec<Edge>,
    pub unlabeled_truth: Vec<Sign>,
    pub val: Vec<SignedEdge>,
    pub test: Vec<SignedEdge>,
    pub seed: u64,
    pub fractions: SplitFractions,
    /// Indices into `train_labeled` whose signs were flipped by [`inject_noise`].
    pub flipped: Vec<usize>,
}

/// Splits a fully labeled graph.
///
/// `|val| = floor(val·|E|)`, `|test| = floor(test·|E|)`, then
/// `floor(unlabeled·rest)` of the remainder become unlabeled and the rest stays
/// labeled. Sampling is uniform without replacement and deterministic in `seed`.
pub fn split_dataset(g: &SignedDigraph, seed: u64, fractions: SplitFractions) -> Result<SplitDataset> {
    fractions.validate()?;
    if !g.unlabeled_edges().is_empty() {
        return Err(Error::UnlabeledInput);
    }
    let edges = g.labeled_edges();
    let total = edges.len();
    if total < 4 {
        return Err(Error::TooFewEdges { needed: 4, found: total });
    }
    let n_val = floor_fraction(fractions.val, total);
    let n_test = floor_fraction(fractions.test, total);
    let rest = total - n_val - n_test;
    let n_unlabeled = floor_fraction(fractions.unlabeled, rest);

    let mut rng = stream_rng(seed, Stream::Split);
    let order = index::sample(&mut rng, total, total).into_vec();
    let take = |range: core::ops::Range<usize>| {
        let mut part: Vec<SignedEdge> = order[range].iter().map(|&i| edges[i]).collect();
        part.sort_unstable();
        part
    };
    let val = take(0..n_val);
    let test = take(n_val..n_val + n_test);
    let unlabeled = take(n_val + n_test..n_val + n_test + n_unlabeled);
    let train_labeled = take(n_val + n_test + n_unlabeled..total);

    Ok(SplitDataset {
        num_nodes: g.num_nodes(),
        train_labeled,
        train_unlabeled: unlabeled.iter().map(|e| e.edge).collect(),
        unlabeled_truth: unlabeled.iter().map(|e| e.sign).collect(),
        val,
        test,
        seed,
        fractions,
        flipped: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseSpec {
    pub flip_fraction: f64,
    pub seed: u64,
}

/// Negates the sign of exactly `round(p·|train_labeled|)` training-labeled
/// edges chosen uniformly; validation, test and unlabeled edges are untouched.
pub fn inject_noise(split: &SplitDataset, spec: NoiseSpec) -> Result<SplitDataset> {
    let p = spec.flip_fraction;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidFraction { name: "flip_fraction", value: p });
    }
    let n = split.train_labeled.len();
    let k = (round(p * n as f64) as usize).min(n);
    let mut rng = stream_rng(spec.seed, Stream::Noise);
    let mut flips = index::sample(&mut rng, n, k).into_vec();
    flips.sort_unstable();
    let mut out = split.clone();
    for &i in &flips {
        out.train_labeled[i].sign = out.train_labeled[i].sign.flipped();
    }
    out.flipped = flips;
    Ok(out)
}

impl SplitDataset {
    /// Graph seen during training: labeled training edges plus unlabeled
    /// structure. Validation and test edges are not part of it.
    pub fn training_graph(&self) -> SignedDigraph {
        SignedDigraph::from_parts(self.num_nodes, &self.train_labeled, &self.train_unlabeled)
            .expect("split parts are disjoint by construction")
    }

    /// Keeps a seeded prefix of the unlabeled set. Prefixes of one permutation
    /// are used, so for a fixed seed smaller fractions give nested subsets.
    pub fn with_unlabeled_fraction(&self, fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidFraction { name: "unlabeled subset", value: fraction });
        }
        let n = self.train_unlabeled.len();
        let keep = round(fraction * n as f64) as usize;
        let mut rng = stream_rng(seed, Stream::Subsample);
        let mut chosen = index::sample(&mut rng, n, n).into_vec();
        chosen.truncate(keep);
        chosen.sort_unstable();
        let mut out = self.clone();
        out.train_unlabeled = chosen.iter().map(|&i| self.train_unlabeled[i]).collect();
        out.unlabeled_truth = chosen.iter().map(|&i| self.unlabeled_truth[i]).collect();
        Ok(out)
    }

    pub fn num_edges(&self) -> usize {
        self.train_labeled.len() + self.train_unlabeled.len() + self.val.len() + self.test.len()
    }
}
