use core::fmt;

use crate::community::Partition;
use crate::graph::{Sign, SignedDigraph};

use super::triads::enumerate_transitive_triads;

/// Sign pattern of a fully signed transitive triad, in the edge order
/// `(u, v)`, `(v, w)`, `(u, w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern(pub [Sign; 3]);

impl Pattern {
    /// Bit `i` set when edge `i` is negative.
    pub const fn index(self) -> usize {
        let mut idx = 0;
        let mut i = 0;
        while i < 3 {
            if matches!(self.0[i], Sign::Negative) {
                idx |= 1 << i;
            }
            i += 1;
        }
        idx
    }

    pub fn from_index(idx: usize) -> Self {
        let s = |bit: usize| if idx & (1 << bit) != 0 { Sign::Negative } else { Sign::Positive };
        Pattern([s(0), s(1), s(2)])
    }

    pub fn is_balanced(self) -> bool {
        self.0[0] * self.0[1] * self.0[2] == Sign::Positive
    }

    pub fn all() -> impl Iterator<Item = Pattern> {
        (0..8).map(Pattern::from_index)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.0 {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

/// The four balanced patterns: `+++`, `+--`, `-+-`, `--+`.
pub const BALANCED_PATTERNS: [Pattern; 4] = {
    use Sign::{Negative as N, Positive as P};
    [Pattern([P, P, P]), Pattern([P, N, N]), Pattern([N, P, N]), Pattern([N, N, P])]
};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CensusReport {
    /// Indexed by [`Pattern::index`].
    pub counts: [u64; 8],
    /// Triads with at least one unlabeled edge (skipped by the census).
    pub skipped: u64,
    /// Labeled edges agreeing with the partition (when one was given).
    pub meso_consistent: Option<u64>,
    pub labeled_edges: u64,
}

impl CensusReport {
    pub fn count(&self, p: Pattern) -> u64 {
        self.counts[p.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn balanced(&self) -> u64 {
        Pattern::all().filter(|p| p.is_balanced()).map(|p| self.count(p)).sum()
    }

    /// `None` when there is no fully signed triad.
    pub fn balanced_fraction(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.balanced() as f64 / total as f64)
    }

    pub fn meso_fraction(&self) -> Option<f64> {
        let m = self.meso_consistent?;
        (self.labeled_edges > 0).then(|| m as f64 / self.labeled_edges as f64)
    }
}

pub fn triad_census(g: &SignedDigraph, partition: Option<&Partition>) -> CensusReport {
    let mut report = CensusReport { labeled_edges: g.num_labeled() as u64, ..Default::default() };
    for t in enumerate_transitive_triads(g) {
        match (t.labels[0].sign(), t.labels[1].sign(), t.labels[2].sign()) {
            (Some(a), Some(b), Some(c)) => report.counts[Pattern([a, b, c]).index()] += 1,
            _ => report.skipped += 1,
        }
    }
    report.meso_consistent = partition.map(|p| meso_consistency_count(g, p));
    report
}

/// Labeled edges that are positive within a community or negative across.
pub fn meso_consistency_count(g: &SignedDigraph, partition: &Partition) -> u64 {
    let pos = g.positive_edges().iter().filter(|e| partition.same_community(e.src, e.dst)).count();
    let neg = g.negative_edges().iter().filter(|e| !partition.same_community(e.src, e.dst)).count();
    (pos + neg) as u64
}
