//! Accuracy and Macro-F1 over the two sign classes.

use crate::graph::Sign;
use crate::{Error, Result};

/// 2 × 2 confusion counts, indexed `[actual][predicted]` with 0 = positive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Confusion {
    pub counts: [[u64; 2]; 2],
}

fn class(s: Sign) -> usize {
    match s {
        Sign::Positive => 0,
        Sign::Negative => 1,
    }
}

impl Confusion {
    pub fn from_pairs(predictions: &[Sign], labels: &[Sign]) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::ShapeMismatch { expected: labels.len(), found: predictions.len() });
        }
        if labels.is_empty() {
            return Err(Error::Empty("predictions"));
        }
        let mut c = Self::default();
        for (p, l) in predictions.iter().zip(labels) {
            c.counts[class(*l)][class(*p)] += 1;
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        (self.counts[0][0] + self.counts[1][1]) as f64 / self.total() as f64
    }

    /// F1 of one class, or `None` if it appears in neither labels nor predictions.
    pub fn f1(&self, sign: Sign) -> Option<f64> {
        let c = class(sign);
        let tp = self.counts[c][c];
        let actual = self.counts[c][0] + self.counts[c][1];
        let predicted = self.counts[0][c] + self.counts[1][c];
        if actual == 0 && predicted == 0 {
            return None;
        }
        Some(2.0 * tp as f64 / (actual + predicted) as f64)
    }

    pub fn macro_f1(&self) -> MacroF1 {
        let f_pos = self.f1(Sign::Positive);
        let f_neg = self.f1(Sign::Negative);
        match (f_pos, f_neg) {
            (Some(a), Some(b)) => MacroF1 { value: (a + b) / 2.0, degenerate: false },
            (Some(a), None) | (None, Some(a)) => MacroF1 { value: a, degenerate: true },
            (None, None) => unreachable!("confusion is nonempty"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MacroF1 {
    pub value: f64,
    /// Only one class occurs in labels and predictions; `value` is its F1.
    pub degenerate: bool,
}

pub fn accuracy(predictions: &[Sign], labels: &[Sign]) -> Result<f64> {
    Ok(Confusion::from_pairs(predictions, labels)?.accuracy())
}

pub fn macro_f1(predictions: &[Sign], labels: &[Sign]) -> Result<f64> {
    Ok(Confusion::from_pairs(predictions, labels)?.macro_f1().value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use Sign::{Negative as N, Positive as P};

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[P, N], &[P, N]).unwrap(), 1.0);
        assert_eq!(accuracy(&[N, P], &[P, N]).unwrap(), 0.0);
        assert_eq!(accuracy(&[P, N, N, N], &[P, P, N, N]).unwrap(), 0.75);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[P], &[P, N]).is_err());
    }

    #[test]
    fn macro_f1_examples() {
        assert_eq!(macro_f1(&[P, N, P], &[P, N, P]).unwrap(), 1.0);
        let m = macro_f1(&[P, P, P, P], &[P, P, P, N]).unwrap();
        assert!((m - 3.0 / 7.0).abs() < 1e-15);
        let single = Confusion::from_pairs(&[P, P], &[P, P]).unwrap().macro_f1();
        assert_eq!(single, MacroF1 { value: 1.0, degenerate: true });
    }

    fn flip(v: &[Sign]) -> Vec<Sign> {
        v.iter().map(|s| s.flipped()).collect()
    }

    proptest! {
        #[test]
        fn class_swap_symmetry(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
            let to = |b: bool| if b { P } else { N };
            let preds: Vec<Sign> = pairs.iter().map(|p| to(p.0)).collect();
            let labels: Vec<Sign> = pairs.iter().map(|p| to(p.1)).collect();
            let a = macro_f1(&preds, &labels).unwrap();
            let b = macro_f1(&flip(&preds), &flip(&labels)).unwrap();
            prop_assert!((a - b).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&a));
            let acc = accuracy(&preds, &labels).unwrap();
            let hits = pairs.iter().filter(|p| p.0 == p.1).count();
            prop_assert_eq!(acc, hits as f64 / pairs.len() as f64);
        }
    }
}
