use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::graph::{Edge, NodeId};
use crate::math::dot;
use crate::{Error, Result};

/// How the edge vector `Z_ℓ` scored by `ψ` is formed from the endpoint embeddings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EdgeRepr {
    /// `z_u ‖ z_v`, `ψ ∈ R^{2d}`.
    Concat,
    /// `z_u ‖ z_v ‖ (z_u ⊙ z_v)`, `ψ ∈ R^{3d}`. The product block lets the
    /// scorer express agreement between endpoints, which a purely additive
    /// score over the concatenation cannot.
    #[default]
    ConcatHadamard,
}

impl EdgeRepr {
    pub const fn scorer_len(self, dim: usize) -> usize {
        match self {
            EdgeRepr::Concat => 2 * dim,
            EdgeRepr::ConcatHadamard => 3 * dim,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeRepr::Concat => "concat",
            EdgeRepr::ConcatHadamard => "concat_hadamard",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InitMode {
    /// Rows of `Z` from the top singular vectors of the training adjacency.
    #[default]
    Spectral,
    /// `N(0, 0.1²)` entries.
    Gaussian,
}

/// `Θ = {Z, ψ}` stored as one flat vector: `Z` row-major first, then `ψ`.
/// Gradients use the same layout.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    num_nodes: usize,
    dim: usize,
    repr: EdgeRepr,
    values: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(num_nodes: usize, dim: usize, repr: EdgeRepr) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("embedding dimension must be positive"));
        }
        let len = num_nodes * dim + repr.scorer_len(dim);
        Ok(Self { num_nodes, dim, repr, values: alloc::vec![0.0; len] })
    }

    pub fn from_parts(num_nodes: usize, dim: usize, repr: EdgeRepr, z: &[f64], psi: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(num_nodes, dim, repr)?;
        if z.len() != num_nodes * dim {
            return Err(Error::ShapeMismatch { expected: num_nodes * dim, found: z.len() });
        }
        if psi.len() != repr.scorer_len(dim) {
            return Err(Error::ShapeMismatch { expected: repr.scorer_len(dim), found: psi.len() });
        }
        p.values[..z.len()].copy_from_slice(z);
        p.values[z.len()..].copy_from_slice(psi);
        if !p.values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("model parameters"));
        }
        Ok(p)
    }

    /// Gaussian `Z` (scale 0.1) or `Z = features`, and `ψ ~ N(0, 0.01²)`.
    pub fn init<R: Rng>(
        num_nodes: usize,
        dim: usize,
        repr: EdgeRepr,
        features: Option<&[f64]>,
        rng: &mut R,
    ) -> Result<Self> {
        let mut p = Self::zeros(num_nodes, dim, repr)?;
        let split = num_nodes * dim;
        match features {
            Some(f) => {
                if f.len() != split {
                    return Err(Error::ShapeMismatch { expected: split, found: f.len() });
                }
                p.values[..split].copy_from_slice(f);
            }
            None => {
                let normal = Normal::new(0.0, 0.1).expect("valid normal");
                for v in &mut p.values[..split] {
                    *v = normal.sample(rng);
                }
            }
        }
        let normal = Normal::new(0.0, 0.01).expect("valid normal");
        for v in &mut p.values[split..] {
            *v = normal.sample(rng);
        }
        Ok(p)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn repr(&self) -> EdgeRepr {
        self.repr
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn embeddings(&self) -> &[f64] {
        &self.values[..self.psi_offset()]
    }

    pub fn embedding(&self, node: NodeId) -> &[f64] {
        let start = node as usize * self.dim;
        &self.values[start..start + self.dim]
    }

    pub fn scorer(&self) -> &[f64] {
        &self.values[self.psi_offset()..]
    }

    pub(crate) fn psi_offset(&self) -> usize {
        self.num_nodes * self.dim
    }

    pub(crate) fn row_offset(&self, node: NodeId) -> usize {
        node as usize * self.dim
    }

    /// `a = ψ · Z_ℓ`.
    pub fn logit(&self, edge: Edge) -> f64 {
        let d = self.dim;
        let zu = self.embedding(edge.src);
        let zv = self.embedding(edge.dst);
        let psi = self.scorer();
        let mut a = dot(&psi[..d], zu) + dot(&psi[d..2 * d], zv);
        if self.repr == EdgeRepr::ConcatHadamard {
            let h = &psi[2 * d..];
            a += (0..d).map(|k| h[k] * zu[k] * zv[k]).sum::<f64>();
        }
        a
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn zeros_like(&self) -> Vec<f64> {
        alloc::vec![0.0; self.values.len()]
    }
}
