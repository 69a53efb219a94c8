use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::graph::{NodeId, SignedDigraph};
use crate::math::{fabs, sqrt};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

use super::linalg::{orthonormalize, symmetric_eigen};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectralConfig {
    pub dim: usize,
    pub seed: u64,
    pub oversampling: usize,
    pub iterations: usize,
}

impl SpectralConfig {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, seed, oversampling: 10, iterations: 10 }
    }
}

/// Top left singular vectors of the unsigned adjacency matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFeatures {
    pub num_nodes: usize,
    pub dim: usize,
    /// `n × d`, row-major: row `u` is the feature vector of node `u`.
    pub matrix: Vec<f64>,
    pub singular_values: Vec<f64>,
}

impl SpectralFeatures {
    pub fn row(&self, node: NodeId) -> &[f64] {
        let s = node as usize * self.dim;
        &self.matrix[s..s + self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.num_nodes).map(|u| self.matrix[u * self.dim + j]).collect()
    }

    /// The matrix multiplied by `factor`, e.g. to match a target entry scale.
    pub fn scaled(&self, factor: f64) -> Vec<f64> {
        self.matrix.iter().map(|x| x * factor).collect()
    }
}

/// `y = A x` with `A[u][v] = 1` for every directed edge regardless of sign.
fn mul_a(g: &SignedDigraph, x: &[f64], y: &mut [f64]) {
    for (u, out) in y.iter_mut().enumerate() {
        *out = g.out_neighbors(u as NodeId).iter().map(|&v| x[v as usize]).sum();
    }
}

fn mul_at(g: &SignedDigraph, y: &[f64], x: &mut [f64]) {
    for (v, out) in x.iter_mut().enumerate() {
        *out = g.in_neighbors(v as NodeId).iter().map(|&u| y[u as usize]).sum();
    }
}

/// Randomized subspace iteration for the top-`d` left singular vectors of the
/// unsigned adjacency. Each column is oriented so that its largest-magnitude
/// entry is positive.
pub fn spectral_features(g: &SignedDigraph, config: SpectralConfig) -> Result<SpectralFeatures> {
    let n = g.num_nodes();
    let d = config.dim;
    if d == 0 {
        return Err(Error::InvalidParameter("spectral dimension must be positive"));
    }
    if d > n {
        return Err(Error::DimensionTooLarge { dim: d, num_nodes: n });
    }
    if g.num_edges() == 0 {
        return Ok(SpectralFeatures { num_nodes: n, dim: d, matrix: vec![0.0; n * d], singular_values: vec![0.0; d] });
    }
    let k = (d + config.oversampling).min(n);
    let mut rng = stream_rng(config.seed, Stream::Spectral);
    let omega: Vec<Vec<f64>> =
        (0..k).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();

    let mut q: Vec<Vec<f64>> = omega.iter().map(|w| {
        let mut y = vec![0.0; n];
        mul_a(g, w, &mut y);
        y
    }).collect();
    orthonormalize(&mut q);
    let mut tmp = vec![0.0; n];
    for _ in 0..config.iterations {
        for col in q.iter_mut() {
            mul_at(g, col, &mut tmp);
            mul_a(g, &tmp, col);
        }
        orthonormalize(&mut q);
    }

    // B = Qᵀ A (k × n); B Bᵀ = Qᵀ A Aᵀ Q has eigenvalues σ².
    let bt: Vec<Vec<f64>> = q.iter().map(|col| {
        let mut x = vec![0.0; n];
        mul_at(g, col, &mut x);
        x
    }).collect();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let v = crate::math::dot(&bt[i], &bt[j]);
            gram[i * k + j] = v;
            gram[j * k + i] = v;
        }
    }
    let (vals, vecs) = symmetric_eigen(gram, k);

    let mut matrix = vec![0.0; n * d];
    let mut singular_values = Vec::with_capacity(d);
    for j in 0..d {
        let mut col = vec![0.0; n];
        for (i, qi) in q.iter().enumerate() {
            let c = vecs[j][i];
            for (o, x) in col.iter_mut().zip(qi) {
                *o += c * x;
            }
        }
        let mut best = 0usize;
        for (i, x) in col.iter().enumerate() {
            if fabs(*x) > fabs(col[best]) + 1e-12 {
                best = i;
            }
        }
        let flip = if col[best] < 0.0 { -1.0 } else { 1.0 };
        for u in 0..n {
            matrix[u * d + j] = flip * col[u];
        }
        singular_values.push(sqrt(vals[j].max(0.0)));
    }
    Ok(SpectralFeatures { num_nodes: n, dim: d, matrix, singular_values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, EdgeLabel, Sign, SignedEdge};
    use crate::math::dot;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn check_orthonormal(f: &SpectralFeatures) {
        for i in 0..f.dim {
            for j in 0..f.dim {
                let v = dot(&f.column(i), &f.column(j));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-6, "({i},{j}) = {v}");
            }
        }
    }

    #[test]
    fn empty_graph_gives_zeros() {
        let g = SignedDigraph::empty(4);
        let f = spectral_features(&g, SpectralConfig::new(2, 1)).unwrap();
        assert!(f.matrix.iter().all(|&x| x == 0.0));
        assert!(spectral_features(&g, SpectralConfig::new(5, 1)).is_err());
    }

    #[test]
    fn perfect_matching_has_unit_singular_values() {
        let edges: Vec<_> = (0..5).map(|i| (Edge::new(2 * i, 2 * i + 1), EdgeLabel::Positive)).chain(
            (0..5).map(|i| (Edge::new(2 * i + 1, 2 * i), EdgeLabel::Unlabeled)),
        ).collect();
        let g = SignedDigraph::new(10, edges).unwrap();
        let f = spectral_features(&g, SpectralConfig::new(4, 3)).unwrap();
        for s in &f.singular_values {
            assert!((s - 1.0).abs() < 1e-9);
        }
        check_orthonormal(&f);
    }

    #[test]
    fn matches_dense_svd_subspace() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 20;
        let mut signed = Vec::new();
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                if u != v && rng.random_bool(0.25) {
                    signed.push(SignedEdge::new(u, v, if rng.random_bool(0.8) { Sign::Positive } else { Sign::Negative }));
                }
            }
        }
        let g = SignedDigraph::from_parts(n, &signed, &[]).unwrap();
        let d = 5;
        let f = spectral_features(&g, SpectralConfig::new(d, 9)).unwrap();
        check_orthonormal(&f);

        let mut a = DMatrix::<f64>::zeros(n, n);
        for e in &signed {
            a[(e.edge.src as usize, e.edge.dst as usize)] = 1.0;
        }
        let svd = a.clone().svd(true, false);
        let u = svd.u.unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        for (j, &i) in order.iter().take(d).enumerate() {
            assert!((f.singular_values[j] - svd.singular_values[i]).abs() < 1e-6);
        }
        // sin of the largest principal angle = ‖(I − U Uᵀ) F‖₂ ≤ Frobenius norm
        let top = DMatrix::from_fn(n, d, |r, c| u[(r, order[c])]);
        let ours = DMatrix::from_fn(n, d, |r, c| f.matrix[r * d + c]);
        let resid = &ours - &top * (top.transpose() * &ours);
        assert!(resid.norm() < 1e-6, "residual {}", resid.norm());
    }

    #[test]
    fn deterministic_and_sign_normalized() {
        let signed: Vec<_> = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]
            .iter()
            .map(|&(u, v)| SignedEdge::new(u, v, Sign::Positive))
            .collect();
        let g = SignedDigraph::from_parts(5, &signed, &[]).unwrap();
        let a = spectral_features(&g, SpectralConfig::new(2, 4)).unwrap();
        let b = spectral_features(&g, SpectralConfig::new(2, 4)).unwrap();
        assert_eq!(a, b);
        for j in 0..2 {
            let col = a.column(j);
            let big = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
    }
}
