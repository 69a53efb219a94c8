use alloc::vec::Vec;

use crate::graph::{Edge, NodeId, Sign, SignedEdge};
use crate::math::{dot, log_logistic, logistic, softplus};
use crate::{Error, Result};

use super::params::{EdgeRepr, ModelParams};

/// Lower bound applied to log-probabilities in the sign loss.
pub const LOG_CLAMP: f64 = -100.0;

/// `s_ℓ = logistic(ψ · Z_ℓ)`, kept strictly inside `(0, 1)`.
pub fn score_edge(params: &ModelParams, src: NodeId, dst: NodeId) -> f64 {
    let s = logistic(params.logit(Edge::new(src, dst)));
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Clamped binary cross-entropy of one edge as a function of its logit `a`.
/// Returns the loss and `dL/da` (zero where the clamp is active).
fn clamped_bce(a: f64, sign: Sign) -> (f64, f64) {
    match sign {
        Sign::Positive => {
            let log_s = log_logistic(a);
            if log_s > LOG_CLAMP {
                (-log_s, logistic(a) - 1.0)
            } else {
                (-LOG_CLAMP, 0.0)
            }
        }
        Sign::Negative => {
            let log_not_s = log_logistic(-a);
            if log_not_s > LOG_CLAMP {
                (-log_not_s, logistic(a))
            } else {
                (-LOG_CLAMP, 0.0)
            }
        }
    }
}

/// `out += coef · ∂a/∂Θ` for the logit of `edge`. Touches only `ψ` and the
/// rows of the two endpoints.
pub(crate) fn add_logit_jacobian(params: &ModelParams, edge: Edge, coef: f64, out: &mut [f64]) {
    if coef == 0.0 {
        return;
    }
    let d = params.dim();
    let (ou, ov, op) = (params.row_offset(edge.src), params.row_offset(edge.dst), params.psi_offset());
    let vals = params.values();
    let psi = &vals[op..];
    for k in 0..d {
        let zu = vals[ou + k];
        let zv = vals[ov + k];
        out[op + k] += coef * zu;
        out[op + d + k] += coef * zv;
        let (mut du, mut dv) = (psi[k], psi[d + k]);
        if params.repr() == EdgeRepr::ConcatHadamard {
            out[op + 2 * d + k] += coef * zu * zv;
            du += psi[2 * d + k] * zv;
            dv += psi[2 * d + k] * zu;
        }
        out[ou + k] += coef * du;
        out[ov + k] += coef * dv;
    }
}

/// `⟨∂a/∂Θ, dense⟩` without materializing the Jacobian.
pub(crate) fn logit_jacobian_dot(params: &ModelParams, edge: Edge, dense: &[f64]) -> f64 {
    let d = params.dim();
    let (ou, ov, op) = (params.row_offset(edge.src), params.row_offset(edge.dst), params.psi_offset());
    let vals = params.values();
    let psi = &vals[op..];
    let mut acc = 0.0;
    for k in 0..d {
        let zu = vals[ou + k];
        let zv = vals[ov + k];
        acc += zu * dense[op + k] + zv * dense[op + d + k];
        let (mut du, mut dv) = (psi[k], psi[d + k]);
        if params.repr() == EdgeRepr::ConcatHadamard {
            acc += zu * zv * dense[op + 2 * d + k];
            du += psi[2 * d + k] * zv;
            dv += psi[2 * d + k] * zu;
        }
        acc += du * dense[ou + k] + dv * dense[ov + k];
    }
    acc
}

/// Loss value with its per-sample terms and its dense gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// Unweighted per-sample losses; the weighted sum gives `value`.
    pub per_sample: Vec<f64>,
    pub grad: Vec<f64>,
}

/// Gradient of one sample's sign loss: nonzero only on `ψ` and two rows of `Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseGradient {
    pub psi: Vec<f64>,
    pub src: NodeId,
    pub d_src: Vec<f64>,
    pub dst: NodeId,
    pub d_dst: Vec<f64>,
}

impl SparseGradient {
    pub fn to_dense(&self, params: &ModelParams) -> Vec<f64> {
        let mut out = params.zeros_like();
        let op = params.psi_offset();
        for (o, g) in out[op..].iter_mut().zip(&self.psi) {
            *o += g;
        }
        for (node, g) in [(self.src, &self.d_src), (self.dst, &self.d_dst)] {
            let off = params.row_offset(node);
            for (o, v) in out[off..off + g.len()].iter_mut().zip(g) {
                *o += v;
            }
        }
        out
    }
}

/// Per-sample sign losses and logit residuals `dL/da` at fixed parameters.
///
/// The gradient of sample `i` is `residual_i · ∂a_i/∂Θ`, so weighted batch
/// gradients and per-sample inner products are cheap to form.
#[derive(Clone, Debug)]
pub struct SignBatch<'p> {
    params: &'p ModelParams,
    edges: Vec<Edge>,
    losses: Vec<f64>,
    residuals: Vec<f64>,
}

impl<'p> SignBatch<'p> {
    pub fn new(params: &'p ModelParams, samples: impl IntoIterator<Item = SignedEdge>) -> Self {
        let iter = samples.into_iter();
        let cap = iter.size_hint().0;
        let mut batch = Self {
            params,
            edges: Vec::with_capacity(cap),
            losses: Vec::with_capacity(cap),
            residuals: Vec::with_capacity(cap),
        };
        for s in iter {
            let (loss, r) = clamped_bce(params.logit(s.edge), s.sign);
            batch.edges.push(s.edge);
            batch.losses.push(loss);
            batch.residuals.push(r);
        }
        batch
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// `Σ_i w_i L_i`.
    pub fn loss(&self, weights: &[f64]) -> f64 {
        self.losses.iter().zip(weights).map(|(l, w)| l * w).sum()
    }

    /// `out += scale · Σ_i w_i ∇L_i`.
    pub fn add_gradient(&self, weights: &[f64], scale: f64, out: &mut [f64]) {
        for ((e, r), w) in self.edges.iter().zip(&self.residuals).zip(weights) {
            add_logit_jacobian(self.params, *e, scale * w * r, out);
        }
    }

    pub fn gradient(&self, weights: &[f64]) -> Vec<f64> {
        let mut g = self.params.zeros_like();
        self.add_gradient(weights, 1.0, &mut g);
        g
    }

    /// `⟨∇L_i, dense⟩`.
    pub fn per_sample_dot(&self, i: usize, dense: &[f64]) -> f64 {
        self.residuals[i] * logit_jacobian_dot(self.params, self.edges[i], dense)
    }

    pub fn per_sample_grad(&self, i: usize) -> SparseGradient {
        let p = self.params;
        let d = p.dim();
        let mut dense = p.zeros_like();
        add_logit_jacobian(p, self.edges[i], self.residuals[i], &mut dense);
        let e = self.edges[i];
        let row = |n: NodeId| dense[p.row_offset(n)..p.row_offset(n) + d].to_vec();
        SparseGradient {
            psi: dense[p.psi_offset()..].to_vec(),
            src: e.src,
            d_src: row(e.src),
            dst: e.dst,
            d_dst: row(e.dst),
        }
    }
}

/// `Σ_i w_i [−t_i·clog(s_i) − (1−t_i)·clog(1−s_i)]` with
/// `clog(x) = max(log x, −100)`, `t = 1` for positive edges.
pub fn sign_loss(params: &ModelParams, samples: &[SignedEdge], weights: &[f64]) -> Result<LossValue> {
    if samples.len() != weights.len() {
        return Err(Error::ShapeMismatch { expected: samples.len(), found: weights.len() });
    }
    let batch = SignBatch::new(params, samples.iter().copied());
    Ok(LossValue { value: batch.loss(weights), grad: batch.gradient(weights), per_sample: batch.losses })
}

/// Graph-level auxiliary loss on the embeddings. Implementations may ignore `ψ`.
pub trait TaskLoss {
    fn evaluate(&self, params: &ModelParams, labeled: &[SignedEdge]) -> LossValue;
}

/// Signed proximity: `mean_ℓ −log logistic(σ(ℓ) · z_u·z_v)`. Pulls endpoints
/// of positive edges together and pushes negative ones apart.
#[derive(Clone, Copy, Debug, Default)]
pub struct SignedProximity;

impl TaskLoss for SignedProximity {
    fn evaluate(&self, params: &ModelParams, labeled: &[SignedEdge]) -> LossValue {
        let mut grad = params.zeros_like();
        if labeled.is_empty() {
            return LossValue { value: 0.0, per_sample: Vec::new(), grad };
        }
        let inv_n = 1.0 / labeled.len() as f64;
        let d = params.dim();
        let mut per_sample = Vec::with_capacity(labeled.len());
        for e in labeled {
            let (zu, zv) = (params.embedding(e.edge.src), params.embedding(e.edge.dst));
            let y = e.sign.value();
            let x = dot(zu, zv);
            per_sample.push(softplus(-y * x));
            // d/dx softplus(−y·x) = −y·logistic(−y·x)
            let coef = -y * logistic(-y * x) * inv_n;
            let (ou, ov) = (params.row_offset(e.edge.src), params.row_offset(e.edge.dst));
            for k in 0..d {
                let (a, b) = (params.values()[ou + k], params.values()[ov + k]);
                grad[ou + k] += coef * b;
                grad[ov + k] += coef * a;
            }
        }
        let value = per_sample.iter().sum::<f64>() * inv_n;
        LossValue { value, per_sample, grad }
    }
}

pub fn task_loss(params: &ModelParams, labeled: &[SignedEdge]) -> LossValue {
    SignedProximity.evaluate(params, labeled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use libm::log;

    fn toy() -> ModelParams {
        // d = 1, z_0 = 1, z_1 = 2, ψ = (1, −1)
        ModelParams::from_parts(2, 1, EdgeRepr::Concat, &[1.0, 2.0], &[1.0, -1.0]).unwrap()
    }

    #[test]
    fn toy_score_and_loss() {
        let p = toy();
        let s = score_edge(&p, 0, 1);
        // logistic(−1)
        assert!((s - 0.268_941_421_369_995_1).abs() < 1e-15);
        let l = sign_loss(&p, &[SignedEdge::new(0, 1, Sign::Positive)], &[1.0]).unwrap();
        assert!((l.value - 1.313_261_687_518_222_7).abs() < 1e-12);
        assert!((l.value + log(s)).abs() < 1e-12);
    }

    #[test]
    fn zero_scorer_gives_half() {
        let p = ModelParams::from_parts(3, 2, EdgeRepr::ConcatHadamard, &[0.3, -1.0, 2.0, 0.5, 1.0, 1.0], &[0.0; 6]).unwrap();
        for (u, v) in [(0, 1), (1, 2), (2, 0)] {
            assert_eq!(score_edge(&p, u, v), 0.5);
        }
    }

    #[test]
    fn scores_stay_inside_open_interval() {
        for a in [1e4, -1e4, 800.0, -800.0, 40.0] {
            let p = ModelParams::from_parts(2, 1, EdgeRepr::Concat, &[a, 0.0], &[1.0, 0.0]).unwrap();
            let s = score_edge(&p, 0, 1);
            assert!(s > 0.0 && s < 1.0, "a={a} s={s}");
            let l = sign_loss(&p, &[SignedEdge::new(0, 1, Sign::Negative), SignedEdge::new(0, 1, Sign::Positive)], &[1.0, 1.0]).unwrap();
            assert!(l.value.is_finite());
            assert!(l.per_sample.iter().all(|&x| (0.0..=-LOG_CLAMP).contains(&x)));
            assert!(l.grad.iter().all(|g| g.is_finite()));
        }
    }

    #[test]
    fn correct_confident_prediction_has_small_loss() {
        let p = ModelParams::from_parts(2, 1, EdgeRepr::Concat, &[30.0, 0.0], &[1.0, 0.0]).unwrap();
        let l = sign_loss(&p, &[SignedEdge::new(0, 1, Sign::Positive)], &[1.0]).unwrap();
        assert!(l.value < 1e-12);
    }

    #[test]
    fn zero_weights_contribute_nothing() {
        let p = toy();
        let samples = [SignedEdge::new(0, 1, Sign::Positive), SignedEdge::new(1, 0, Sign::Negative)];
        let l = sign_loss(&p, &samples, &[0.0, 0.0]).unwrap();
        assert_eq!(l.value, 0.0);
        assert!(l.grad.iter().all(|&g| g == 0.0));
        assert!(sign_loss(&p, &samples, &[1.0]).is_err());
    }

    #[test]
    fn weighted_per_sample_gradients_sum_to_batch_gradient() {
        let p = ModelParams::from_parts(3, 2, EdgeRepr::ConcatHadamard, &[0.3, -1.0, 2.0, 0.5, 1.0, 1.0], &[0.1, 0.2, -0.3, 0.4, 0.5, -0.6]).unwrap();
        let samples = [
            SignedEdge::new(0, 1, Sign::Positive),
            SignedEdge::new(1, 2, Sign::Negative),
            SignedEdge::new(2, 0, Sign::Positive),
        ];
        let w = [0.2, 0.5, 0.3];
        let batch = SignBatch::new(&p, samples.iter().copied());
        let total = batch.gradient(&w);
        let mut summed = p.zeros_like();
        for (i, wi) in w.iter().enumerate() {
            for (s, g) in summed.iter_mut().zip(batch.per_sample_grad(i).to_dense(&p)) {
                *s += wi * g;
            }
        }
        for (a, b) in total.iter().zip(&summed) {
            assert!((a - b).abs() < 1e-15);
        }
        let probe: Vec<f64> = (0..p.len()).map(|i| i as f64 * 0.1 - 0.4).collect();
        for i in 0..3 {
            let dense = batch.per_sample_grad(i).to_dense(&p);
            assert!((batch.per_sample_dot(i, &probe) - dot(&dense, &probe)).abs() < 1e-12);
        }
    }

    #[test]
    fn task_loss_examples() {
        // orthogonal embeddings: every term is log 2
        let p = ModelParams::from_parts(3, 2, EdgeRepr::Concat, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0], &[0.0; 4]).unwrap();
        let l = task_loss(&p, &[SignedEdge::new(0, 1, Sign::Positive), SignedEdge::new(1, 2, Sign::Negative)]);
        assert!((l.value - core::f64::consts::LN_2).abs() < 1e-15);

        let p = ModelParams::from_parts(3, 1, EdgeRepr::Concat, &[1.0, 1.0, 1.0], &[0.0; 2]).unwrap();
        let l = task_loss(&p, &[SignedEdge::new(0, 1, Sign::Positive), SignedEdge::new(1, 2, Sign::Negative)]);
        let expected = (softplus(-1.0) + softplus(1.0)) / 2.0;
        assert!((l.value - expected).abs() < 1e-15);
        assert!((l.value - 0.813_261_687_518_222_7).abs() < 1e-12);

        let far = ModelParams::from_parts(2, 1, EdgeRepr::Concat, &[100.0, 100.0], &[0.0; 2]).unwrap();
        assert!(task_loss(&far, &[SignedEdge::new(0, 1, Sign::Positive)]).value < 1e-300);
        assert_eq!(task_loss(&far, &[]).value, 0.0);
    }

    #[test]
    fn sign_loss_is_linear_in_weights() {
        let p = toy();
        let samples = [SignedEdge::new(0, 1, Sign::Positive), SignedEdge::new(1, 0, Sign::Negative)];
        let a = sign_loss(&p, &samples, &[0.3, 0.1]).unwrap();
        let b = sign_loss(&p, &samples, &[0.6, 0.2]).unwrap();
        assert!((2.0 * a.value - b.value).abs() < 1e-14);
    }
}
