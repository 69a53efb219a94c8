//! Finite-difference checks of every analytic gradient.

use msb_core::model::{sign_loss, task_loss, EdgeRepr, ModelParams};
use msb_core::reweight::{clean_loss, lookahead_params, reweight_with_eps, ReweightConfig};
use msb_core::{Edge, Sign, SignedEdge};
use proptest::prelude::*;

const H: f64 = 1e-5;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale < 1e-300 {
        diff
    } else {
        diff / scale
    }
}

fn central_diff(params: &ModelParams, f: impl Fn(&ModelParams) -> f64) -> Vec<f64> {
    (0..params.len())
        .map(|i| {
            let mut plus = params.clone();
            plus.values_mut()[i] += H;
            let mut minus = params.clone();
            minus.values_mut()[i] -= H;
            (f(&plus) - f(&minus)) / (2.0 * H)
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Instance {
    params: ModelParams,
    samples: Vec<SignedEdge>,
    weights: Vec<f64>,
}

fn instance() -> impl Strategy<Value = Instance> {
    (5usize..=20, 1usize..=4, any::<bool>()).prop_flat_map(|(n, d, hadamard)| {
        let repr = if hadamard { EdgeRepr::ConcatHadamard } else { EdgeRepr::Concat };
        let len = n * d + repr.scorer_len(d);
        (
            proptest::collection::vec(-1.5f64..1.5, len),
            proptest::collection::vec((0..n as u32, 1..n as u32, any::<bool>(), 0.0f64..=1.0), 1..25),
        )
            .prop_map(move |(vals, raw)| {
                let params = ModelParams::from_parts(n, d, repr, &vals[..n * d], &vals[n * d..]).unwrap();
                let samples = raw
                    .iter()
                    .map(|&(u, off, pos, _)| SignedEdge {
                        edge: Edge::new(u, (u + off) % n as u32),
                        sign: if pos { Sign::Positive } else { Sign::Negative },
                    })
                    .collect();
                let weights = raw.iter().map(|r| r.3).collect();
                Instance { params, samples, weights }
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sign_loss_gradient_matches_finite_differences(inst in instance()) {
        let analytic = sign_loss(&inst.params, &inst.samples, &inst.weights).unwrap();
        let fd = central_diff(&inst.params, |p| sign_loss(p, &inst.samples, &inst.weights).unwrap().value);
        let err = rel_err(&analytic.grad, &fd);
        prop_assert!(err <= 1e-5, "relative error {err}");
        let weighted: f64 = analytic.per_sample.iter().zip(&inst.weights).map(|(l, w)| l * w).sum();
        prop_assert!((weighted - analytic.value).abs() <= 1e-12 * analytic.value.abs().max(1.0));
    }

    #[test]
    fn task_loss_gradient_matches_finite_differences(inst in instance()) {
        let analytic = task_loss(&inst.params, &inst.samples);
        let fd = central_diff(&inst.params, |p| task_loss(p, &inst.samples).value);
        let err = rel_err(&analytic.grad, &fd);
        prop_assert!(err <= 1e-5, "relative error {err}");
    }

    #[test]
    fn meta_gradient_matches_finite_differences(
        inst in instance(),
        alpha in 0.01f64..0.5,
        eps_seed in proptest::collection::vec(0.0f64..1.0, 25),
        split in 1usize..25,
    ) {
        let k = split.min(inst.samples.len());
        let (clean, sb) = if k == inst.samples.len() {
            (&inst.samples[..], &inst.samples[..])
        } else {
            inst.samples.split_at(k)
        };
        let eps: Vec<f64> = eps_seed[..sb.len()].to_vec();
        let cfg = ReweightConfig { alpha, ..Default::default() };
        let out = reweight_with_eps(&inst.params, clean, sb, eps.clone(), &cfg).unwrap();
        let f = |e: &[f64]| clean_loss(&lookahead_params(&inst.params, sb, e, alpha).unwrap(), clean).unwrap().value;
        let fd: Vec<f64> = (0..eps.len())
            .map(|i| {
                let mut plus = eps.clone();
                plus[i] += H;
                let mut minus = eps.clone();
                minus[i] -= H;
                (f(&plus) - f(&minus)) / (2.0 * H)
            })
            .collect();
        let err = rel_err(&out.grad_eps, &fd);
        prop_assert!(err <= 1e-6, "relative error {err}");
        let total: f64 = out.weights.iter().sum();
        prop_assert!(out.weights.iter().all(|&w| w >= 0.0));
        prop_assert!(total == 0.0 || (total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn clamped_loss_stays_bounded() {
    for a in [1e4, -1e4, 750.0, -750.0] {
        let p = ModelParams::from_parts(2, 1, EdgeRepr::Concat, &[a, 1.0], &[1.0, 0.0]).unwrap();
        let s = [SignedEdge::new(0, 1, Sign::Positive), SignedEdge::new(0, 1, Sign::Negative)];
        let l = sign_loss(&p, &s, &[1.0, 1.0]).unwrap();
        assert!(l.per_sample.iter().all(|&x| x <= 200.0));
        assert!(l.grad.iter().all(|g| g.is_finite() && g.abs() <= 1.0 + a.abs()));
    }
}
