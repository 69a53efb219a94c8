//! Reweighted training loop, supervised and pseudo-labeling baselines.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::balance::{build_sb_set, meso_sb_label, micro_sb_label, EdgeSample, SbMode};
use crate::community::Partition;
use crate::graph::{Edge, Sign, SignedDigraph, SignedEdge};
use crate::math::{round, sqrt};
use crate::metrics::{Confusion, MacroF1};
use crate::model::{
    score_edge, sign_loss, spectral_features, task_loss, EdgeRepr, InitMode, ModelParams, SpectralConfig,
};
use crate::optim::{adam_step, AdamConfig, AdamState};
use crate::reweight::{reweight, weighted_sb_loss, ReweightConfig, ReweightOutput};
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::split::SplitDataset;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Weighting {
    /// Per-batch meta-learned weights.
    #[default]
    Learned,
    /// Every pseudo-labeled sample in a batch gets `1/|B_SB|`.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub eval_interval: usize,
    /// Evaluations without improvement before stopping.
    pub patience: usize,
    pub adam: AdamConfig,
    pub dim: usize,
    pub repr: EdgeRepr,
    pub init: InitMode,
    /// `|B_clean| = round(clean_fraction · |E^L|)`.
    pub clean_fraction: f64,
    /// `|B_SB| = round(sb_ratio · |B_clean|)`.
    pub sb_ratio: f64,
    pub sb_mode: SbMode,
    pub weighting: Weighting,
    /// `seed` is ignored; a per-epoch seed is derived from [`TrainConfig::seed`].
    pub reweight: ReweightConfig,
    pub use_task_loss: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 1000,
            eval_interval: 25,
            patience: 10,
            adam: AdamConfig::default(),
            dim: 64,
            repr: EdgeRepr::default(),
            init: InitMode::default(),
            clean_fraction: 0.5,
            sb_ratio: 6.0,
            sb_mode: SbMode::Both,
            weighting: Weighting::Learned,
            reweight: ReweightConfig::default(),
            use_task_loss: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 || self.eval_interval == 0 || self.patience == 0 || self.dim == 0 {
            return Err(Error::InvalidParameter("epochs, eval interval, patience and dim must be positive"));
        }
        if !(self.clean_fraction > 0.0 && self.clean_fraction <= 1.0) {
            return Err(Error::InvalidFraction { name: "clean_fraction", value: self.clean_fraction });
        }
        if !(self.sb_ratio >= 1.0) {
            return Err(Error::InvalidParameter("sb_ratio must be at least 1"));
        }
        if !(self.adam.lr > 0.0) || self.adam.weight_decay < 0.0 {
            return Err(Error::InvalidParameter("learning rate must be positive and weight decay nonnegative"));
        }
        Ok(())
    }
}

/// Loss components of one optimizer step; `total = task + clean + sb`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepLoss {
    pub task: f64,
    pub clean: f64,
    pub sb: f64,
    pub total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalRecord {
    pub epoch: usize,
    /// Step losses averaged over the epochs since the previous evaluation.
    pub mean_loss: StepLoss,
    pub val_macro_f1: f64,
    pub val_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    pub best: ModelParams,
    pub best_epoch: usize,
    pub best_val_macro_f1: f64,
    pub history: Vec<EvalRecord>,
    pub steps: Vec<StepLoss>,
    pub stop_epoch: usize,
    pub num_sb: usize,
    /// Set when training fell back to the supervised objective.
    pub sb_empty: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evaluation {
    pub accuracy: f64,
    pub macro_f1: MacroF1,
    pub confusion: Confusion,
}

/// Sign predicted for an edge: positive iff `s ≥ 0.5`.
pub fn predict(params: &ModelParams, edge: Edge) -> Sign {
    if score_edge(params, edge.src, edge.dst) >= 0.5 {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

pub fn evaluate(params: &ModelParams, edges: &[SignedEdge]) -> Result<Evaluation> {
    let preds: Vec<Sign> = edges.iter().map(|e| predict(params, e.edge)).collect();
    let labels: Vec<Sign> = edges.iter().map(|e| e.sign).collect();
    let confusion = Confusion::from_pairs(&preds, &labels)?;
    Ok(Evaluation { accuracy: confusion.accuracy(), macro_f1: confusion.macro_f1(), confusion })
}

/// Hooks into the loop, e.g. for weight-trajectory dumps.
pub trait TrainObserver {
    fn on_reweight(&mut self, _epoch: usize, _batch: &[EdgeSample], _out: &ReweightOutput) {}
    fn on_eval(&mut self, _record: &EvalRecord) {}
}

impl TrainObserver for () {}

/// Pseudo-labels of the unlabeled training edges at both scales, filtered by `mode`.
pub fn sb_samples(split: &SplitDataset, partition: &Partition, mode: SbMode) -> Vec<EdgeSample> {
    let micro = match mode {
        SbMode::MesoOnly => Vec::new(),
        _ => micro_sb_label(&split.training_graph()),
    };
    let meso = match mode {
        SbMode::MicroOnly => Vec::new(),
        _ => meso_sb_label(&split.train_unlabeled, partition),
    };
    build_sb_set(&micro, &meso, mode)
}

/// Initial parameters: spectral features of `structure` rescaled to an
/// entry RMS of 0.1, or Gaussian rows. Columns beyond the node count are Gaussian.
pub fn init_params(structure: &SignedDigraph, cfg: &TrainConfig, seed: u64) -> Result<ModelParams> {
    let n = structure.num_nodes();
    let d = cfg.dim;
    let mut rng = stream_rng(seed, Stream::Init);
    let features = match cfg.init {
        InitMode::Gaussian => None,
        InitMode::Spectral => {
            let k = d.min(n);
            let mut z = vec![0.0; n * d];
            if k > 0 {
                let f = spectral_features(structure, SpectralConfig::new(k, seed))?;
                let scale = 0.1 * sqrt(n as f64);
                for u in 0..n {
                    for j in 0..k {
                        z[u * d + j] = scale * f.matrix[u * k + j];
                    }
                }
            }
            let normal = Normal::new(0.0, 0.1).expect("valid normal");
            for u in 0..n {
                for j in k..d {
                    z[u * d + j] = normal.sample(&mut rng);
                }
            }
            Some(z)
        }
    };
    ModelParams::init(n, d, cfg.repr, features.as_deref(), &mut rng)
}

fn sample_indices<R: Rng>(rng: &mut R, len: usize, amount: usize) -> Vec<usize> {
    if amount <= len {
        let mut v = index::sample(rng, len, amount).into_vec();
        v.sort_unstable();
        v
    } else {
        (0..amount).map(|_| rng.random_range(0..len)).collect()
    }
}

/// Shared loop. `labeled` is the (possibly noisy) clean set, `sb` the
/// pseudo-labeled pool (may be empty), `val` the model-selection set.
fn run<O: TrainObserver>(
    structure: &SignedDigraph,
    labeled: &[SignedEdge],
    sb: &[EdgeSample],
    val: &[SignedEdge],
    cfg: &TrainConfig,
    init_seed: u64,
    observer: &mut O,
) -> Result<TrainReport> {
    cfg.validate()?;
    if labeled.is_empty() {
        return Err(Error::Empty("labeled training edges"));
    }
    if val.is_empty() {
        return Err(Error::Empty("validation edges"));
    }
    let mut params = init_params(structure, cfg, init_seed)?;
    let mut adam = AdamState::new(params.len());
    let clean_size = (round(cfg.clean_fraction * labeled.len() as f64) as usize).clamp(1, labeled.len());
    let sb_size = round(cfg.sb_ratio * clean_size as f64) as usize;

    let mut best = params.clone();
    let mut best_epoch = 0;
    let mut best_f1 = f64::NEG_INFINITY;
    let mut since_best = 0;
    let mut history = Vec::new();
    let mut steps = Vec::with_capacity(cfg.max_epochs);
    let mut window = StepLoss::default();
    let mut window_len = 0usize;
    let mut stop_epoch = cfg.max_epochs;

    for epoch in 1..=cfg.max_epochs {
        let epoch_seed = derive_seed(cfg.seed, epoch as u64);
        let mut rng = stream_rng(epoch_seed, Stream::CleanBatch);
        let clean: Vec<SignedEdge> =
            sample_indices(&mut rng, labeled.len(), clean_size).into_iter().map(|i| labeled[i]).collect();

        let mut grad = params.zeros_like();
        let mut loss = StepLoss::default();
        if cfg.use_task_loss {
            let t = task_loss(&params, labeled);
            loss.task = t.value;
            grad.iter_mut().zip(&t.grad).for_each(|(g, x)| *g += x);
        }
        let c = sign_loss(&params, &clean, &vec![1.0 / clean.len() as f64; clean.len()])?;
        loss.clean = c.value;
        grad.iter_mut().zip(&c.grad).for_each(|(g, x)| *g += x);

        if !sb.is_empty() && sb_size > 0 {
            let mut rng = stream_rng(epoch_seed, Stream::SbBatch);
            let batch: Vec<EdgeSample> = sample_indices(&mut rng, sb.len(), sb_size).into_iter().map(|i| sb[i]).collect();
            let edges: Vec<SignedEdge> = batch.iter().map(EdgeSample::signed_edge).collect();
            let weights = match cfg.weighting {
                Weighting::Constant => vec![1.0 / edges.len() as f64; edges.len()],
                Weighting::Learned => {
                    let rcfg = ReweightConfig { seed: epoch_seed, ..cfg.reweight };
                    let out = reweight(&params, &clean, &edges, &rcfg)?;
                    observer.on_reweight(epoch, &batch, &out);
                    out.weights
                }
            };
            let s = weighted_sb_loss(&params, &edges, &weights)?;
            loss.sb = s.value;
            grad.iter_mut().zip(&s.grad).for_each(|(g, x)| *g += x);
        }
        loss.total = loss.task + loss.clean + loss.sb;
        if !loss.total.is_finite() || !grad.iter().all(|g| g.is_finite()) {
            return Err(Error::NonFinite("training loss"));
        }
        steps.push(loss);
        window.task += loss.task;
        window.clean += loss.clean;
        window.sb += loss.sb;
        window.total += loss.total;
        window_len += 1;
        adam_step(params.values_mut(), &grad, &mut adam, &cfg.adam)?;

        if epoch % cfg.eval_interval == 0 || epoch == cfg.max_epochs {
            let ev = evaluate(&params, val)?;
            let k = window_len as f64;
            let record = EvalRecord {
                epoch,
                mean_loss: StepLoss {
                    task: window.task / k,
                    clean: window.clean / k,
                    sb: window.sb / k,
                    total: window.total / k,
                },
                val_macro_f1: ev.macro_f1.value,
                val_accuracy: ev.accuracy,
            };
            window = StepLoss::default();
            window_len = 0;
            observer.on_eval(&record);
            history.push(record);
            if ev.macro_f1.value > best_f1 {
                best_f1 = ev.macro_f1.value;
                best = params.clone();
                best_epoch = epoch;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= cfg.patience {
                    stop_epoch = epoch;
                    break;
                }
            }
        }
    }
    Ok(TrainReport {
        best,
        best_epoch,
        best_val_macro_f1: best_f1,
        history,
        steps,
        stop_epoch,
        num_sb: sb.len(),
        sb_empty: sb.is_empty(),
    })
}

/// Reweighted training with pseudo-labels derived from `partition` and the
/// training graph's triads.
pub fn train_l2rw(split: &SplitDataset, partition: &Partition, cfg: &TrainConfig) -> Result<TrainReport> {
    let sb = sb_samples(split, partition, cfg.sb_mode);
    train_l2rw_with(split, &sb, cfg, &mut ())
}

/// Reweighted training on an explicit pseudo-labeled pool. An empty pool
/// gives exactly the supervised run.
pub fn train_l2rw_with<O: TrainObserver>(
    split: &SplitDataset,
    sb: &[EdgeSample],
    cfg: &TrainConfig,
    observer: &mut O,
) -> Result<TrainReport> {
    if split.train_unlabeled.is_empty() {
        return Err(Error::Empty("unlabeled training edges"));
    }
    run(&split.training_graph(), &split.train_labeled, sb, &split.val, cfg, cfg.seed, observer)
}

pub fn train_supervised(split: &SplitDataset, cfg: &TrainConfig) -> Result<TrainReport> {
    run(&split.training_graph(), &split.train_labeled, &[], &split.val, cfg, cfg.seed, &mut ())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PlStrategy {
    All,
    Random,
    Uncertainty,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlConfig {
    pub strategy: PlStrategy,
    pub k: usize,
    pub rounds: usize,
}

impl PlConfig {
    pub fn new(strategy: PlStrategy) -> Self {
        Self { strategy, k: 50, rounds: 10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlReport {
    /// Best round by validation Macro-F1.
    pub report: TrainReport,
    pub best_round: usize,
    /// `(round, pool size, best val Macro-F1)`; round 0 is the supervised start.
    pub rounds: Vec<(usize, usize, f64)>,
}

/// Indices of the `k/2` lowest and `k − k/2` highest scores (ties by index).
pub fn uncertainty_select(scores: &[f64], k: usize) -> Vec<usize> {
    if k >= scores.len() {
        return (0..scores.len()).collect();
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let low = k / 2;
    let high = k - low;
    let mut out: Vec<usize> = order[..low].iter().chain(&order[order.len() - high..]).copied().collect();
    out.sort_unstable();
    out
}

/// Iterative self-training: pick unlabeled edges, label them with the current
/// best model, add them to the labeled pool and retrain from fresh parameters.
pub fn train_pseudo_label(split: &SplitDataset, cfg: &TrainConfig, pl: &PlConfig) -> Result<PlReport> {
    let structure = split.training_graph();
    let mut pool: Vec<SignedEdge> = split.train_labeled.clone();
    let mut remaining: Vec<Edge> = split.train_unlabeled.clone();
    let base = run(&structure, &pool, &[], &split.val, cfg, cfg.seed, &mut ())?;
    let mut rounds = vec![(0, pool.len(), base.best_val_macro_f1)];
    let mut current = base.best.clone();
    let mut best = base;
    let mut best_round = 0;
    let total_rounds = if pl.strategy == PlStrategy::All { 1 } else { pl.rounds };
    for r in 1..=total_rounds {
        if remaining.is_empty() {
            break;
        }
        let round_seed = derive_seed(cfg.seed, 1_000_000 + r as u64);
        let chosen: Vec<usize> = match pl.strategy {
            PlStrategy::All => (0..remaining.len()).collect(),
            PlStrategy::Random => {
                let mut rng = stream_rng(round_seed, Stream::PseudoLabel);
                sample_indices(&mut rng, remaining.len(), pl.k.min(remaining.len()))
            }
            PlStrategy::Uncertainty => {
                let scores: Vec<f64> = remaining.iter().map(|e| score_edge(&current, e.src, e.dst)).collect();
                uncertainty_select(&scores, pl.k)
            }
        };
        let mut keep = vec![true; remaining.len()];
        for &i in &chosen {
            keep[i] = false;
            let e = remaining[i];
            pool.push(SignedEdge { edge: e, sign: predict(&current, e) });
        }
        let mut it = keep.iter();
        remaining.retain(|_| *it.next().expect("same length"));
        let round_cfg = TrainConfig { seed: round_seed, ..*cfg };
        let report = run(&structure, &pool, &[], &split.val, &round_cfg, round_seed, &mut ())?;
        rounds.push((r, pool.len(), report.best_val_macro_f1));
        current = report.best.clone();
        if report.best_val_macro_f1 > best.best_val_macro_f1 {
            best = report;
            best_round = r;
        }
    }
    Ok(PlReport { report: best, best_round, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::{louvain, unsigned_projection, LouvainConfig};
    use crate::split::{inject_noise, split_dataset, NoiseSpec, SplitFractions};
    use crate::synth::{planted_signed_graph, SyntheticConfig};

    fn small_split(seed: u64) -> SplitDataset {
        let g = planted_signed_graph(&SyntheticConfig { num_nodes: 60, out_degree: 6, seed, ..Default::default() })
            .unwrap()
            .graph;
        split_dataset(&g, seed, SplitFractions::default()).unwrap()
    }

    fn quick() -> TrainConfig {
        TrainConfig { max_epochs: 60, eval_interval: 10, dim: 8, adam: AdamConfig { lr: 0.01, ..Default::default() }, ..Default::default() }
    }

    #[test]
    fn uncertainty_picks_extremes() {
        assert_eq!(uncertainty_select(&[0.01, 0.4, 0.6, 0.99], 2), vec![0, 3]);
        assert_eq!(uncertainty_select(&[0.5, 0.2], 5), vec![0, 1]);
    }

    #[test]
    fn supervised_is_deterministic() {
        let split = small_split(1);
        let a = train_supervised(&split, &quick()).unwrap();
        let b = train_supervised(&split, &quick()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_pool_reduces_to_supervised() {
        let split = small_split(2);
        let sup = train_supervised(&split, &quick()).unwrap();
        let l2rw = train_l2rw_with(&split, &[], &quick(), &mut ()).unwrap();
        assert_eq!(sup.steps, l2rw.steps);
        assert_eq!(sup.best, l2rw.best);
        assert!(l2rw.sb_empty);
    }

    #[test]
    fn history_and_decomposition_invariants() {
        let split = small_split(3);
        let noisy = inject_noise(&split, NoiseSpec { flip_fraction: 0.2, seed: 3 }).unwrap();
        let part = louvain(&unsigned_projection(&noisy.training_graph()), LouvainConfig::default()).partition;
        let r = train_l2rw(&noisy, &part, &quick()).unwrap();
        assert!(r.num_sb > 0);
        let max = r.history.iter().map(|h| h.val_macro_f1).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best_val_macro_f1, max);
        for s in &r.steps {
            assert_eq!(s.total, s.task + s.clean + s.sb);
        }
        assert!(evaluate(&r.best, &noisy.val).unwrap().macro_f1.value == r.best_val_macro_f1);
    }

    #[test]
    fn pseudo_label_all_runs_one_round() {
        let split = small_split(4);
        let cfg = quick();
        let rep = train_pseudo_label(&split, &cfg, &PlConfig::new(PlStrategy::All)).unwrap();
        assert_eq!(rep.rounds.len(), 2);
        assert_eq!(rep.rounds[1].1, split.train_labeled.len() + split.train_unlabeled.len());
        let a = train_pseudo_label(&split, &cfg, &PlConfig { rounds: 2, ..PlConfig::new(PlStrategy::Random) }).unwrap();
        let b = train_pseudo_label(&split, &cfg, &PlConfig { rounds: 2, ..PlConfig::new(PlStrategy::Random) }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rounds[1].1, split.train_labeled.len() + 50);
    }

    #[test]
    fn separable_toy_reaches_full_training_accuracy() {
        // two bidirected 5-cliques, positive inside, negative between a few pairs
        let mut edges = Vec::new();
        for c in 0..2u32 {
            for i in 0..5u32 {
                for j in 0..5u32 {
                    if i != j {
                        edges.push(SignedEdge::new(5 * c + i, 5 * c + j, Sign::Positive));
                    }
                }
            }
        }
        for i in 0..5u32 {
            edges.push(SignedEdge::new(i, 5 + i, Sign::Negative));
            edges.push(SignedEdge::new(5 + i, (i + 1) % 5, Sign::Negative));
        }
        let cfg = TrainConfig {
            max_epochs: 600,
            eval_interval: 50,
            patience: 100,
            dim: 4,
            adam: AdamConfig { lr: 0.05, weight_decay: 0.0, ..Default::default() },
            ..Default::default()
        };
        let g = SignedDigraph::from_parts(10, &edges, &[]).unwrap();
        let r = run(&g, &edges, &[], &edges, &cfg, 0, &mut ()).unwrap();
        assert_eq!(evaluate(&r.best, &edges).unwrap().accuracy, 1.0);
    }
}
