//! Experiment protocol: for every (noise, unlabeled fraction, seed) build one
//! split and partition, run every method on it, evaluate on the test edges
//! and aggregate with paired t-tests.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use msb_core::balance::SbMode;
use msb_core::community::{louvain, unsigned_projection, LouvainConfig, Partition};
use msb_core::math::{mean, sample_std};
use msb_core::metrics::Confusion;
use msb_core::reweight::EpsInit;
use msb_core::split::{inject_noise, split_dataset, NoiseSpec, SplitDataset, SplitFractions};
use msb_core::stats::{paired_t_test, significance_stars};
use msb_core::synth::{planted_signed_graph, SyntheticConfig};
use msb_core::train::{
    evaluate, train_l2rw, train_pseudo_label, train_supervised, EvalRecord, PlConfig, PlStrategy, TrainConfig,
    TrainReport, Weighting,
};
use msb_core::SignedDigraph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checkpoint::Checkpoint;
use crate::error::{MsbError, Result};
use crate::io::{load_graph, write_json, ValueFormat};

/// Environment variable naming the root directory for run outputs.
pub const RUN_DIR_ENV: &str = "MSB_RUN_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Supervised,
    L2rw,
    L2rwConstant,
    L2rwMicro,
    L2rwMeso,
    PlAll,
    PlRandom,
    PlUncertainty,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Supervised,
        Method::L2rw,
        Method::L2rwConstant,
        Method::L2rwMicro,
        Method::L2rwMeso,
        Method::PlAll,
        Method::PlRandom,
        Method::PlUncertainty,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::Supervised => "supervised",
            Method::L2rw => "l2rw",
            Method::L2rwConstant => "l2rw_constant",
            Method::L2rwMicro => "l2rw_micro",
            Method::L2rwMeso => "l2rw_meso",
            Method::PlAll => "pl_all",
            Method::PlRandom => "pl_random",
            Method::PlUncertainty => "pl_uncertainty",
        }
    }

    /// Applies the method's variant to a base configuration.
    pub fn configure(self, base: &TrainConfig) -> TrainConfig {
        let mut cfg = *base;
        match self {
            Method::L2rwConstant => cfg.weighting = Weighting::Constant,
            Method::L2rwMicro => cfg.sb_mode = SbMode::MicroOnly,
            Method::L2rwMeso => cfg.sb_mode = SbMode::MesoOnly,
            _ => {}
        }
        cfg
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = MsbError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| MsbError::Usage(format!("unknown method `{s}`")))
    }
}

/// Training knobs; unset fields keep the library defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub eval_interval: Option<usize>,
    pub patience: Option<usize>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    pub dim: Option<usize>,
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
    pub eps_init: Option<String>,
    pub clean_fraction: Option<f64>,
    pub sb_ratio: Option<f64>,
    pub task_loss: Option<bool>,
}

impl TrainSection {
    pub fn apply(&self, seed: u64) -> Result<TrainConfig> {
        let mut c = TrainConfig { seed, ..Default::default() };
        if let Some(v) = self.epochs {
            c.max_epochs = v;
        }
        if let Some(v) = self.eval_interval {
            c.eval_interval = v;
        }
        if let Some(v) = self.patience {
            c.patience = v;
        }
        if let Some(v) = self.lr {
            c.adam.lr = v;
        }
        if let Some(v) = self.weight_decay {
            c.adam.weight_decay = v;
        }
        if let Some(v) = self.dim {
            c.dim = v;
        }
        if let Some(v) = self.alpha {
            c.reweight.alpha = v;
        }
        if let Some(v) = self.eta {
            c.reweight.eta = v;
        }
        if let Some(v) = &self.eps_init {
            c.reweight.eps_init = parse_eps_init(v)?;
        }
        if let Some(v) = self.clean_fraction {
            c.clean_fraction = v;
        }
        if let Some(v) = self.sb_ratio {
            c.sb_ratio = v;
        }
        if let Some(v) = self.task_loss {
            c.use_task_loss = v;
        }
        c.validate().map_err(|e| MsbError::Usage(e.to_string()))?;
        Ok(c)
    }
}

pub fn parse_eps_init(s: &str) -> Result<EpsInit> {
    match s {
        "zero" => Ok(EpsInit::Zero),
        "uniform" => Ok(EpsInit::Uniform),
        other => Err(MsbError::Usage(format!("eps_init must be `zero` or `uniform`, got `{other}`"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSection {
    pub nodes: usize,
    pub communities: usize,
    pub out_degree: usize,
    pub intra_prob: f64,
    pub violation: f64,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        let b = crate::bench::synthetic_config(0);
        Self {
            nodes: b.num_nodes,
            communities: b.communities,
            out_degree: b.out_degree,
            intra_prob: b.intra_prob,
            violation: b.violation,
        }
    }
}

impl SyntheticSection {
    pub fn config(&self, seed: u64) -> SyntheticConfig {
        SyntheticConfig {
            num_nodes: self.nodes,
            communities: self.communities,
            out_degree: self.out_degree,
            intra_prob: self.intra_prob,
            violation: self.violation,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlSection {
    pub k: usize,
    pub rounds: usize,
}

impl Default for PlSection {
    fn default() -> Self {
        Self { k: 50, rounds: 10 }
    }
}

/// Declarative experiment description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `"synthetic"` or a path to an edge list (`.csv` raw, otherwise canonical).
    pub dataset: String,
    #[serde(default = "default_format")]
    pub format: ValueFormat,
    pub methods: Vec<String>,
    #[serde(default = "default_noise")]
    pub noise: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default = "default_fractions")]
    pub unlabeled_fractions: Vec<f64>,
    /// `"best"` compares each row against the best method by mean Macro-F1
    /// (the best itself against the runner-up); a method id fixes the reference.
    #[serde(default = "default_compare")]
    pub compare: String,
    #[serde(default)]
    pub save_checkpoints: bool,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub synthetic: SyntheticSection,
    #[serde(default)]
    pub pl: PlSection,
}

fn default_format() -> ValueFormat {
    ValueFormat::Rating
}
fn default_noise() -> Vec<f64> {
    vec![0.0, 0.1, 0.2]
}
fn default_seeds() -> u64 {
    20
}
fn default_fractions() -> Vec<f64> {
    vec![1.0]
}
fn default_compare() -> String {
    "best".into()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| MsbError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(MsbError::io(path))?;
        Self::from_toml(&text)
    }

    /// Checks everything that can fail before any run starts.
    pub fn validate(&self) -> Result<()> {
        self.parsed_methods()?;
        if self.seeds == 0 {
            return Err(MsbError::Usage("seeds must be positive".into()));
        }
        if self.noise.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(MsbError::Usage("noise levels must lie in [0, 1]".into()));
        }
        if self.unlabeled_fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(MsbError::Usage("unlabeled fractions must lie in (0, 1]".into()));
        }
        if self.compare != "best" {
            let reference: Method = self.compare.parse()?;
            if !self.parsed_methods()?.contains(&reference) {
                return Err(MsbError::Usage(format!("compare method `{reference}` is not in the method list")));
            }
        }
        self.train.apply(0)?;
        Ok(())
    }

    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            return Err(MsbError::Usage("no methods given".into()));
        }
        self.methods.iter().map(|m| m.parse()).collect()
    }

    /// SHA-256 of the canonical JSON form; names the run directory.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// Everything the methods of one (noise, fraction, seed) cell share.
pub struct RunContext {
    pub noise: f64,
    pub unlabeled_fraction: f64,
    pub seed: u64,
    pub split: SplitDataset,
    pub partition: Partition,
}

/// Split, perturb, subsample the unlabeled set and detect communities.
pub fn prepare_context(g: &SignedDigraph, noise: f64, unlabeled_fraction: f64, seed: u64) -> Result<RunContext> {
    let split = split_dataset(g, seed, SplitFractions::default())?;
    let noisy = inject_noise(&split, NoiseSpec { flip_fraction: noise, seed })?;
    let split = if unlabeled_fraction < 1.0 { noisy.with_unlabeled_fraction(unlabeled_fraction, seed)? } else { noisy };
    let partition =
        louvain(&unsigned_projection(&split.training_graph()), LouvainConfig { seed, ..Default::default() }).partition;
    Ok(RunContext { noise, unlabeled_fraction, seed, split, partition })
}

pub fn run_method(method: Method, ctx: &RunContext, base: &TrainConfig, pl: &PlSection) -> Result<TrainReport> {
    let cfg = method.configure(base);
    let pl_cfg = |s| PlConfig { strategy: s, k: pl.k, rounds: pl.rounds };
    Ok(match method {
        Method::Supervised => train_supervised(&ctx.split, &cfg)?,
        Method::L2rw | Method::L2rwConstant | Method::L2rwMicro | Method::L2rwMeso => {
            train_l2rw(&ctx.split, &ctx.partition, &cfg)?
        }
        Method::PlAll => train_pseudo_label(&ctx.split, &cfg, &pl_cfg(PlStrategy::All))?.report,
        Method::PlRandom => train_pseudo_label(&ctx.split, &cfg, &pl_cfg(PlStrategy::Random))?.report,
        Method::PlUncertainty => train_pseudo_label(&ctx.split, &cfg, &pl_cfg(PlStrategy::Uncertainty))?.report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub noise: f64,
    pub unlabeled_fraction: f64,
    pub seed: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub degenerate: bool,
    pub confusion: Confusion,
    pub best_epoch: usize,
    pub stop_epoch: usize,
    pub num_sb: usize,
    pub history: Vec<EvalRecord>,
    pub wall_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub method: Method,
    pub noise: f64,
    pub unlabeled_fraction: f64,
    pub n: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
    pub reference: Option<Method>,
    pub t: Option<f64>,
    pub p_value: Option<f64>,
    pub stars: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub dataset: String,
    pub digest: String,
    pub runs: Vec<RunRecord>,
    pub summary: Vec<GroupSummary>,
}

impl ExperimentResult {
    pub fn runs_of(&self, method: Method, noise: f64, fraction: f64) -> Vec<&RunRecord> {
        let mut v: Vec<_> = self
            .runs
            .iter()
            .filter(|r| r.method == method && r.noise == noise && r.unlabeled_fraction == fraction)
            .collect();
        v.sort_by_key(|r| r.seed);
        v
    }

    /// Per-seed Macro-F1 of `method`, ordered by seed.
    pub fn macro_f1s(&self, method: Method, noise: f64, fraction: f64) -> Vec<f64> {
        self.runs_of(method, noise, fraction).iter().map(|r| r.macro_f1).collect()
    }

    pub fn group(&self, method: Method, noise: f64, fraction: f64) -> Option<&GroupSummary> {
        self.summary.iter().find(|g| g.method == method && g.noise == noise && g.unlabeled_fraction == fraction)
    }

    /// Per-seed rows; wall time is left out so reruns are byte-identical.
    pub fn per_seed_csv(&self) -> String {
        let mut out = String::from(
            "method,noise,unlabeled_fraction,seed,accuracy,macro_f1,degenerate,tp,fn,fp,tn,best_epoch,stop_epoch,num_sb\n",
        );
        for r in &self.runs {
            let c = r.confusion.counts;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.method,
                r.noise,
                r.unlabeled_fraction,
                r.seed,
                r.accuracy,
                r.macro_f1,
                r.degenerate,
                c[0][0],
                c[0][1],
                c[1][0],
                c[1][1],
                r.best_epoch,
                r.stop_epoch,
                r.num_sb
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "method,noise,unlabeled_fraction,n,accuracy_mean,accuracy_std,macro_f1_mean,macro_f1_std,reference,t,p_value,stars\n",
        );
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        for g in &self.summary {
            out.push_str(&format!(
                "{},{},{},{},{:.4},{:.4},{:.4},{:.4},{},{},{},{}\n",
                g.method,
                g.noise,
                g.unlabeled_fraction,
                g.n,
                g.accuracy_mean,
                g.accuracy_std,
                g.macro_f1_mean,
                g.macro_f1_std,
                g.reference.map_or(String::new(), |m| m.id().to_owned()),
                opt(g.t),
                opt(g.p_value),
                g.stars
            ));
        }
        out
    }
}

fn summarize(runs: &[RunRecord], methods: &[Method], compare: &str) -> Result<Vec<GroupSummary>> {
    let mut cells: Vec<(f64, f64)> = Vec::new();
    for r in runs {
        if !cells.contains(&(r.noise, r.unlabeled_fraction)) {
            cells.push((r.noise, r.unlabeled_fraction));
        }
    }
    let fixed: Option<Method> = if compare == "best" { None } else { Some(compare.parse()?) };
    let mut out = Vec::new();
    for (noise, frac) in cells {
        let per_method: Vec<(Method, Vec<&RunRecord>)> = methods
            .iter()
            .map(|&m| {
                let mut v: Vec<&RunRecord> =
                    runs.iter().filter(|r| r.method == m && r.noise == noise && r.unlabeled_fraction == frac).collect();
                v.sort_by_key(|r| r.seed);
                (m, v)
            })
            .collect();
        let f1 = |v: &[&RunRecord]| v.iter().map(|r| r.macro_f1).collect::<Vec<_>>();
        let mut ranking: Vec<(Method, f64)> = per_method.iter().map(|(m, v)| (*m, mean(&f1(v)))).collect();
        ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (m, v) in &per_method {
            let reference = match fixed {
                Some(r) if r != *m => Some(r),
                Some(_) => None,
                None if ranking.len() < 2 => None,
                None if ranking[0].0 == *m => Some(ranking[1].0),
                None => Some(ranking[0].0),
            };
            let (t, p) = match reference {
                Some(r) => {
                    let other = &per_method.iter().find(|(mm, _)| *mm == r).expect("listed").1;
                    match paired_t_test(&f1(v), &f1(other)) {
                        Ok(tt) => (Some(tt.t), Some(tt.p)),
                        Err(_) => (None, None),
                    }
                }
                None => (None, None),
            };
            let accs: Vec<f64> = v.iter().map(|r| r.accuracy).collect();
            let f1s = f1(v);
            let better = t.is_some_and(|t| t > 0.0);
            out.push(GroupSummary {
                method: *m,
                noise,
                unlabeled_fraction: frac,
                n: v.len(),
                accuracy_mean: mean(&accs),
                accuracy_std: sample_std(&accs),
                macro_f1_mean: mean(&f1s),
                macro_f1_std: sample_std(&f1s),
                reference,
                t,
                p_value: p,
                stars: if better { significance_stars(p.unwrap_or(1.0)).to_owned() } else { String::new() },
            });
        }
    }
    Ok(out)
}

fn load_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<SignedDigraph> {
    if cfg.dataset == "synthetic" {
        Ok(planted_signed_graph(&cfg.synthetic.config(seed))?.graph)
    } else {
        load_graph(Path::new(&cfg.dataset), cfg.format)
    }
}

/// Every run with its best parameters (when checkpoints are requested).
pub type RunOutputs = Vec<(RunRecord, Option<Checkpoint>)>;

/// Runs the full matrix in memory. Cells run in parallel; results are ordered
/// by (noise, fraction, seed, method) regardless of scheduling.
pub fn run_matrix(cfg: &ExperimentConfig) -> Result<(ExperimentResult, RunOutputs)> {
    cfg.validate()?;
    let methods = cfg.parsed_methods()?;
    let shared = if cfg.dataset == "synthetic" { None } else { Some(load_dataset(cfg, 0)?) };
    let mut cells = Vec::new();
    for &noise in &cfg.noise {
        for &frac in &cfg.unlabeled_fractions {
            for seed in 0..cfg.seeds {
                cells.push((noise, frac, seed));
            }
        }
    }
    let results: Vec<Result<RunOutputs>> = cells
        .par_iter()
        .map(|&(noise, frac, seed)| {
            let g = match &shared {
                Some(g) => g.clone(),
                None => load_dataset(cfg, seed)?,
            };
            let ctx = prepare_context(&g, noise, frac, seed)?;
            let base = cfg.train.apply(seed)?;
            methods
                .iter()
                .map(|&m| {
                    let start = Instant::now();
                    let report = run_method(m, &ctx, &base, &cfg.pl)?;
                    let wall_secs = start.elapsed().as_secs_f64();
                    let ev = evaluate(&report.best, &ctx.split.test)?;
                    let record = RunRecord {
                        method: m,
                        noise,
                        unlabeled_fraction: frac,
                        seed,
                        accuracy: ev.accuracy,
                        macro_f1: ev.macro_f1.value,
                        degenerate: ev.macro_f1.degenerate,
                        confusion: ev.confusion,
                        best_epoch: report.best_epoch,
                        stop_epoch: report.stop_epoch,
                        num_sb: report.num_sb,
                        history: report.history.clone(),
                        wall_secs,
                    };
                    let ck = cfg.save_checkpoints.then(|| Checkpoint::new(report.best, seed, m.id(), report.best_epoch));
                    Ok((record, ck))
                })
                .collect()
        })
        .collect();
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    let runs: Vec<RunRecord> = all.iter().map(|(r, _)| r.clone()).collect();
    let summary = summarize(&runs, &methods, &cfg.compare)?;
    Ok((ExperimentResult { dataset: cfg.dataset.clone(), digest: cfg.digest(), runs, summary }, all))
}

/// Root for run directories: `$MSB_RUN_DIR`, else `./runs`.
pub fn run_root() -> PathBuf {
    std::env::var_os(RUN_DIR_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}

/// Runs the matrix and writes `config.json`, `results.csv`, `summary.csv`,
/// `summary.json` and per-run histories under `<root>/<digest prefix>/`.
pub fn run_experiment(cfg: &ExperimentConfig, root: &Path) -> Result<(ExperimentResult, PathBuf)> {
    let (result, runs) = run_matrix(cfg)?;
    let dir = root.join(format!("exp-{}", &result.digest[..16]));
    let hist = dir.join("runs");
    fs::create_dir_all(&hist).map_err(MsbError::io(&hist))?;
    write_json(cfg, &dir.join("config.json"))?;
    let write = |name: &str, body: &str| -> Result<()> {
        let p = dir.join(name);
        let mut f = fs::File::create(&p).map_err(MsbError::io(&p))?;
        f.write_all(body.as_bytes()).map_err(MsbError::io(&p))
    };
    write("results.csv", &result.per_seed_csv())?;
    write("summary.csv", &result.summary_csv())?;
    write_json(&result.summary, &dir.join("summary.json"))?;
    for (r, ck) in &runs {
        let stem = format!("{}_n{}_u{}_s{}", r.method, r.noise, r.unlabeled_fraction, r.seed);
        write_json(r, &hist.join(format!("{stem}.json")))?;
        if let Some(ck) = ck {
            ck.save(&hist.join(format!("{stem}.ckpt.json")))?;
        }
    }
    Ok((result, dir))
}
