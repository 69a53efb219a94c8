//! `msb` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use msb_core::balance::{
    null_sample_statistics, triad_census, EdgeSample, Pattern, SbMode, ZScoreReport, BALANCED_PATTERNS,
};
use msb_core::community::{louvain, unsigned_projection, LouvainConfig, Partition};
use msb_core::model::score_edge;
use msb_core::reweight::ReweightOutput;
use msb_core::split::{inject_noise, split_dataset, NoiseSpec, SplitDataset, SplitFractions};
use msb_core::synth::planted_signed_graph;
use msb_core::train::{evaluate, sb_samples, train_l2rw_with, EvalRecord, TrainObserver};
use msb_core::{Edge, NodeId, SignedDigraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench;
use crate::checkpoint::Checkpoint;
use crate::error::{MsbError, Result};
use crate::experiment::{run_experiment, run_method, run_root, ExperimentConfig, Method, PlSection, TrainSection};
use crate::io::{
    load_graph, parse_edge_list_file, read_json, write_canonical_file, write_json, GraphCounts, IngestStats, Sidecar,
    SplitManifest, ValueFormat,
};

#[derive(Debug, Parser)]
#[command(name = "msb", version, about = "Signed link prediction with multiscale balance pseudo-labels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Convert a raw edge list into the canonical `u v s` format plus a JSON sidecar.
    Ingest {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "rating")]
        format: ValueFormat,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to `<out>.json`.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Split a graph into labeled/unlabeled/validation/test edges and inject label noise.
    Split {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Keep this share of the unlabeled edges.
        #[arg(long, default_value_t = 1.0)]
        unlabeled_fraction: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Louvain communities of the unsigned projection.
    Community {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Transitive-triad census and balance fractions.
    Census {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Z-scores of triad patterns against a signed-degree-preserving null model.
    Nullmodel {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Proposed swaps per sample; defaults to ceil(|E| ln |E|).
        #[arg(long)]
        swaps: Option<u64>,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pseudo-label the unlabeled training edges of a split.
    Label {
        #[arg(long)]
        split: PathBuf,
        /// Computed from the training graph when absent.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one method on a split and save the best checkpoint.
    Train {
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, default_value = "l2rw")]
        method: String,
        #[arg(long)]
        out: PathBuf,
        /// Per-evaluation loss and validation CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Per-epoch summary of the learned weights (reweighting methods only).
        #[arg(long)]
        weights: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Accuracy and Macro-F1 of a checkpoint on a split's test (or validation) edges.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        on: EvalSet,
    },
    /// Score `src dst` pairs (one per line) with a checkpoint.
    Score {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        edges: PathBuf,
    },
    /// Run an experiment matrix from a TOML config.
    Experiment {
        config: PathBuf,
        /// Overrides the run root from the environment.
        #[arg(long)]
        run_dir: Option<PathBuf>,
    },
    /// Write a planted-community signed graph in canonical format.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        out_degree: Option<usize>,
        #[arg(long)]
        intra_prob: Option<f64>,
        #[arg(long)]
        violation: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct GraphArg {
    /// `.csv` is read as a raw edge list, anything else as canonical.
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "rating")]
    pub format: ValueFormat,
}

impl GraphArg {
    fn load(&self) -> Result<SignedDigraph> {
        load_graph(&self.graph, self.format)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Both,
    Micro,
    Meso,
}

impl From<ModeArg> for SbMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Both => SbMode::Both,
            ModeArg::Micro => SbMode::MicroOnly,
            ModeArg::Meso => SbMode::MesoOnly,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EvalSet {
    Test,
    Val,
}

#[derive(Debug, Default, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub eval_interval: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// `zero` or `uniform`.
    #[arg(long)]
    pub eps_init: Option<String>,
    #[arg(long)]
    pub clean_fraction: Option<f64>,
    #[arg(long)]
    pub sb_ratio: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub pl_k: usize,
    #[arg(long, default_value_t = 10)]
    pub pl_rounds: usize,
}

impl TrainArgs {
    fn section(&self) -> TrainSection {
        TrainSection {
            epochs: self.epochs,
            eval_interval: self.eval_interval,
            patience: self.patience,
            lr: self.lr,
            weight_decay: self.weight_decay,
            dim: self.dim,
            alpha: self.alpha,
            eta: self.eta,
            eps_init: self.eps_init.clone(),
            clean_fraction: self.clean_fraction,
            sb_ratio: self.sb_ratio,
            task_loss: None,
        }
    }
}

/// Stored community assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub seed: u64,
    pub modularity: f64,
    pub num_communities: usize,
    pub assignment: Vec<u32>,
}

impl PartitionFile {
    pub fn partition(&self) -> Partition {
        Partition::from_labels(&self.assignment)
    }
}

fn load_partition(path: &Path, num_nodes: usize) -> Result<Partition> {
    let f: PartitionFile = read_json(path)?;
    if f.assignment.len() != num_nodes {
        return Err(MsbError::Data(format!(
            "partition covers {} nodes, graph has {num_nodes}",
            f.assignment.len()
        )));
    }
    Ok(f.partition())
}

fn detect(g: &SignedDigraph, seed: u64) -> Partition {
    louvain(&unsigned_projection(g), LouvainConfig { seed, ..Default::default() }).partition
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out).map_err(MsbError::io("<stdout>"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(MsbError::io(path))?))
}

fn pattern_name(p: Pattern) -> String {
    p.0.iter().map(|s| s.symbol()).collect()
}

#[derive(Default)]
struct WeightTrace {
    rows: Vec<String>,
}

impl TrainObserver for WeightTrace {
    fn on_reweight(&mut self, epoch: usize, batch: &[EdgeSample], out: &ReweightOutput) {
        use msb_core::balance::Provenance;
        let mut micro = 0.0;
        let mut meso = 0.0;
        for (s, w) in batch.iter().zip(&out.weights) {
            match s.provenance {
                Provenance::MicroSb => micro += w,
                Provenance::MesoSb => meso += w,
                Provenance::Clean => {}
            }
        }
        let nonzero = out.weights.iter().filter(|w| **w > 0.0).count();
        self.rows.push(format!("{epoch},{},{nonzero},{micro},{meso},{}", batch.len(), out.clean_loss));
    }
}

fn write_trace(path: &Path, history: &[EvalRecord]) -> Result<()> {
    let mut w = create(path)?;
    let io = MsbError::io;
    writeln!(w, "epoch,task_loss,clean_loss,sb_loss,total_loss,val_macro_f1,val_accuracy").map_err(io(path))?;
    for r in history {
        let l = r.mean_loss;
        writeln!(w, "{},{},{},{},{},{},{}", r.epoch, l.task, l.clean, l.sb, l.total, r.val_macro_f1, r.val_accuracy)
            .map_err(io(path))?;
    }
    w.flush().map_err(io(path))
}

#[derive(Serialize)]
struct CensusOut {
    patterns: Vec<(String, u64)>,
    balanced: u64,
    total: u64,
    balanced_fraction: Option<f64>,
    skipped: u64,
    labeled_edges: u64,
    meso_consistent: Option<u64>,
    meso_fraction: Option<f64>,
}

#[derive(Serialize)]
struct LabelSummary {
    unlabeled: usize,
    labeled: usize,
    micro: usize,
    meso: usize,
    accuracy: Option<f64>,
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Ingest { input, format, out: dest, sidecar } => {
            let ing = parse_edge_list_file(&input, format)?;
            write_canonical_file(&ing.graph, &dest)?;
            let side = Sidecar { id_map: ing.id_map, counts: GraphCounts::of(&ing.graph), ingest: ing.stats, split: None };
            let side_path = sidecar.unwrap_or_else(|| {
                let mut p = dest.clone().into_os_string();
                p.push(".json");
                PathBuf::from(p)
            });
            write_json(&side, &side_path)?;
            #[derive(Serialize)]
            struct Out<'a> {
                counts: &'a GraphCounts,
                ingest: &'a IngestStats,
            }
            print_json(out, &Out { counts: &side.counts, ingest: &side.ingest })
        }
        Command::Split { graph, seed, noise, unlabeled_fraction, out: dest } => {
            let g = graph.load()?;
            let split = split_dataset(&g, seed, SplitFractions::default())?;
            let split = inject_noise(&split, NoiseSpec { flip_fraction: noise, seed })?;
            let split = if unlabeled_fraction < 1.0 {
                split.with_unlabeled_fraction(unlabeled_fraction, seed)?
            } else {
                split
            };
            write_json(&split, &dest)?;
            print_json(out, &SplitManifest::of(&split))
        }
        Command::Community { graph, seed, out: dest } => {
            let g = graph.load()?;
            let r = louvain(&unsigned_projection(&g), LouvainConfig { seed, ..Default::default() });
            let file = PartitionFile {
                seed,
                modularity: r.modularity,
                num_communities: r.partition.num_communities(),
                assignment: r.partition.assignment().to_vec(),
            };
            write_json(&file, &dest)?;
            writeln!(out, "communities {} modularity {:.6}", file.num_communities, file.modularity)
                .map_err(MsbError::io("<stdout>"))
        }
        Command::Census { graph, partition } => {
            let g = graph.load()?;
            let part = partition.map(|p| load_partition(&p, g.num_nodes())).transpose()?;
            let c = triad_census(&g, part.as_ref());
            print_json(
                out,
                &CensusOut {
                    patterns: Pattern::all().map(|p| (pattern_name(p), c.count(p))).collect(),
                    balanced: c.balanced(),
                    total: c.total(),
                    balanced_fraction: c.balanced_fraction(),
                    skipped: c.skipped,
                    labeled_edges: c.labeled_edges,
                    meso_consistent: c.meso_consistent,
                    meso_fraction: c.meso_fraction(),
                },
            )
        }
        Command::Nullmodel { graph, samples, seed, swaps, partition, out: dest } => {
            if samples < 2 {
                return Err(MsbError::Usage("need at least two null samples".into()));
            }
            let g = graph.load()?;
            let part = partition.map(|p| load_partition(&p, g.num_nodes())).transpose()?;
            let stats: Vec<_> = (0..samples as u64)
                .into_par_iter()
                .map(|i| null_sample_statistics(&g, part.as_ref(), seed, i, swaps))
                .collect();
            let report = ZScoreReport::from_samples(&g, part.as_ref(), &stats);
            if let Some(dest) = dest {
                write_json(&report, &dest)?;
            }
            for (p, z) in BALANCED_PATTERNS.iter().zip(&report.balanced) {
                let zs = z.z.map_or_else(|| "undefined".to_owned(), |v| format!("{v:.3}"));
                writeln!(out, "{} observed {} null {:.1}±{:.1} z {zs}", pattern_name(*p), z.empirical, z.null_mean, z.null_std)
                    .map_err(MsbError::io("<stdout>"))?;
            }
            if let Some(m) = report.meso {
                let zs = m.z.map_or_else(|| "undefined".to_owned(), |v| format!("{v:.3}"));
                writeln!(out, "meso observed {} null {:.1}±{:.1} z {zs}", m.empirical, m.null_mean, m.null_std).map_err(MsbError::io("<stdout>"))?;
            }
            Ok(())
        }
        Command::Label { split, partition, mode, out: dest } => {
            let split: SplitDataset = read_json(&split)?;
            let tg = split.training_graph();
            let part = match partition {
                Some(p) => load_partition(&p, split.num_nodes)?,
                None => detect(&tg, split.seed),
            };
            let samples = sb_samples(&split, &part, mode.into());
            let truth: std::collections::HashMap<Edge, msb_core::Sign> =
                split.train_unlabeled.iter().copied().zip(split.unlabeled_truth.iter().copied()).collect();
            let mut w = create(&dest)?;
            let io = MsbError::io;
            writeln!(w, "src,dst,sign,provenance,truth").map_err(io(&dest))?;
            let mut correct = 0;
            for s in &samples {
                let t = truth.get(&s.edge).copied();
                if t == Some(s.sign) {
                    correct += 1;
                }
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    s.edge.src,
                    s.edge.dst,
                    s.sign.as_i8(),
                    s.provenance.as_str(),
                    t.map_or(0, |t| t.as_i8())
                )
                .map_err(io(&dest))?;
            }
            w.flush().map_err(io(&dest))?;
            use msb_core::balance::Provenance;
            print_json(
                out,
                &LabelSummary {
                    unlabeled: split.train_unlabeled.len(),
                    labeled: samples.len(),
                    micro: samples.iter().filter(|s| s.provenance == Provenance::MicroSb).count(),
                    meso: samples.iter().filter(|s| s.provenance == Provenance::MesoSb).count(),
                    accuracy: (!samples.is_empty()).then(|| correct as f64 / samples.len() as f64),
                },
            )
        }
        Command::Train { split, partition, method, out: dest, trace, weights, train } => {
            let method: Method = method.parse()?;
            let split: SplitDataset = read_json(&split)?;
            let seed = train.seed.unwrap_or(split.seed);
            let base = train.section().apply(seed)?;
            let tg = split.training_graph();
            let part = match partition {
                Some(p) => load_partition(&p, split.num_nodes)?,
                None => detect(&tg, split.seed),
            };
            let pl = PlSection { k: train.pl_k, rounds: train.pl_rounds };
            let is_reweighting = matches!(method, Method::L2rw | Method::L2rwConstant | Method::L2rwMicro | Method::L2rwMeso);
            let report = if let (Some(wpath), true) = (&weights, is_reweighting) {
                let cfg = method.configure(&base);
                let sb = sb_samples(&split, &part, cfg.sb_mode);
                let mut obs = WeightTrace::default();
                let r = train_l2rw_with(&split, &sb, &cfg, &mut obs)?;
                let mut w = create(wpath)?;
                writeln!(w, "epoch,batch,nonzero,micro_weight,meso_weight,clean_loss").map_err(MsbError::io(wpath))?;
                for row in &obs.rows {
                    writeln!(w, "{row}").map_err(MsbError::io(wpath))?;
                }
                w.flush().map_err(MsbError::io(wpath))?;
                r
            } else {
                if weights.is_some() {
                    return Err(MsbError::Usage(format!("--weights needs a reweighting method, got `{method}`")));
                }
                let ctx = crate::experiment::RunContext {
                    noise: 0.0,
                    unlabeled_fraction: 1.0,
                    seed,
                    split: split.clone(),
                    partition: part,
                };
                run_method(method, &ctx, &base, &pl)?
            };
            if let Some(t) = trace {
                write_trace(&t, &report.history)?;
            }
            let ev = evaluate(&report.best, &split.val)?;
            Checkpoint::new(report.best, seed, method.id(), report.best_epoch).save(&dest)?;
            writeln!(
                out,
                "method {method} best_epoch {} stop_epoch {} pseudo_labels {} val_accuracy {:.4} val_macro_f1 {:.4}",
                report.best_epoch, report.stop_epoch, report.num_sb, ev.accuracy, ev.macro_f1.value
            )
            .map_err(MsbError::io("<stdout>"))
        }
        Command::Evaluate { checkpoint, split, on } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let split: SplitDataset = read_json(&split)?;
            if split.num_nodes != ck.num_nodes {
                return Err(MsbError::Data(format!(
                    "checkpoint has {} nodes, split has {}",
                    ck.num_nodes, split.num_nodes
                )));
            }
            let edges = match on {
                EvalSet::Test => &split.test,
                EvalSet::Val => &split.val,
            };
            let ev = evaluate(&ck.params, edges)?;
            print_json(out, &ev)
        }
        Command::Score { checkpoint, edges } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let f = File::open(&edges).map_err(MsbError::io(&edges))?;
            let mut rows = Vec::new();
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(MsbError::io(&edges))?;
                let t = line.trim();
                if t.is_empty() || t.starts_with('#') {
                    continue;
                }
                let parse = |s: Option<&str>| -> Result<NodeId> {
                    let v: NodeId = s
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| MsbError::Parse { line: i + 1, message: "expected `src dst`".into() })?;
                    if v as usize >= ck.num_nodes {
                        return Err(MsbError::Parse { line: i + 1, message: format!("node {v} out of range") });
                    }
                    Ok(v)
                };
                let mut it = t.split_whitespace();
                let (u, v) = (parse(it.next())?, parse(it.next())?);
                let s = score_edge(&ck.params, u, v);
                rows.push(format!("{u} {v} {s:.6} {}", if s >= 0.5 { 1 } else { -1 }));
            }
            for r in rows {
                writeln!(out, "{r}").map_err(MsbError::io("<stdout>"))?;
            }
            Ok(())
        }
        Command::Experiment { config, run_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let root = run_dir.unwrap_or_else(run_root);
            let (result, dir) = run_experiment(&cfg, &root)?;
            write!(out, "{}", result.summary_csv()).map_err(MsbError::io("<stdout>"))?;
            writeln!(out, "results in {}", dir.display()).map_err(MsbError::io("<stdout>"))
        }
        Command::Synth { seed, nodes, out_degree, intra_prob, violation, out: dest } => {
            let mut c = bench::synthetic_config(seed);
            if let Some(v) = nodes {
                c.num_nodes = v;
            }
            if let Some(v) = out_degree {
                c.out_degree = v;
            }
            if let Some(v) = intra_prob {
                c.intra_prob = v;
            }
            if let Some(v) = violation {
                c.violation = v;
            }
            let s = planted_signed_graph(&c)?;
            write_canonical_file(&s.graph, &dest)?;
            print_json(out, &GraphCounts::of(&s.graph))
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "msb: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parser_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with(["msb", "frobnicate"], &mut o, &mut e), 1);
        assert_eq!(main_with(["msb", "--help"], &mut o, &mut e), 0);
    }
}
