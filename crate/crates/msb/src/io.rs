//! Edge-list ingestion, the canonical `u v s` text format and JSON sidecars.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use msb_core::graph::BuildStats;
use msb_core::split::SplitDataset;
use msb_core::{binarize_rating, EdgeLabel, GraphBuilder, NodeId, SignedDigraph};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MsbError, Result};

/// How the third column of an input record is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ValueFormat {
    /// Integer rating; its sign becomes the edge sign, zero ratings are dropped.
    Rating,
    /// `+1`, `-1`, or `0` for an unlabeled edge.
    Sign,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records: usize,
    pub comments: usize,
    pub zero_ratings_dropped: usize,
    pub self_loops_dropped: usize,
    pub duplicates_replaced: usize,
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub graph: SignedDigraph,
    /// `id_map[i]` is the original identifier of node `i`.
    pub id_map: Vec<String>,
    pub stats: IngestStats,
}

fn fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses CSV or whitespace-separated `src, dst, value[, timestamp]` records.
///
/// Node identifiers are arbitrary tokens, compacted to `0..n` in order of first
/// appearance. Repeated ordered pairs keep the last record; self-loops are
/// dropped and counted. Blank lines and `#` comments are skipped.
pub fn parse_edge_list<R: BufRead>(reader: R, format: ValueFormat) -> Result<Ingested> {
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut id_map: Vec<String> = Vec::new();
    let mut builder = GraphBuilder::new();
    let mut stats = IngestStats::default();
    let mut intern = |tok: &str, id_map: &mut Vec<String>| -> NodeId {
        if let Some(&id) = ids.get(tok) {
            return id;
        }
        let id = id_map.len() as NodeId;
        ids.insert(tok.to_owned(), id);
        id_map.push(tok.to_owned());
        id
    };
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| MsbError::Parse { line: line_no, message: e.to_string() })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            stats.comments += 1;
            continue;
        }
        let f = fields(trimmed);
        if f.len() < 3 || f.len() > 4 || f[..3].iter().any(|s| s.is_empty()) {
            return Err(MsbError::Parse {
                line: line_no,
                message: format!("expected `src, dst, value[, timestamp]`, got {} fields", f.len()),
            });
        }
        let value: i64 = f[2].parse().map_err(|_| MsbError::Parse {
            line: line_no,
            message: format!("value `{}` is not an integer", f[2]),
        })?;
        stats.records += 1;
        let label = match format {
            ValueFormat::Rating => match binarize_rating(value) {
                Some(s) => EdgeLabel::from(s),
                None => {
                    stats.zero_ratings_dropped += 1;
                    continue;
                }
            },
            ValueFormat::Sign => EdgeLabel::from_i8(value.clamp(-2, 2) as i8).ok_or_else(|| MsbError::Parse {
                line: line_no,
                message: format!("sign `{value}` is not one of -1, 0, +1"),
            })?,
        };
        let u = intern(f[0], &mut id_map);
        let v = intern(f[1], &mut id_map);
        builder.insert(u, v, label);
    }
    builder.reserve_nodes(id_map.len());
    let (graph, BuildStats { self_loops_dropped, duplicates_replaced }) = builder.build();
    stats.self_loops_dropped = self_loops_dropped;
    stats.duplicates_replaced = duplicates_replaced;
    Ok(Ingested { graph, id_map, stats })
}

pub fn parse_edge_list_file(path: &Path, format: ValueFormat) -> Result<Ingested> {
    let f = File::open(path).map_err(MsbError::io(path))?;
    parse_edge_list(BufReader::new(f), format)
}

/// Writes `# nodes: N` followed by one `u v s` line per edge in sorted order.
pub fn write_canonical<W: Write>(g: &SignedDigraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# nodes: {}", g.num_nodes())?;
    for (e, l) in g.edges() {
        writeln!(w, "{} {} {}", e.src, e.dst, l.as_i8())?;
    }
    w.flush()
}

/// Reads the canonical format. Ids are used as-is; the node count is the
/// header value (or one past the largest id when the header is absent).
pub fn read_canonical<R: BufRead>(reader: R) -> Result<SignedDigraph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_id: Option<NodeId> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| MsbError::Parse { line: line_no, message: e.to_string() })?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            if let Some(n) = rest.trim().strip_prefix("nodes:") {
                declared = Some(n.trim().parse().map_err(|_| MsbError::Parse {
                    line: line_no,
                    message: format!("bad node count `{}`", n.trim()),
                })?);
            }
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        let bad = |m: String| MsbError::Parse { line: line_no, message: m };
        if f.len() != 3 {
            return Err(bad(format!("expected `u v s`, got {} fields", f.len())));
        }
        let u: NodeId = f[0].parse().map_err(|_| bad(format!("bad node id `{}`", f[0])))?;
        let v: NodeId = f[1].parse().map_err(|_| bad(format!("bad node id `{}`", f[1])))?;
        let s: i8 = f[2].parse().map_err(|_| bad(format!("bad sign `{}`", f[2])))?;
        let l = EdgeLabel::from_i8(s).ok_or_else(|| bad(format!("sign `{s}` is not one of -1, 0, +1")))?;
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((msb_core::Edge::new(u, v), l));
    }
    let n = declared.unwrap_or_else(|| max_id.map_or(0, |m| m as usize + 1));
    SignedDigraph::new(n, edges).map_err(|e| MsbError::Data(e.to_string()))
}

pub fn read_canonical_file(path: &Path) -> Result<SignedDigraph> {
    let f = File::open(path).map_err(MsbError::io(path))?;
    read_canonical(BufReader::new(f))
}

pub fn write_canonical_file(g: &SignedDigraph, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(MsbError::io(path))?;
    write_canonical(g, BufWriter::new(f)).map_err(MsbError::io(path))
}

/// Loads a graph from either format, keyed on the extension: `.csv` is a raw
/// edge list read with `format`, anything else is canonical.
pub fn load_graph(path: &Path, format: ValueFormat) -> Result<SignedDigraph> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        Ok(parse_edge_list_file(path, format)?.graph)
    } else {
        read_canonical_file(path)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphCounts {
    pub nodes: usize,
    pub positive: usize,
    pub negative: usize,
    pub unlabeled: usize,
}

impl GraphCounts {
    pub fn of(g: &SignedDigraph) -> Self {
        Self {
            nodes: g.num_nodes(),
            positive: g.positive_edges().len(),
            negative: g.negative_edges().len(),
            unlabeled: g.unlabeled_edges().len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub val: f64,
    pub test: f64,
    pub unlabeled: f64,
    pub sizes: SplitSizes,
    pub flipped: usize,
    /// SHA-256 over the sorted flipped edges, `src dst` per line.
    pub flip_digest: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train_labeled: usize,
    pub train_unlabeled: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitManifest {
    pub fn of(split: &SplitDataset) -> Self {
        let mut flipped: Vec<_> = split.flipped.iter().map(|&i| split.train_labeled[i].edge).collect();
        flipped.sort_unstable();
        let mut h = Sha256::new();
        for e in &flipped {
            h.update(format!("{} {}\n", e.src, e.dst).as_bytes());
        }
        Self {
            seed: split.seed,
            val: split.fractions.val,
            test: split.fractions.test,
            unlabeled: split.fractions.unlabeled,
            sizes: SplitSizes {
                train_labeled: split.train_labeled.len(),
                train_unlabeled: split.train_unlabeled.len(),
                val: split.val.len(),
                test: split.test.len(),
            },
            flipped: flipped.len(),
            flip_digest: hex::encode(h.finalize()),
        }
    }
}

/// JSON written next to a canonical graph file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub id_map: Vec<String>,
    pub counts: GraphCounts,
    pub ingest: IngestStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitManifest>,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(MsbError::io(path))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(MsbError::io(path))?;
    w.flush().map_err(MsbError::io(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(MsbError::io(path))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}
