//! Temporal graph storage: a time-sorted edge list plus CSR-like per-vertex
//! in/out indices whose entries point back into the edge list.
//!
//! The edge list is totally ordered by `(t, index)`; the index is the
//! tie-break for equal timestamps, so "edge a is earlier than edge b" is
//! simply `a < b` once the graph is built. Adjacency lists store edge
//! indices in ascending order, hence ascending `(t, index)` as well.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use thiserror::Error;

/// Dense vertex id (assigned on load).
pub type VertexId = u32;
/// Index into the time-sorted edge list.
pub type EdgeId = u32;
/// Timestamp in dataset-native units (seconds for the SNAP datasets).
pub type Time = u64;
/// Small categorical label on a vertex or edge.
pub type Label = u16;

/// One timestamped directed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemporalEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub t: Time,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: negative timestamp")]
    NegativeTimestamp { line: usize },
    #[error("unknown vertex id {0}")]
    UnknownVertex(u64),
    #[error("bad magic (not a TMPG file)")]
    BadMagic,
    #[error("unsupported TMPG version {0}")]
    BadVersion(u32),
    #[error("truncated binary graph")]
    Truncated,
}

/// Compressed adjacency: `lists[offsets[v]..offsets[v+1]]` are the edge
/// indices incident to vertex `v`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
struct AdjIndex {
    offsets: Vec<usize>,
    lists: Vec<EdgeId>,
}

impl AdjIndex {
    fn build(n_vertices: usize, keys: &[VertexId]) -> AdjIndex {
        let mut offsets = vec![0usize; n_vertices + 1];
        for &v in keys {
            offsets[v as usize + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let mut lists = vec![0 as EdgeId; *offsets.last().unwrap_or(&0)];
        let mut cursor = offsets.clone();
        for (e, &v) in keys.iter().enumerate() {
            lists[cursor[v as usize]] = e as EdgeId;
            cursor[v as usize] += 1;
        }
        AdjIndex { offsets, lists }
    }

    fn list(&self, v: VertexId) -> &[EdgeId] {
        &self.lists[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }
}

/// Immutable temporal graph. Safe to share across worker threads; all
/// mutation happens during construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalGraph {
    edges: Vec<TemporalEdge>,
    out_index: AdjIndex,
    in_index: AdjIndex,
    vertex_labels: Option<Vec<Label>>,
    edge_labels: Option<Vec<Label>>,
    /// Sorted original vertex ids; position = dense id. Present when the
    /// graph came from a text edge list (binary files are already dense).
    original_ids: Option<Vec<u64>>,
}

impl TemporalGraph {
    /// Builds a graph from raw `(src, dst, t[, label])` rows in any order.
    /// Vertex ids are densified by rank among the distinct ids seen; edges
    /// are stably sorted by timestamp so that equal timestamps keep their
    /// input order as the tie-break.
    pub fn from_rows(rows: Vec<(u64, u64, Time)>, labels: Option<Vec<Label>>) -> TemporalGraph {
        debug_assert!(labels.as_ref().is_none_or(|l| l.len() == rows.len()));
        let mut ids: Vec<u64> = rows.iter().flat_map(|&(s, d, _)| [s, d]).collect();
        ids.sort_unstable();
        ids.dedup();
        let dense = |id: u64| ids.binary_search(&id).unwrap() as VertexId;

        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by_key(|&i| rows[i].2);
        let edges: Vec<TemporalEdge> = order
            .iter()
            .map(|&i| TemporalEdge {
                src: dense(rows[i].0),
                dst: dense(rows[i].1),
                t: rows[i].2,
            })
            .collect();
        let edge_labels = labels.map(|l| order.iter().map(|&i| l[i]).collect());

        let srcs: Vec<VertexId> = edges.iter().map(|e| e.src).collect();
        let dsts: Vec<VertexId> = edges.iter().map(|e| e.dst).collect();
        TemporalGraph {
            out_index: AdjIndex::build(ids.len(), &srcs),
            in_index: AdjIndex::build(ids.len(), &dsts),
            edges,
            vertex_labels: None,
            edge_labels,
            original_ids: Some(ids),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.out_index.offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> TemporalEdge {
        self.edges[e as usize]
    }

    pub fn time(&self, e: EdgeId) -> Time {
        self.edges[e as usize].t
    }

    /// Edge indices with `src == v`, ascending in (t, index).
    pub fn out_list(&self, v: VertexId) -> &[EdgeId] {
        self.out_index.list(v)
    }

    /// Edge indices with `dst == v`, ascending in (t, index).
    pub fn in_list(&self, v: VertexId) -> &[EdgeId] {
        self.in_index.list(v)
    }

    pub fn vertex_label(&self, v: VertexId) -> Label {
        self.vertex_labels.as_ref().map_or(0, |l| l[v as usize])
    }

    pub fn edge_label(&self, e: EdgeId) -> Label {
        self.edge_labels.as_ref().map_or(0, |l| l[e as usize])
    }

    pub fn has_vertex_labels(&self) -> bool {
        self.vertex_labels.is_some()
    }

    pub fn has_edge_labels(&self) -> bool {
        self.edge_labels.is_some()
    }

    /// The original id a dense vertex id came from (identity for graphs
    /// loaded from binary files).
    pub fn original_id(&self, v: VertexId) -> u64 {
        self.original_ids.as_ref().map_or(v as u64, |ids| ids[v as usize])
    }

    /// Resolves a user-facing vertex id to the dense id space.
    pub fn resolve_id(&self, original: u64) -> Option<VertexId> {
        match &self.original_ids {
            Some(ids) => ids.binary_search(&original).ok().map(|i| i as VertexId),
            None => (original < self.n_vertices() as u64).then_some(original as VertexId),
        }
    }

    /// First position in `list` whose edge is strictly later than
    /// `(t_exclusive, idx_tiebreak)` under the (t, index) total order;
    /// `list.len()` if none.
    pub fn lower_bound_after(&self, list: &[EdgeId], t_exclusive: Time, idx_tiebreak: EdgeId) -> usize {
        list.partition_point(|&e| {
            let te = self.edges[e as usize].t;
            (te, e) <= (t_exclusive, idx_tiebreak)
        })
    }

    /// One past the last position in `list` whose timestamp is `<= t_inclusive`.
    pub fn upper_bound_within(&self, list: &[EdgeId], t_inclusive: Time) -> usize {
        list.partition_point(|&e| self.edges[e as usize].t <= t_inclusive)
    }

    /// First position in `list` whose timestamp is `>= t`.
    pub fn first_at_or_after(&self, list: &[EdgeId], t: Time) -> usize {
        list.partition_point(|&e| self.edges[e as usize].t < t)
    }

    /// `lower_bound_after` over the global edge list (positions are edge ids).
    pub fn global_lower_bound_after(&self, t_exclusive: Time, idx_tiebreak: EdgeId) -> usize {
        let first_at = self.edges.partition_point(|e| e.t < t_exclusive);
        let first_past = self.edges.partition_point(|e| e.t <= t_exclusive);
        (idx_tiebreak as usize + 1).clamp(first_at, first_past)
    }

    /// `upper_bound_within` over the global edge list.
    pub fn global_upper_bound_within(&self, t_inclusive: Time) -> usize {
        self.edges.partition_point(|e| e.t <= t_inclusive)
    }

    /// Attaches vertex labels from `vertex_id label` lines. Unlabeled
    /// vertices keep label 0. A vertex assigned twice keeps the last value;
    /// each duplicate is reported as a warning.
    pub fn attach_vertex_labels(&mut self, source: impl BufRead) -> Result<Vec<String>, GraphError> {
        let mut labels = vec![0 as Label; self.n_vertices()];
        let mut seen = vec![false; self.n_vertices()];
        let mut warnings = Vec::new();
        for (lineno, line) in source.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
                continue;
            }
            let mut it = line.split_ascii_whitespace();
            let (id, label) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(GraphError::Malformed {
                        line: lineno + 1,
                        msg: format!("expected `vertex_id label`, got {line:?}"),
                    })
                }
            };
            let id: u64 = id.parse().map_err(|_| GraphError::Malformed {
                line: lineno + 1,
                msg: format!("bad vertex id {id:?}"),
            })?;
            let label: Label = label.parse().map_err(|_| GraphError::Malformed {
                line: lineno + 1,
                msg: format!("bad label {label:?}"),
            })?;
            let v = self.resolve_id(id).ok_or(GraphError::UnknownVertex(id))?;
            if seen[v as usize] {
                warnings.push(format!("vertex {id} labeled more than once; keeping the last value"));
            }
            seen[v as usize] = true;
            labels[v as usize] = label;
        }
        self.vertex_labels = Some(labels);
        Ok(warnings)
    }

    /// Checks every structural invariant; used heavily in tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.n_vertices();
        for w in self.edges.windows(2) {
            if w[0].t > w[1].t {
                return Err("edge list not sorted by timestamp".into());
            }
        }
        let mut out_total = 0;
        let mut in_total = 0;
        for v in 0..n as VertexId {
            for pair in [(self.out_list(v), true), (self.in_list(v), false)] {
                let (list, is_out) = pair;
                for w in list.windows(2) {
                    if w[0] >= w[1] {
                        return Err(format!("adjacency of {v} not strictly increasing"));
                    }
                }
                for &e in list {
                    let edge = self.edges[e as usize];
                    let end = if is_out { edge.src } else { edge.dst };
                    if end != v {
                        return Err(format!("edge {e} filed under wrong vertex {v}"));
                    }
                }
            }
            out_total += self.out_list(v).len();
            in_total += self.in_list(v).len();
        }
        if out_total != self.n_edges() || in_total != self.n_edges() {
            return Err("adjacency sizes do not sum to edge count".into());
        }
        Ok(())
    }
}

/// Input encoding for [`load_edge_list`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Binary,
}

/// Loads a temporal graph from a file path. `.bin` selects the binary
/// format, `.gz` gzip-compressed text, anything else plain text.
pub fn load_path(path: impl AsRef<Path>) -> Result<TemporalGraph, GraphError> {
    let path = path.as_ref();
    let file = File::open(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") | Some("tmpg") => load_binary(BufReader::new(file)),
        Some("gz") => load_text(BufReader::new(GzDecoder::new(file))),
        _ => load_text(BufReader::new(file)),
    }
}

/// Loads a temporal graph from a reader in the given format.
pub fn load_edge_list(source: impl BufRead, format: Format) -> Result<TemporalGraph, GraphError> {
    match format {
        Format::Text => load_text(source),
        Format::Binary => load_binary(source),
    }
}

/// Text format: one `src dst t [label]` per line, whitespace separated.
/// Lines starting with `#` or `%` are comments. Empty input is an empty
/// graph, not an error.
pub fn load_text(source: impl BufRead) -> Result<TemporalGraph, GraphError> {
    let mut rows = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut any_label = false;
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(GraphError::Malformed {
                line: lineno + 1,
                msg: format!("expected `src dst t [label]`, got {} fields", fields.len()),
            });
        }
        let parse_u64 = |s: &str, what: &str| -> Result<u64, GraphError> {
            s.parse().map_err(|_| {
                if s.starts_with('-') && s[1..].chars().all(|c| c.is_ascii_digit()) && what == "timestamp" {
                    GraphError::NegativeTimestamp { line: lineno + 1 }
                } else {
                    GraphError::Malformed {
                        line: lineno + 1,
                        msg: format!("bad {what} {s:?}"),
                    }
                }
            })
        };
        let src = parse_u64(fields[0], "src")?;
        let dst = parse_u64(fields[1], "dst")?;
        let t = parse_u64(fields[2], "timestamp")?;
        let label = match fields.get(3) {
            Some(s) => {
                any_label = true;
                s.parse().map_err(|_| GraphError::Malformed {
                    line: lineno + 1,
                    msg: format!("bad label {s:?}"),
                })?
            }
            None => 0,
        };
        rows.push((src, dst, t));
        labels.push(label);
    }
    Ok(TemporalGraph::from_rows(rows, any_label.then_some(labels)))
}

const MAGIC: &[u8; 4] = b"TMPG";
const VERSION: u32 = 1;
const FLAG_VERTEX_LABELS: u32 = 1;
const FLAG_EDGE_LABELS: u32 = 2;

/// Binary format, little-endian: `TMPG`, version u32, n_vertices u64,
/// n_edges u64, flags u32 (bit0 vertex labels, bit1 edge labels); then per
/// edge `src u32, dst u32, t u64[, label u16]`; then the vertex label
/// array if present.
pub fn save_binary(graph: &TemporalGraph, mut out: impl Write) -> Result<(), GraphError> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(graph.n_vertices() as u64).to_le_bytes())?;
    out.write_all(&(graph.n_edges() as u64).to_le_bytes())?;
    let mut flags = 0;
    if graph.vertex_labels.is_some() {
        flags |= FLAG_VERTEX_LABELS;
    }
    if graph.edge_labels.is_some() {
        flags |= FLAG_EDGE_LABELS;
    }
    out.write_all(&flags.to_le_bytes())?;
    for (i, e) in graph.edges.iter().enumerate() {
        out.write_all(&e.src.to_le_bytes())?;
        out.write_all(&e.dst.to_le_bytes())?;
        out.write_all(&e.t.to_le_bytes())?;
        if let Some(labels) = &graph.edge_labels {
            out.write_all(&labels[i].to_le_bytes())?;
        }
    }
    if let Some(labels) = &graph.vertex_labels {
        for &l in labels {
            out.write_all(&l.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn load_binary(mut source: impl Read) -> Result<TemporalGraph, GraphError> {
    fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N], GraphError> {
        let mut buf = [0u8; N];
        r.read_exact(&mut buf).map_err(|e| {
            if e.kind() == io::ErrorKind::UnexpectedEof {
                GraphError::Truncated
            } else {
                GraphError::Io(e)
            }
        })?;
        Ok(buf)
    }
    if &read_exact::<4>(&mut source)? != MAGIC {
        return Err(GraphError::BadMagic);
    }
    let version = u32::from_le_bytes(read_exact(&mut source)?);
    if version != VERSION {
        return Err(GraphError::BadVersion(version));
    }
    let n_vertices = u64::from_le_bytes(read_exact(&mut source)?) as usize;
    let n_edges = u64::from_le_bytes(read_exact(&mut source)?) as usize;
    let flags = u32::from_le_bytes(read_exact(&mut source)?);

    let mut edges = Vec::with_capacity(n_edges);
    let mut edge_labels = (flags & FLAG_EDGE_LABELS != 0).then(|| Vec::with_capacity(n_edges));
    for _ in 0..n_edges {
        let src = u32::from_le_bytes(read_exact(&mut source)?);
        let dst = u32::from_le_bytes(read_exact(&mut source)?);
        let t = u64::from_le_bytes(read_exact(&mut source)?);
        if let Some(labels) = &mut edge_labels {
            labels.push(u16::from_le_bytes(read_exact(&mut source)?));
        }
        edges.push(TemporalEdge { src, dst, t });
    }
    let vertex_labels = if flags & FLAG_VERTEX_LABELS != 0 {
        let mut labels = Vec::with_capacity(n_vertices);
        for _ in 0..n_vertices {
            labels.push(u16::from_le_bytes(read_exact(&mut source)?));
        }
        Some(labels)
    } else {
        None
    };

    // The file stores edges already time-sorted; rebuild only the indices.
    let srcs: Vec<VertexId> = edges.iter().map(|e| e.src).collect();
    let dsts: Vec<VertexId> = edges.iter().map(|e| e.dst).collect();
    let graph = TemporalGraph {
        out_index: AdjIndex::build(n_vertices, &srcs),
        in_index: AdjIndex::build(n_vertices, &dsts),
        edges,
        vertex_labels,
        edge_labels,
        original_ids: None,
    };
    for w in graph.edges.windows(2) {
        if w[0].t > w[1].t {
            return Err(GraphError::Malformed {
                line: 0,
                msg: "binary edge list not time-sorted".into(),
            });
        }
    }
    Ok(graph)
}

/// Writes the graph back out as binary to `path`.
pub fn save_path(graph: &TemporalGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let file = File::create(path)?;
    save_binary(graph, BufWriter::new(file))
}
