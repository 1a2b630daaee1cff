//! Chronological major/minor edge-list partitioning.
//!
//! Major partitions are contiguous near-equal slices of the time-sorted
//! edge list, built once per graph. Minor partitions are built per query
//! from its δ: each non-final major hands the roots near its upper
//! boundary to a minor partition that also owns the following δ's worth
//! of edges, so every search tree's edge accesses stay inside exactly one
//! partition (the closure property). Root ranges of all partitions tile
//! the edge list, which is what makes per-partition counts sum exactly.

use thiserror::Error;

use crate::graph::{EdgeId, TemporalGraph, Time};
use crate::query::MotifQuery;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    Major,
    Minor,
}

/// Half-open index ranges into the global edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    pub kind: PartitionKind,
    pub edge_lo: EdgeId,
    pub edge_hi: EdgeId,
    pub root_lo: EdgeId,
    pub root_hi: EdgeId,
}

impl Partition {
    pub fn n_roots(&self) -> usize {
        (self.root_hi - self.root_lo) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSet {
    pub majors: Vec<Partition>,
    pub minors: Vec<Partition>,
    /// The δ the set was built for (already widened for anti-edges).
    pub delta: Time,
}

impl PartitionSet {
    /// All partitions in chronological root order: major 0, minor 0,
    /// major 1, minor 1, ...
    pub fn interleaved(&self) -> Vec<Partition> {
        let mut out = Vec::with_capacity(self.majors.len() + self.minors.len());
        for (i, &m) in self.majors.iter().enumerate() {
            out.push(m);
            if let Some(&minor) = self.minors.get(i) {
                out.push(minor);
            }
        }
        out
    }
}

/// The window partitions must close over: the coarse δ, widened by the
/// largest anti-edge window since an anti check may look past the coarse
/// limit of its root.
pub fn effective_delta(q: &MotifQuery) -> Time {
    q.cg_delta.saturating_add(q.max_anti_window())
}

/// Splits the edge list into `n` contiguous chronological ranges; the
/// first `n_edges % n` ranges get one extra edge. `n` larger than the
/// edge count degenerates into singletons plus empty ranges.
pub fn make_major_partitions(graph: &TemporalGraph, n: usize) -> Vec<(EdgeId, EdgeId)> {
    assert!(n >= 1, "need at least one partition");
    let total = graph.n_edges();
    let base = total / n;
    let extra = total % n;
    let mut out = Vec::with_capacity(n);
    let mut lo = 0usize;
    for i in 0..n {
        let hi = lo + base + usize::from(i < extra);
        out.push((lo as EdgeId, hi as EdgeId));
        lo = hi;
    }
    out
}

/// Builds the full partition set for a query window. For each non-final
/// major ending at edge `j`: roots whose δ-window escapes the major (the
/// ones later than `k`, the last edge with `t_j - t_k > δ`) move to a
/// minor partition whose edges extend to `l`, the first edge with
/// `t_l - t_j > δ`.
pub fn make_minor_partitions(
    graph: &TemporalGraph,
    majors: &[(EdgeId, EdgeId)],
    delta: Time,
) -> PartitionSet {
    let edges = graph.edges();
    let n_edges = edges.len();
    let mut out_majors = Vec::with_capacity(majors.len());
    let mut out_minors = Vec::new();
    for (idx, &(lo, hi)) in majors.iter().enumerate() {
        let is_final = idx == majors.len() - 1;
        if is_final || lo == hi {
            // an empty non-final major has no boundary to protect
            out_majors.push(Partition {
                kind: PartitionKind::Major,
                edge_lo: lo,
                edge_hi: hi,
                root_lo: lo,
                root_hi: hi,
            });
            continue;
        }
        let j = hi - 1;
        let t_j = edges[j as usize].t;
        // roots_end = k + 1 where k is the last index in the major with
        // t_j - t_k > delta (k = lo - 1 when there is none)
        let roots_end = match t_j.checked_sub(delta) {
            Some(thr) if thr > 0 => {
                let slice = &edges[lo as usize..hi as usize];
                lo + slice.partition_point(|e| e.t < thr) as EdgeId
            }
            _ => lo,
        };
        // l = the first edge with t_l - t_j > delta, or n_edges - 1
        let past = edges.partition_point(|e| e.t <= t_j.saturating_add(delta));
        let l = if past == n_edges { n_edges - 1 } else { past };
        out_majors.push(Partition {
            kind: PartitionKind::Major,
            edge_lo: lo,
            edge_hi: hi,
            root_lo: lo,
            root_hi: roots_end,
        });
        out_minors.push(Partition {
            kind: PartitionKind::Minor,
            edge_lo: roots_end,
            edge_hi: (l + 1) as EdgeId,
            root_lo: roots_end,
            root_hi: hi,
        });
    }
    PartitionSet { majors: out_majors, minors: out_minors, delta }
}

/// Convenience: majors then minors for a query's effective δ.
pub fn build_partitions(graph: &TemporalGraph, n: usize, delta: Time) -> PartitionSet {
    let majors = make_major_partitions(graph, n);
    make_minor_partitions(graph, &majors, delta)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClosureViolation {
    #[error("root ranges do not tile the edge list at edge {0}")]
    Tiling(EdgeId),
    #[error("partition {partition} root {root}: window reaches edge {reach} outside [{edge_lo}, {edge_hi})")]
    Escape { partition: usize, root: EdgeId, reach: EdgeId, edge_lo: EdgeId, edge_hi: EdgeId },
}

/// Checks that root ranges tile `[0, n_edges)` exactly and that every
/// root's δ-window lies inside its partition's edge range.
pub fn verify_partition_closure(
    graph: &TemporalGraph,
    pset: &PartitionSet,
) -> Result<(), ClosureViolation> {
    let mut ranges: Vec<(EdgeId, EdgeId)> = pset
        .majors
        .iter()
        .chain(&pset.minors)
        .filter(|p| p.root_lo < p.root_hi)
        .map(|p| (p.root_lo, p.root_hi))
        .collect();
    ranges.sort_unstable();
    let mut next = 0 as EdgeId;
    for (lo, hi) in ranges {
        if lo != next {
            return Err(ClosureViolation::Tiling(next));
        }
        next = hi;
    }
    if next as usize != graph.n_edges() {
        return Err(ClosureViolation::Tiling(next));
    }

    for (i, p) in pset.majors.iter().chain(&pset.minors).enumerate() {
        for root in p.root_lo..p.root_hi {
            if root < p.edge_lo {
                return Err(ClosureViolation::Escape {
                    partition: i,
                    root,
                    reach: root,
                    edge_lo: p.edge_lo,
                    edge_hi: p.edge_hi,
                });
            }
            let cap = graph.time(root).saturating_add(pset.delta);
            let reach = graph.global_upper_bound_within(cap) as EdgeId;
            if reach > p.edge_hi {
                return Err(ClosureViolation::Escape {
                    partition: i,
                    root,
                    reach,
                    edge_lo: p.edge_lo,
                    edge_hi: p.edge_hi,
                });
            }
        }
    }
    Ok(())
}

/// Renders ranges and the closure verdict for `tempest partition`.
pub fn render_partitions(graph: &TemporalGraph, pset: &PartitionSet) -> String {
    let mut out = format!(
        "{} majors, {} minors, delta {}\n",
        pset.majors.len(),
        pset.minors.len(),
        pset.delta
    );
    for p in pset.interleaved() {
        let kind = match p.kind {
            PartitionKind::Major => "major",
            PartitionKind::Minor => "minor",
        };
        out += &format!(
            "  {kind}: edges [{}, {}) ({} edges)  roots [{}, {}) ({} roots)\n",
            p.edge_lo,
            p.edge_hi,
            p.edge_hi - p.edge_lo,
            p.root_lo,
            p.root_hi,
            p.n_roots()
        );
    }
    out += &match verify_partition_closure(graph, pset) {
        Ok(()) => "closure: ok\n".to_string(),
        Err(v) => format!("closure: VIOLATED — {v}\n"),
    };
    out
}
