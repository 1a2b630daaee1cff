//! Shared fixtures for the integration and acceptance suites: seeded
//! random graph/query generators and the motif shape catalog.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use tempest::graph::{Label, TemporalGraph, Time};
use tempest::query::{validate_query, AntiEdge, MotifEdge, MotifQuery, OutputMode, RuntimeParams};

pub fn motif(edges: &[(usize, usize)]) -> MotifQuery {
    let edges = edges
        .iter()
        .enumerate()
        .map(|(order, &(u, v))| MotifEdge { u, v, order, label: None })
        .collect();
    MotifQuery {
        edges,
        anti_edges: Vec::new(),
        cg_delta: 1,
        fg_delta: Default::default(),
        vertex_labels: Default::default(),
        output: OutputMode::Count,
        in_graph: None,
        runtime: RuntimeParams::default(),
    }
}

/// The motif shape catalog the differential suites cycle through.
pub fn motif_suite() -> Vec<(&'static str, MotifQuery)> {
    vec![
        ("3-path", motif(&[(0, 1), (1, 2), (2, 3)])),
        ("triangle", motif(&[(0, 1), (1, 2), (2, 0)])),
        ("tailed-triangle", motif(&[(0, 1), (1, 2), (2, 0), (0, 3)])),
        ("4-cycle", motif(&[(0, 1), (1, 2), (2, 3), (3, 0)])),
        ("diamond", motif(&[(0, 1), (1, 2), (0, 3), (3, 2)])),
        ("5-edge", motif(&[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)])),
    ]
}

/// Random temporal graph with clustered timestamps (duplicates are the
/// point: the tie-break order must be exercised) and occasional
/// self-loops.
pub fn random_graph(rng: &mut StdRng, max_vertices: usize, max_edges: usize) -> TemporalGraph {
    let n_v = rng.gen_range(2..=max_vertices) as u64;
    let n_e = rng.gen_range(1..=max_edges);
    let t_span = rng.gen_range(1..=(3 * n_e.max(4)) as Time / 2);
    let mut rows = Vec::with_capacity(n_e);
    let mut labels = Vec::with_capacity(n_e);
    for _ in 0..n_e {
        let src = rng.gen_range(0..n_v);
        let dst = if rng.gen_bool(0.02) { src } else { rng.gen_range(0..n_v) };
        rows.push((src, dst, rng.gen_range(0..=t_span)));
        labels.push(rng.gen_range(0..3) as Label);
    }
    let labeled = rng.gen_bool(0.5);
    let mut g = TemporalGraph::from_rows(rows, labeled.then_some(labels));
    if rng.gen_bool(0.5) {
        let text: String = (0..g.n_vertices())
            .map(|v| format!("{} {}\n", g.original_id(v as u32), rng.gen_range(0..3)))
            .collect();
        g.attach_vertex_labels(text.as_bytes()).unwrap();
    }
    g
}

pub fn random_delta(rng: &mut StdRng, graph: &TemporalGraph) -> Time {
    let span = graph
        .edges()
        .last()
        .map(|e| e.t - graph.edges()[0].t)
        .unwrap_or(1)
        .max(1);
    rng.gen_range(1..=span.saturating_mul(5) / 4 + 1)
}

/// A base shape with random coarse delta for this graph.
pub fn random_plain_query(rng: &mut StdRng, graph: &TemporalGraph, shape: &MotifQuery) -> MotifQuery {
    let mut q = shape.clone();
    q.cg_delta = random_delta(rng, graph);
    q
}

/// Decorates a shape with random fine windows, label predicates, and up
/// to two anti-edges, keeping the query valid by construction.
pub fn random_general_query(
    rng: &mut StdRng,
    graph: &TemporalGraph,
    shape: &MotifQuery,
) -> MotifQuery {
    let mut q = random_plain_query(rng, graph, shape);

    for gap in 0..q.edges.len().saturating_sub(1) {
        if rng.gen_bool(0.4) {
            q.fg_delta.insert(gap, rng.gen_range(1..=q.cg_delta));
        }
    }
    if rng.gen_bool(0.5) {
        for v in 0..q.n_motif_vertices() {
            if rng.gen_bool(0.3) {
                q.vertex_labels.insert(v, rng.gen_range(0..3));
            }
        }
    }
    if rng.gen_bool(0.3) {
        let i = rng.gen_range(0..q.edges.len());
        q.edges[i].label = Some(rng.gen_range(0..3));
    }

    // up to two anti-edges, inserted at positions where both endpoints
    // are already mapped by earlier real edges
    let n_antis = rng.gen_range(0..=2);
    for _ in 0..n_antis {
        let n_levels = q.n_levels();
        // insertion position measured over the current combined order
        let pos = rng.gen_range(1..=n_levels);
        let mapped: Vec<usize> = {
            let mut m: Vec<usize> = q
                .edges
                .iter()
                .filter(|e| e.order < pos)
                .flat_map(|e| [e.u, e.v])
                .collect();
            m.sort_unstable();
            m.dedup();
            m
        };
        if mapped.len() < 2 {
            continue;
        }
        let u = mapped[rng.gen_range(0..mapped.len())];
        let v = loop {
            let v = mapped[rng.gen_range(0..mapped.len())];
            if v != u {
                break v;
            }
        };
        let earlier: Vec<usize> = (0..q.edges.len()).filter(|&i| q.edges[i].order < pos).collect();
        let attach = earlier[rng.gen_range(0..earlier.len())];
        // shift everything at or past the insertion point one slot down
        for e in &mut q.edges {
            if e.order >= pos {
                e.order += 1;
            }
        }
        for a in &mut q.anti_edges {
            if a.order >= pos {
                a.order += 1;
            }
        }
        q.anti_edges.push(AntiEdge {
            u,
            v,
            attach,
            window: rng.gen_range(0..=q.cg_delta),
            order: pos,
        });
        q.anti_edges.sort_by_key(|a| a.order);
    }
    debug_assert!(validate_query(&q).is_ok(), "generator produced invalid query: {q:?}");
    q
}

/// Sorted copy, for multiset comparisons.
pub fn sorted(mut matches: Vec<Vec<tempest::graph::EdgeId>>) -> Vec<Vec<tempest::graph::EdgeId>> {
    matches.sort();
    matches
}

/// Synthetic skew: one vertex participates in half of all edges, with
/// the edges into it (the expensive roots) concentrated at the start of
/// the timeline so they land in few root chunks.
pub fn hot_vertex_graph(n_edges: usize, n_hot_roots: usize) -> TemporalGraph {
    let cold = 10_000u64;
    let hot = cold; // densified id of the hot vertex comes out last
    let mut rows = Vec::with_capacity(n_edges);
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for i in 0..n_edges {
        let t = i as Time;
        if i < 2 * n_hot_roots && i % 2 == 0 {
            rows.push((next() % cold, hot, t));
        } else if i % 2 == 1 {
            rows.push((hot, next() % cold, t));
        } else {
            rows.push((next() % cold, next() % cold, t));
        }
    }
    TemporalGraph::from_rows(rows, None)
}

/// Four edges fanning out of the second motif vertex: rooted at an edge
/// into the hot vertex, every later level scans the hot out-list.
pub fn hot_fan_motif(delta: Time) -> MotifQuery {
    let mut q = motif(&[(0, 1), (1, 2), (1, 3), (1, 4)]);
    q.cg_delta = delta;
    q
}
