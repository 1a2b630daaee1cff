//! Brute-force reference miner. Enumerates edge tuples in ascending index
//! order directly off the raw edge array — no adjacency indices, no plan,
//! no shared machinery with the engine beyond graph accessors — and
//! checks the problem definitions literally. Ground truth for the
//! differential test suites; never used on large inputs without `force`.

use thiserror::Error;

use crate::graph::{EdgeId, TemporalGraph, VertexId};
use crate::query::MotifQuery;

/// Refuse graphs past this size unless forced.
pub const DEFAULT_GUARD: usize = 2_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("graph has {n_edges} edges, over the brute-force guard of {guard}; pass force to override")]
    GuardExceeded { n_edges: usize, guard: usize },
}

/// Enumerates every match of `query` in `graph`, sorted lexicographically
/// by edge-index tuple.
pub fn brute_force_mine(
    graph: &TemporalGraph,
    query: &MotifQuery,
    force: bool,
) -> Result<Vec<Vec<EdgeId>>, OracleError> {
    if graph.n_edges() > DEFAULT_GUARD && !force {
        return Err(OracleError::GuardExceeded { n_edges: graph.n_edges(), guard: DEFAULT_GUARD });
    }
    let mut out = Vec::new();
    let mut tuple: Vec<EdgeId> = Vec::with_capacity(query.edges.len());
    let mut mapping: Vec<Option<VertexId>> = vec![None; query.n_motif_vertices()];
    recurse(graph, query, &mut tuple, &mut mapping, &mut out);
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    Ok(out)
}

/// Counting convenience over [`brute_force_mine`].
pub fn brute_force_count(
    graph: &TemporalGraph,
    query: &MotifQuery,
    force: bool,
) -> Result<u64, OracleError> {
    Ok(brute_force_mine(graph, query, force)?.len() as u64)
}

fn recurse(
    graph: &TemporalGraph,
    query: &MotifQuery,
    tuple: &mut Vec<EdgeId>,
    mapping: &mut Vec<Option<VertexId>>,
    out: &mut Vec<Vec<EdgeId>>,
) {
    let level = tuple.len();
    if level == query.edges.len() {
        if final_checks(graph, query, tuple, mapping) {
            out.push(tuple.clone());
        }
        return;
    }
    let me = query.edges[level];
    let start = tuple.last().map_or(0, |&e| e + 1);
    for e in start..graph.n_edges() as EdgeId {
        let edge = graph.edge(e);
        if level > 0 {
            // coarse span; timestamps ascend with the index, so stop here
            if edge.t > graph.time(tuple[0]).saturating_add(query.cg_delta) {
                break;
            }
            // fine gap to the previous real edge, same monotonicity
            if let Some(&bound) = query.fg_delta.get(&(level - 1)) {
                if edge.t - graph.time(tuple[level - 1]) > bound {
                    break;
                }
            }
        }
        // endpoint mapping must stay consistent and injective; pruning on
        // the partial tuple loses nothing because every extension of an
        // inconsistent prefix is inconsistent
        let mut wrote = [None, None];
        let mut ok = true;
        for (i, (motif_v, graph_v)) in [(me.u, edge.src), (me.v, edge.dst)].into_iter().enumerate() {
            match mapping[motif_v] {
                Some(g) => {
                    if g != graph_v {
                        ok = false;
                        break;
                    }
                }
                None => {
                    if mapping.contains(&Some(graph_v)) {
                        ok = false;
                        break;
                    }
                    mapping[motif_v] = Some(graph_v);
                    wrote[i] = Some(motif_v);
                }
            }
        }
        if ok {
            tuple.push(e);
            recurse(graph, query, tuple, mapping, out);
            tuple.pop();
        }
        for w in wrote.into_iter().flatten() {
            mapping[w] = None;
        }
    }
}

fn final_checks(
    graph: &TemporalGraph,
    query: &MotifQuery,
    tuple: &[EdgeId],
    mapping: &[Option<VertexId>],
) -> bool {
    for (&motif_v, &label) in &query.vertex_labels {
        if graph.vertex_label(mapping[motif_v].expect("complete tuple maps all vertices")) != label {
            return false;
        }
    }
    for (me, &e) in query.edges.iter().zip(tuple) {
        if me.label.is_some_and(|l| graph.edge_label(e) != l) {
            return false;
        }
    }
    for a in &query.anti_edges {
        let u = mapping[a.u].unwrap();
        let v = mapping[a.v].unwrap();
        let t_lo = graph.time(tuple[a.attach]);
        let t_hi = t_lo.saturating_add(a.window);
        let witnessed = graph
            .edges()
            .iter()
            .any(|e| e.src == u && e.dst == v && e.t >= t_lo && e.t <= t_hi);
        if witnessed {
            return false;
        }
    }
    true
}
