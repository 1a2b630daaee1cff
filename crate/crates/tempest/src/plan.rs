//! Query compilation: turns a validated [`MotifQuery`] into a
//! [`MiningPlan`], a read-only per-level table the search core executes
//! without re-deriving anything from the motif at runtime.
//!
//! Each search-tree level records where its candidate edges come from,
//! which mapping slots the new endpoints must differ from, how many slots
//! are valid on entry (backtracking restores validity by construction, so
//! there is no reverse vertex map and no rollback bookkeeping), the fine
//! window bound, and anti-edge descriptors.

use smallvec::SmallVec;

use crate::graph::{Label, TemporalGraph, Time, VertexId};
use crate::query::{MotifQuery, OutputMode};

/// Where an endpoint of a level's edge comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRef {
    /// Endpoint is already mapped; compare against this slot.
    Slot(usize),
    /// Endpoint is new; a matching edge writes it into this slot.
    New(usize),
}

impl SlotRef {
    pub fn is_new(&self) -> bool {
        matches!(self, SlotRef::New(_))
    }

    pub fn index(&self) -> usize {
        match *self {
            SlotRef::Slot(i) | SlotRef::New(i) => i,
        }
    }
}

/// Statically-known candidate list for a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSource {
    /// Out-list of the vertex in `slot`.
    OutOf(usize),
    /// In-list of the vertex in `slot`.
    InOf(usize),
    /// Both endpoints mapped; the shorter of out/in is chosen at runtime.
    BothMapped { out_slot: usize, in_slot: usize },
    /// The whole edge list (level 0 roots, or a disconnected motif edge).
    AllEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    RealEdge,
    AntiEdge,
}

/// Anti-edge checking data: scan for a graph edge between the two mapped
/// endpoints inside `[t(attach), t(attach) + window]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntiSpec {
    /// Level of the real edge the window is anchored to.
    pub attach_level: usize,
    /// Position of that edge in the matched-edge stack.
    pub attach_pos: usize,
    pub window: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPlan {
    pub kind: LevelKind,
    pub src_slot: SlotRef,
    pub dst_slot: SlotRef,
    pub candidate_source: CandidateSource,
    /// Slots a new source vertex must differ from (empty when src is mapped).
    pub neq_src: SmallVec<[usize; 4]>,
    /// Slots a new destination vertex must differ from.
    pub neq_dst: SmallVec<[usize; 4]>,
    /// Both endpoints new: the destination must also differ from the
    /// source written by the same edge.
    pub dst_neq_src: bool,
    /// Mapping slots valid on entry to this level.
    pub n_valid_slots_before: usize,
    /// Fine window: bound on `t(e) - t(last real edge)`.
    pub fg_bound: Option<Time>,
    /// Nearest preceding real level (meaningful for levels > 0); backtrack
    /// and fine-window anchoring both resolve through this.
    pub last_real_level: usize,
    /// Index among real edges, for real levels.
    pub real_index: Option<usize>,
    pub anti: Option<AntiSpec>,
    /// Label expectation on a newly mapped source vertex.
    pub src_label: Option<Label>,
    /// Label expectation on a newly mapped destination vertex.
    pub dst_label: Option<Label>,
    pub edge_label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiningPlan {
    pub levels: Vec<LevelPlan>,
    pub n_motif_vertices: usize,
    pub n_real_edges: usize,
    pub cg_delta: Time,
    pub output: OutputMode,
    /// Deepest real level; levels beyond it are trailing anti-edges that
    /// are checked in place when the last real edge matches.
    pub last_real: usize,
}

impl MiningPlan {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }
}

/// Compiles a validated query. Slots are assigned to motif vertices in
/// order of first appearance along the temporal edge order, so the mapping
/// array is append-only down a search path and backtracking never has to
/// undo it.
pub fn compile_plan(q: &MotifQuery) -> MiningPlan {
    let n_levels = q.n_levels();
    let n_motif_vertices = q.n_motif_vertices();
    let mut slot_of: Vec<Option<usize>> = vec![None; n_motif_vertices];
    let mut n_slots = 0usize;
    let mut levels = Vec::with_capacity(n_levels);
    let mut last_real = 0usize;
    let mut real_index = 0usize;

    let mut edges = q.edges.iter().peekable();
    let mut antis = q.anti_edges.iter().peekable();
    for level in 0..n_levels {
        let prev_real = last_real;
        if edges.peek().is_some_and(|e| e.order == level) {
            let e = edges.next().unwrap();
            let n_valid = n_slots;
            let all_prior = || (0..n_valid).collect::<SmallVec<[usize; 4]>>();

            let (src_slot, neq_src) = match slot_of[e.u] {
                Some(s) => (SlotRef::Slot(s), SmallVec::new()),
                None => {
                    let s = n_slots;
                    n_slots += 1;
                    slot_of[e.u] = Some(s);
                    (SlotRef::New(s), all_prior())
                }
            };
            let (dst_slot, neq_dst) = match slot_of[e.v] {
                Some(s) => (SlotRef::Slot(s), SmallVec::new()),
                None => {
                    let s = n_slots;
                    n_slots += 1;
                    slot_of[e.v] = Some(s);
                    (SlotRef::New(s), all_prior())
                }
            };
            let candidate_source = match (src_slot, dst_slot) {
                (SlotRef::Slot(su), SlotRef::Slot(sv)) => {
                    CandidateSource::BothMapped { out_slot: su, in_slot: sv }
                }
                (SlotRef::Slot(su), SlotRef::New(_)) => CandidateSource::OutOf(su),
                (SlotRef::New(_), SlotRef::Slot(sv)) => CandidateSource::InOf(sv),
                (SlotRef::New(_), SlotRef::New(_)) => CandidateSource::AllEdges,
            };
            levels.push(LevelPlan {
                kind: LevelKind::RealEdge,
                src_slot,
                dst_slot,
                candidate_source,
                neq_src,
                neq_dst,
                dst_neq_src: src_slot.is_new() && dst_slot.is_new(),
                n_valid_slots_before: n_valid,
                fg_bound: if real_index > 0 { q.fg_delta.get(&(real_index - 1)).copied() } else { None },
                last_real_level: prev_real,
                real_index: Some(real_index),
                anti: None,
                src_label: src_slot.is_new().then(|| q.vertex_labels.get(&e.u).copied()).flatten(),
                dst_label: dst_slot.is_new().then(|| q.vertex_labels.get(&e.v).copied()).flatten(),
                edge_label: e.label,
            });
            last_real = level;
            real_index += 1;
        } else {
            let a = antis.next().expect("orders are dense over edges and anti-edges");
            debug_assert_eq!(a.order, level);
            let attached = &q.edges[a.attach];
            levels.push(LevelPlan {
                kind: LevelKind::AntiEdge,
                src_slot: SlotRef::Slot(slot_of[a.u].expect("validated: endpoint mapped earlier")),
                dst_slot: SlotRef::Slot(slot_of[a.v].expect("validated: endpoint mapped earlier")),
                candidate_source: CandidateSource::BothMapped {
                    out_slot: slot_of[a.u].unwrap(),
                    in_slot: slot_of[a.v].unwrap(),
                },
                neq_src: SmallVec::new(),
                neq_dst: SmallVec::new(),
                dst_neq_src: false,
                n_valid_slots_before: n_slots,
                fg_bound: None,
                last_real_level: prev_real,
                real_index: None,
                anti: Some(AntiSpec {
                    attach_level: attached.order,
                    attach_pos: a.attach,
                    window: a.window,
                }),
                src_label: None,
                dst_label: None,
                edge_label: None,
            });
        }
    }

    debug_assert_eq!(n_slots, n_motif_vertices);
    MiningPlan {
        levels,
        n_motif_vertices,
        n_real_edges: q.edges.len(),
        cg_delta: q.cg_delta,
        output: q.output,
        last_real,
    }
}

/// The concrete list a level scans, resolved against a partial mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Out(VertexId),
    In(VertexId),
    AllEdges,
}

/// A resolved candidate list plus the equality check a both-mapped level
/// enforces on the endpoint the list does not fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChosenList {
    pub selector: Selector,
    pub eq_src: Option<VertexId>,
    pub eq_dst: Option<VertexId>,
}

/// Picks the concrete candidate list for a level. For both-mapped levels
/// the shorter of `out(u)` / `in(v)` wins (ties go to `in(v)`), with the
/// opposite endpoint enforced via an equality check.
pub fn candidate_list_choice(
    level: &LevelPlan,
    graph: &TemporalGraph,
    mapping: &[VertexId],
) -> ChosenList {
    match level.candidate_source {
        CandidateSource::OutOf(slot) => ChosenList {
            selector: Selector::Out(mapping[slot]),
            eq_src: None,
            eq_dst: None,
        },
        CandidateSource::InOf(slot) => ChosenList {
            selector: Selector::In(mapping[slot]),
            eq_src: None,
            eq_dst: None,
        },
        CandidateSource::BothMapped { out_slot, in_slot } => {
            let u = mapping[out_slot];
            let v = mapping[in_slot];
            if graph.out_list(u).len() < graph.in_list(v).len() {
                ChosenList { selector: Selector::Out(u), eq_src: None, eq_dst: Some(v) }
            } else {
                ChosenList { selector: Selector::In(v), eq_src: Some(u), eq_dst: None }
            }
        }
        CandidateSource::AllEdges => {
            ChosenList { selector: Selector::AllEdges, eq_src: None, eq_dst: None }
        }
    }
}

/// Human-readable per-level table for `tempest plan`.
pub fn render_plan(plan: &MiningPlan) -> String {
    let mut out = format!(
        "levels: {}  real edges: {}  motif vertices: {}  cg_delta: {}\n",
        plan.n_levels(),
        plan.n_real_edges,
        plan.n_motif_vertices,
        plan.cg_delta
    );
    for (i, l) in plan.levels.iter().enumerate() {
        let kind = match l.kind {
            LevelKind::RealEdge => "real",
            LevelKind::AntiEdge => "anti",
        };
        let slot = |s: SlotRef| match s {
            SlotRef::Slot(i) => format!("m{i}"),
            SlotRef::New(i) => format!("new->m{i}"),
        };
        let source = match l.candidate_source {
            CandidateSource::OutOf(s) => format!("out(m{s})"),
            CandidateSource::InOf(s) => format!("in(m{s})"),
            CandidateSource::BothMapped { out_slot, in_slot } => {
                format!("shorter(out(m{out_slot}), in(m{in_slot}))")
            }
            CandidateSource::AllEdges => "all-edges".into(),
        };
        out += &format!(
            "  level {i}: {kind}  src={} dst={}  candidates={}  valid-slots={}",
            slot(l.src_slot),
            slot(l.dst_slot),
            source,
            l.n_valid_slots_before
        );
        if !l.neq_src.is_empty() {
            out += &format!("  src!={:?}", l.neq_src.as_slice());
        }
        if !l.neq_dst.is_empty() {
            out += &format!("  dst!={:?}", l.neq_dst.as_slice());
        }
        if l.dst_neq_src {
            out += "  dst!=src";
        }
        if let Some(b) = l.fg_bound {
            out += &format!("  fg<={b}");
        }
        if i > 0 {
            out += &format!("  last-real={}", l.last_real_level);
        }
        if let Some(a) = l.anti {
            out += &format!("  window=[t(level {}), +{}]", a.attach_level, a.window);
        }
        if let Some(lbl) = l.src_label {
            out += &format!("  src-label={lbl}");
        }
        if let Some(lbl) = l.dst_label {
            out += &format!("  dst-label={lbl}");
        }
        if let Some(lbl) = l.edge_label {
            out += &format!("  edge-label={lbl}");
        }
        out.push('\n');
    }
    out
}
