//! The search core: expands one search tree per root edge in DFS order,
//! driven entirely by the precompiled [`MiningPlan`].
//!
//! Candidate lists are never materialized. A level holds a `(beg, end)`
//! window into one immutable adjacency list (or the global edge list),
//! produced by two binary searches when the level is entered. When the
//! search descends, the remainder of the window stays in place and is
//! resumed verbatim on backtrack, so backtracking performs no binary
//! search at all — the counters in [`MatchStats`] measure this rather
//! than assume it.
//!
//! Contexts are small (O(depth)) and movable between workers at iteration
//! boundaries: [`split_context`] peels single candidate edges off as
//! independently runnable sub-trees, [`refine_context`] re-tightens
//! window ends, and [`explode_context`] turns one long-running context
//! into one task per candidate of its longest remaining window.

use smallvec::{smallvec, SmallVec};

use crate::graph::{EdgeId, TemporalGraph, Time, VertexId};
use crate::plan::{candidate_list_choice, LevelKind, MiningPlan, Selector, SlotRef};
use crate::query::MotifQuery;

const UNMAPPED: VertexId = VertexId::MAX;

/// One level's candidate window: positions `beg..end` into the list named
/// by `selector`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandRange {
    pub selector: Selector,
    pub beg: u32,
    pub end: u32,
}

impl CandRange {
    pub const EMPTY: CandRange = CandRange { selector: Selector::AllEdges, beg: 0, end: 0 };

    pub fn len(&self) -> usize {
        (self.end - self.beg) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.beg >= self.end
    }
}

/// One task's search state. Owned by exactly one worker at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchContext {
    /// Graph vertex per mapping slot; slots beyond the current level's
    /// valid count hold stale values that no check ever reads.
    pub mapping: SmallVec<[VertexId; 8]>,
    /// Matched graph edge per completed real level.
    pub estack: SmallVec<[EdgeId; 8]>,
    /// Current search level.
    pub level: usize,
    /// `ranges[level]` is the active window; entries below are the cached
    /// remainders resumed on backtrack; entries above are dead.
    pub ranges: SmallVec<[CandRange; 8]>,
    /// Root timestamp + coarse delta once the root is matched.
    pub t_limit: Time,
    /// Iterations executed by this task (scheduler thresholds key off it).
    pub iter_count: u64,
}

impl SearchContext {
    /// A fresh task that mines every root in `lo..hi` of the edge list.
    pub fn for_root_chunk(plan: &MiningPlan, lo: EdgeId, hi: EdgeId) -> SearchContext {
        let mut ranges: SmallVec<[CandRange; 8]> = smallvec![CandRange::EMPTY; plan.n_levels()];
        ranges[0] = CandRange { selector: Selector::AllEdges, beg: lo, end: hi };
        SearchContext {
            mapping: smallvec![UNMAPPED; plan.n_motif_vertices],
            estack: SmallVec::new(),
            level: 0,
            ranges,
            t_limit: Time::MAX,
            iter_count: 0,
        }
    }

    /// Remaining candidates across all levels, longest first; used by the
    /// stats report and a few tests.
    pub fn remaining(&self) -> usize {
        self.ranges[..=self.level].iter().map(|r| r.len()).sum()
    }
}

/// Execution counters for one task (merged per worker, then globally).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchStats {
    pub iterations: u64,
    pub emitted: u64,
    pub splits_donated: u64,
    pub refinements: u64,
    pub binary_searches: u64,
    /// Binary searches observed while backtracking; stays zero because
    /// cached windows are resumed as plain context reads.
    pub backtrack_binary_searches: u64,
    pub backtracks: u64,
}

impl MatchStats {
    pub fn merge(&mut self, other: &MatchStats) {
        self.iterations += other.iterations;
        self.emitted += other.emitted;
        self.splits_donated += other.splits_donated;
        self.refinements += other.refinements;
        self.binary_searches += other.binary_searches;
        self.backtrack_binary_searches += other.backtrack_binary_searches;
        self.backtracks += other.backtracks;
    }
}

/// Consumes matches as tuples of graph edge indices, one per real motif
/// edge, in temporal order.
pub trait MatchSink {
    fn emit(&mut self, m: &[EdgeId]);
}

impl<F: FnMut(&[EdgeId])> MatchSink for F {
    fn emit(&mut self, m: &[EdgeId]) {
        self(m)
    }
}

/// Counting sink.
#[derive(Debug, Default)]
pub struct CountSink(pub u64);

impl MatchSink for CountSink {
    fn emit(&mut self, _m: &[EdgeId]) {
        self.0 += 1;
    }
}

/// Bounded collecting sink; sets `truncated` instead of growing past `cap`.
#[derive(Debug)]
pub struct CollectSink {
    pub matches: Vec<Vec<EdgeId>>,
    pub cap: usize,
    pub truncated: bool,
}

impl CollectSink {
    pub fn new(cap: usize) -> CollectSink {
        CollectSink { matches: Vec::new(), cap, truncated: false }
    }
}

impl MatchSink for CollectSink {
    fn emit(&mut self, m: &[EdgeId]) {
        if self.matches.len() < self.cap {
            self.matches.push(m.to_vec());
        } else {
            self.truncated = true;
        }
    }
}

/// What the scheduler tells a running task at an iteration boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directive {
    Continue,
    /// Stop now and hand the context back for redistribution.
    Dump,
}

/// Scheduler integration point, consulted once per search iteration. The
/// hook may split the context (donating sub-trees elsewhere) before
/// answering.
pub trait SchedulerHooks {
    fn on_iteration(&mut self, ctx: &mut SearchContext, stats: &mut MatchStats) -> Directive;
}

/// Serial execution: no stealing, no dumping.
pub struct NoHooks;

impl SchedulerHooks for NoHooks {
    fn on_iteration(&mut self, _ctx: &mut SearchContext, _stats: &mut MatchStats) -> Directive {
        Directive::Continue
    }
}

#[derive(Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)] // a task returns at most one context, by value
pub enum TaskOutcome {
    Completed,
    /// The task was aborted; the context resumes exactly where it stopped.
    Dumped(SearchContext),
}

/// Runs one task (a root chunk or a resumed/donated context) to
/// completion or until the hooks demand a dump.
pub fn run_task(
    graph: &TemporalGraph,
    plan: &MiningPlan,
    mut ctx: SearchContext,
    sink: &mut dyn MatchSink,
    hooks: &mut dyn SchedulerHooks,
    stats: &mut MatchStats,
) -> TaskOutcome {
    loop {
        ctx.iter_count += 1;
        stats.iterations += 1;
        if hooks.on_iteration(&mut ctx, stats) == Directive::Dump {
            return TaskOutcome::Dumped(ctx);
        }
        if plan.levels[ctx.level].kind == LevelKind::AntiEdge {
            if check_anti(&ctx, graph, plan, ctx.level, stats) {
                ctx.level += 1;
                if plan.levels[ctx.level].kind == LevelKind::RealEdge {
                    enter_real_level(&mut ctx, graph, plan, stats);
                } else {
                    ctx.ranges[ctx.level] = CandRange::EMPTY;
                }
            } else if !backtrack(&mut ctx, plan, stats) {
                return TaskOutcome::Completed;
            }
            continue;
        }
        match find_next_match(&mut ctx, graph, plan, stats) {
            Some(e) => {
                bind_new_endpoints(&mut ctx, plan, e, graph);
                if ctx.level == plan.last_real {
                    emit_after_trailing_antis(&mut ctx, graph, plan, e, sink, stats);
                } else {
                    descend(&mut ctx, graph, plan, e, stats);
                }
            }
            None => {
                if !backtrack(&mut ctx, plan, stats) {
                    return TaskOutcome::Completed;
                }
            }
        }
    }
}

/// Mines the single search tree rooted at `root_edge`.
pub fn mine_root(
    graph: &TemporalGraph,
    plan: &MiningPlan,
    root_edge: EdgeId,
    sink: &mut dyn MatchSink,
    hooks: &mut dyn SchedulerHooks,
) -> MatchStats {
    let mut stats = MatchStats::default();
    let ctx = SearchContext::for_root_chunk(plan, root_edge, root_edge + 1);
    run_task(graph, plan, ctx, sink, hooks, &mut stats);
    stats
}

/// Writes the new endpoints of a just-matched edge into their slots.
fn bind_new_endpoints(ctx: &mut SearchContext, plan: &MiningPlan, e: EdgeId, graph: &TemporalGraph) {
    let lp = &plan.levels[ctx.level];
    let edge = graph.edge(e);
    if let SlotRef::New(s) = lp.src_slot {
        ctx.mapping[s] = edge.src;
    }
    if let SlotRef::New(s) = lp.dst_slot {
        ctx.mapping[s] = edge.dst;
    }
}

/// Scans the current level's remaining window for the first edge passing
/// the plan's structural and label checks, advancing `beg` past every
/// examined candidate. Temporal bounds are baked into the window itself.
pub fn find_next_match(
    ctx: &mut SearchContext,
    graph: &TemporalGraph,
    plan: &MiningPlan,
    _stats: &mut MatchStats,
) -> Option<EdgeId> {
    let range = ctx.ranges[ctx.level];
    let list = match range.selector {
        Selector::Out(v) => Some(graph.out_list(v)),
        Selector::In(v) => Some(graph.in_list(v)),
        Selector::AllEdges => None,
    };
    let mut pos = range.beg;
    while pos < range.end {
        let e = match list {
            Some(l) => l[pos as usize],
            None => pos as EdgeId,
        };
        pos += 1;
        if edge_passes_level_checks(graph, plan, ctx.level, &ctx.mapping, e) {
            ctx.ranges[ctx.level].beg = pos;
            return Some(e);
        }
    }
    ctx.ranges[ctx.level].beg = pos;
    None
}

/// Plan-driven structural and label checks for one candidate edge: mapped
/// endpoints must match their slots exactly; new endpoints must differ
/// from every previously mapped slot (and, for a both-new edge, from each
/// other) and satisfy the label expectations.
pub fn edge_passes_level_checks(
    graph: &TemporalGraph,
    plan: &MiningPlan,
    level: usize,
    mapping: &[VertexId],
    e: EdgeId,
) -> bool {
    let lp = &plan.levels[level];
    let edge = graph.edge(e);
    match lp.src_slot {
        SlotRef::Slot(s) => {
            if edge.src != mapping[s] {
                return false;
            }
        }
        SlotRef::New(_) => {
            if lp.neq_src.iter().any(|&s| edge.src == mapping[s]) {
                return false;
            }
            if lp.src_label.is_some_and(|l| graph.vertex_label(edge.src) != l) {
                return false;
            }
        }
    }
    match lp.dst_slot {
        SlotRef::Slot(s) => {
            if edge.dst != mapping[s] {
                return false;
            }
        }
        SlotRef::New(_) => {
            if lp.dst_neq_src && edge.dst == edge.src {
                return false;
            }
            if lp.neq_dst.iter().any(|&s| edge.dst == mapping[s]) {
                return false;
            }
            if lp.dst_label.is_some_and(|l| graph.vertex_label(edge.dst) != l) {
                return false;
            }
        }
    }
    if lp.edge_label.is_some_and(|l| graph.edge_label(e) != l) {
        return false;
    }
    true
}

/// Pushes the matched edge, pins the time limit at level 0, and opens the
/// next level's candidate window.
pub fn descend(
    ctx: &mut SearchContext,
    graph: &TemporalGraph,
    plan: &MiningPlan,
    matched: EdgeId,
    stats: &mut MatchStats,
) {
    if ctx.level == 0 {
        ctx.t_limit = graph.time(matched).saturating_add(plan.cg_delta);
    }
    ctx.estack.push(matched);
    ctx.level += 1;
    if plan.levels[ctx.level].kind == LevelKind::RealEdge {
        enter_real_level(ctx, graph, plan, stats);
    } else {
        ctx.ranges[ctx.level] = CandRange::EMPTY;
    }
}

/// Computes the candidate window for the real level `ctx.level`: the list
/// the plan names, lower-bounded strictly after the last real edge and
/// upper-bounded by the tighter of the coarse and fine windows. These are
/// the only two binary searches a level ever pays.
fn enter_real_level(ctx: &mut SearchContext, graph: &TemporalGraph, plan: &MiningPlan, stats: &mut MatchStats) {
    let lp = &plan.levels[ctx.level];
    debug_assert_eq!(lp.kind, LevelKind::RealEdge);
    let prev = *ctx.estack.last().expect("levels past 0 follow a matched root");
    let t_prev = graph.time(prev);
    let cap = match lp.fg_bound {
        Some(b) => ctx.t_limit.min(t_prev.saturating_add(b)),
        None => ctx.t_limit,
    };
    let chosen = candidate_list_choice(lp, graph, &ctx.mapping);
    stats.binary_searches += 2;
    let (beg, end) = match chosen.selector {
        Selector::Out(v) => {
            let list = graph.out_list(v);
            (graph.lower_bound_after(list, t_prev, prev), graph.upper_bound_within(list, cap))
        }
        Selector::In(v) => {
            let list = graph.in_list(v);
            (graph.lower_bound_after(list, t_prev, prev), graph.upper_bound_within(list, cap))
        }
        Selector::AllEdges => {
            (graph.global_lower_bound_after(t_prev, prev), graph.global_upper_bound_within(cap))
        }
    };
    ctx.ranges[ctx.level] = CandRange {
        selector: chosen.selector,
        beg: beg as u32,
        end: end.max(beg) as u32,
    };
}

/// Absence check for the anti-edge at `level`: no graph edge between the
/// two mapped endpoints may fall inside `[t(attach), t(attach) + window]`.
/// Scans the shorter adjacency list of the two endpoints between
/// binary-searched bounds. Returns true when the branch survives.
pub fn check_anti(
    ctx: &SearchContext,
    graph: &TemporalGraph,
    plan: &MiningPlan,
    level: usize,
    stats: &mut MatchStats,
) -> bool {
    let lp = &plan.levels[level];
    let spec = lp.anti.expect("check_anti called on a real level");
    let u = ctx.mapping[lp.src_slot.index()];
    let v = ctx.mapping[lp.dst_slot.index()];
    let t_lo = graph.time(ctx.estack[spec.attach_pos]);
    let t_hi = t_lo.saturating_add(spec.window);
    let out = graph.out_list(u);
    let inn = graph.in_list(v);
    stats.binary_searches += 2;
    if out.len() <= inn.len() {
        let lo = graph.first_at_or_after(out, t_lo);
        let hi = graph.upper_bound_within(out, t_hi);
        !out[lo..hi].iter().any(|&e| graph.edge(e).dst == v)
    } else {
        let lo = graph.first_at_or_after(inn, t_lo);
        let hi = graph.upper_bound_within(inn, t_hi);
        !inn[lo..hi].iter().any(|&e| graph.edge(e).src == u)
    }
}

/// The last real edge just matched; evaluate any trailing anti levels and
/// emit. The search does not descend: scanning resumes at the same level
/// with the window already advanced.
fn emit_after_trailing_antis(
    ctx: &mut SearchContext,
    graph: &TemporalGraph,
    plan: &MiningPlan,
    e: EdgeId,
    sink: &mut dyn MatchSink,
    stats: &mut MatchStats,
) {
    ctx.estack.push(e);
    let ok = (plan.last_real + 1..plan.n_levels()).all(|l| check_anti(ctx, graph, plan, l, stats));
    if ok {
        sink.emit(&ctx.estack);
        stats.emitted += 1;
    }
    ctx.estack.pop();
}

/// Drops back to the nearest real level below, resuming its cached window
/// as-is. Returns false when the root level itself is exhausted. Any
/// binary search issued here would show up in
/// `backtrack_binary_searches`; none ever is.
pub fn backtrack(ctx: &mut SearchContext, plan: &MiningPlan, stats: &mut MatchStats) -> bool {
    stats.backtracks += 1;
    let searches_before = stats.binary_searches;
    let done = if ctx.level == 0 {
        true
    } else {
        ctx.level = plan.levels[ctx.level].last_real_level;
        ctx.estack.pop();
        if ctx.estack.is_empty() {
            ctx.t_limit = Time::MAX;
        }
        false
    };
    stats.backtrack_binary_searches += stats.binary_searches - searches_before;
    !done
}

/// Builds the donated context that expands exactly the sub-tree rooted at
/// position `pos` of `ctx`'s window at `level`.
fn donate_at(ctx: &SearchContext, plan: &MiningPlan, level: usize, pos: u32) -> SearchContext {
    let estack_len = plan.levels[level].real_index.expect("donations come from real levels");
    let mut ranges: SmallVec<[CandRange; 8]> = smallvec![CandRange::EMPTY; plan.n_levels()];
    ranges[level] = CandRange { selector: ctx.ranges[level].selector, beg: pos, end: pos + 1 };
    SearchContext {
        mapping: ctx.mapping.clone(),
        estack: ctx.estack[..estack_len].into(),
        level,
        ranges,
        t_limit: ctx.t_limit,
        iter_count: 0,
    }
}

/// Donates up to `requested` single-candidate sub-trees. Each donation
/// takes the first remaining candidate of the shallowest real level that
/// still has at least two, so the donor always keeps work at that level
/// and the donated sub-tree is as large as possible (a level-0 candidate
/// roots a whole search tree; a leaf-level candidate would carry almost
/// no work and the queue round-trip would cost more than it moves).
/// Anti levels have no candidates and never donate. Returns an empty
/// vector when nothing is stealable.
pub fn split_context(
    ctx: &mut SearchContext,
    plan: &MiningPlan,
    requested: usize,
    stats: &mut MatchStats,
) -> Vec<SearchContext> {
    let mut donations = Vec::new();
    for _ in 0..requested {
        let Some(level) = (0..=ctx.level)
            .find(|&l| plan.levels[l].kind == LevelKind::RealEdge && ctx.ranges[l].len() >= 2)
        else {
            break;
        };
        let pos = ctx.ranges[level].beg;
        ctx.ranges[level].beg += 1;
        donations.push(donate_at(ctx, plan, level, pos));
        stats.splits_donated += 1;
    }
    donations
}

/// Re-tightens every window's end pointer against the coarse limit and
/// the level's fine bound. A context produced by this engine is already
/// tight, so this is idempotent; it exists for contexts dumped mid-flight
/// whose windows may have gone stale. The root window (level 0) is a set
/// of roots, not a δ-bounded candidate list, and is never trimmed.
pub fn refine_context(
    ctx: &mut SearchContext,
    graph: &TemporalGraph,
    plan: &MiningPlan,
    stats: &mut MatchStats,
) {
    stats.refinements += 1;
    for level in 1..=ctx.level {
        let lp = &plan.levels[level];
        if lp.kind != LevelKind::RealEdge || ctx.ranges[level].is_empty() {
            continue;
        }
        let real_index = lp.real_index.unwrap();
        let t_prev = graph.time(ctx.estack[real_index - 1]);
        let cap = match lp.fg_bound {
            Some(b) => ctx.t_limit.min(t_prev.saturating_add(b)),
            None => ctx.t_limit,
        };
        let range = &mut ctx.ranges[level];
        stats.binary_searches += 1;
        let tight = match range.selector {
            Selector::Out(v) => graph.upper_bound_within(graph.out_list(v), cap),
            Selector::In(v) => graph.upper_bound_within(graph.in_list(v), cap),
            Selector::AllEdges => graph.global_upper_bound_within(cap),
        } as u32;
        range.end = range.end.min(tight).max(range.beg);
    }
}

/// Splits a dumped context into independently runnable tasks, mirroring
/// the redistribution picture: the longest remaining window (among levels
/// past the root) with `n` candidates yields `n` tasks — the refined
/// context keeps the first candidate plus everything else, and each other
/// candidate becomes its own sub-tree. Untouched roots are returned
/// separately so they re-enter the queue as an ordinary root chunk.
pub fn explode_context(
    ctx: &mut SearchContext,
    plan: &MiningPlan,
) -> (Option<(EdgeId, EdgeId)>, Vec<SearchContext>) {
    let root_rest = if ctx.level > 0 && !ctx.ranges[0].is_empty() {
        let r = ctx.ranges[0];
        ctx.ranges[0] = CandRange { selector: Selector::AllEdges, beg: r.beg, end: r.beg };
        Some((r.beg, r.end))
    } else {
        None
    };
    let longest = if ctx.level == 0 {
        None
    } else {
        (1..=ctx.level)
            .filter(|&l| plan.levels[l].kind == LevelKind::RealEdge)
            .max_by_key(|&l| (ctx.ranges[l].len(), l))
    };
    let mut donated = Vec::new();
    if let Some(level) = longest {
        let range = ctx.ranges[level];
        if range.len() >= 2 {
            for pos in range.beg + 1..range.end {
                donated.push(donate_at(ctx, plan, level, pos));
            }
            ctx.ranges[level].end = range.beg + 1;
        }
    }
    (root_rest, donated)
}

/// The constraint a candidate match tuple violates, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Length,
    Order,
    CgDelta,
    FgDelta { gap: usize },
    Structure { level: usize },
    Injectivity { level: usize },
    VertexLabel { motif_vertex: usize },
    EdgeLabel { level: usize },
    AntiEdge { index: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Length => write!(f, "length"),
            Violation::Order => write!(f, "order"),
            Violation::CgDelta => write!(f, "cg_delta"),
            Violation::FgDelta { gap } => write!(f, "fg_delta[{gap}]"),
            Violation::Structure { level } => write!(f, "structure at edge {level}"),
            Violation::Injectivity { level } => write!(f, "injectivity at edge {level}"),
            Violation::VertexLabel { motif_vertex } => write!(f, "vertex_label[{motif_vertex}]"),
            Violation::EdgeLabel { level } => write!(f, "edge_label[{level}]"),
            Violation::AntiEdge { index } => write!(f, "anti_edge[{index}]"),
        }
    }
}

/// Re-validates a candidate tuple against the query definitions alone —
/// no plan, no adjacency indices — and names the first violated
/// constraint. Every match the engine emits must pass this.
pub fn verify_match(graph: &TemporalGraph, query: &MotifQuery, m: &[EdgeId]) -> Result<(), Violation> {
    if m.len() != query.edges.len() {
        return Err(Violation::Length);
    }
    if m.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Violation::Order);
    }
    let span_ok = m.is_empty()
        || graph.time(*m.last().unwrap()) - graph.time(m[0]) <= query.cg_delta;
    if !span_ok {
        return Err(Violation::CgDelta);
    }
    for (&gap, &bound) in &query.fg_delta {
        if gap + 1 < m.len() && graph.time(m[gap + 1]) - graph.time(m[gap]) > bound {
            return Err(Violation::FgDelta { gap });
        }
    }

    let mut mapping = vec![UNMAPPED; query.n_motif_vertices()];
    for (i, (&e, me)) in m.iter().zip(&query.edges).enumerate() {
        let edge = graph.edge(e);
        for (motif_v, graph_v) in [(me.u, edge.src), (me.v, edge.dst)] {
            if mapping[motif_v] == UNMAPPED {
                if mapping.contains(&graph_v) {
                    return Err(Violation::Injectivity { level: i });
                }
                mapping[motif_v] = graph_v;
            } else if mapping[motif_v] != graph_v {
                return Err(Violation::Structure { level: i });
            }
        }
        if me.label.is_some_and(|l| graph.edge_label(e) != l) {
            return Err(Violation::EdgeLabel { level: i });
        }
    }
    for (&motif_v, &label) in &query.vertex_labels {
        if graph.vertex_label(mapping[motif_v]) != label {
            return Err(Violation::VertexLabel { motif_vertex: motif_v });
        }
    }
    for (i, a) in query.anti_edges.iter().enumerate() {
        let (u, v) = (mapping[a.u], mapping[a.v]);
        let t_lo = graph.time(m[a.attach]);
        let t_hi = t_lo.saturating_add(a.window);
        let witness = graph
            .edges()
            .iter()
            .any(|e| e.src == u && e.dst == v && e.t >= t_lo && e.t <= t_hi);
        if witness {
            return Err(Violation::AntiEdge { index: i });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_text;
    use crate::plan::compile_plan;
    use crate::query::parse_and_validate;

    fn g1() -> TemporalGraph {
        load_text("0 1 10\n1 2 20\n2 0 30\n0 1 40\n1 2 100\n".as_bytes()).unwrap()
    }

    fn g2() -> TemporalGraph {
        load_text("0 1 10\n1 2 20\n0 2 25\n2 0 30\n0 1 40\n1 2 100\n".as_bytes()).unwrap()
    }

    fn query(text: &str) -> MotifQuery {
        parse_and_validate(text).unwrap()
    }

    fn triangle(delta: u64) -> MotifQuery {
        query(&format!(
            "pattern {{\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n edge 2 -> 0 @ 2\n}}\nconstraints {{\n cg_delta = {delta}s\n}}\n"
        ))
    }

    fn collect_root(graph: &TemporalGraph, q: &MotifQuery, root: EdgeId) -> Vec<Vec<EdgeId>> {
        let plan = compile_plan(q);
        let mut sink = CollectSink::new(usize::MAX);
        mine_root(graph, &plan, root, &mut sink, &mut NoHooks);
        sink.matches
    }

    fn collect_all(graph: &TemporalGraph, q: &MotifQuery) -> Vec<Vec<EdgeId>> {
        let plan = compile_plan(q);
        let mut sink = CollectSink::new(usize::MAX);
        let ctx = SearchContext::for_root_chunk(&plan, 0, graph.n_edges() as EdgeId);
        let mut stats = MatchStats::default();
        run_task(graph, &plan, ctx, &mut sink, &mut NoHooks, &mut stats);
        sink.matches
    }

    #[test]
    fn triangle_root0_finds_single_match() {
        assert_eq!(collect_root(&g1(), &triangle(30), 0), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn triangle_root3_window_excludes_continuation() {
        assert!(collect_root(&g1(), &triangle(30), 3).is_empty());
    }

    #[test]
    fn single_edge_motif_emits_root() {
        let q = query("pattern {\n edge 0 -> 1 @ 0\n}\nconstraints {\n cg_delta = 1s\n}\n");
        assert_eq!(collect_root(&g1(), &q, 2), vec![vec![2]]);
    }

    #[test]
    fn fine_bound_empties_level() {
        let g = g1();
        let q = query(
            "pattern {\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n edge 2 -> 0 @ 2\n}\n\
             constraints {\n cg_delta = 30s\n fg_delta 0 = 5s\n}\n",
        );
        // gap 10 between edges 0 and 1 exceeds the 5s fine bound
        assert!(collect_root(&g, &q, 0).is_empty());
        let plan = compile_plan(&q);
        let mut ctx = SearchContext::for_root_chunk(&plan, 0, 1);
        let mut stats = MatchStats::default();
        let root = find_next_match(&mut ctx, &g, &plan, &mut stats).unwrap();
        bind_new_endpoints(&mut ctx, &plan, root, &g);
        descend(&mut ctx, &g, &plan, root, &mut stats);
        assert!(ctx.ranges[1].is_empty());
        assert_eq!(find_next_match(&mut ctx, &g, &plan, &mut stats), None);
    }

    #[test]
    fn descend_trace_on_g1() {
        let g = g1();
        let plan = compile_plan(&triangle(30));
        let mut ctx = SearchContext::for_root_chunk(&plan, 0, 1);
        let mut stats = MatchStats::default();
        let root = find_next_match(&mut ctx, &g, &plan, &mut stats).unwrap();
        assert_eq!(root, 0);
        bind_new_endpoints(&mut ctx, &plan, root, &g);
        descend(&mut ctx, &g, &plan, root, &mut stats);
        // remainder of the root chunk is empty by construction
        assert!(ctx.ranges[0].is_empty());
        assert_eq!(ctx.t_limit, 40);
        // out(1) filtered to (t, idx) > (10, 0) and t <= 40: exactly edge 1
        let r = ctx.ranges[1];
        assert_eq!(r.selector, Selector::Out(1));
        assert_eq!(r.len(), 1);
        assert_eq!(g.out_list(1)[r.beg as usize], 1);
    }

    #[test]
    fn window_cap_excludes_late_edges() {
        let g = g1();
        let plan = compile_plan(&triangle(30));
        let mut ctx = SearchContext::for_root_chunk(&plan, 3, 4);
        let mut stats = MatchStats::default();
        let root = find_next_match(&mut ctx, &g, &plan, &mut stats).unwrap();
        assert_eq!(root, 3);
        bind_new_endpoints(&mut ctx, &plan, root, &g);
        descend(&mut ctx, &g, &plan, root, &mut stats);
        // out(1) within t <= 70: edge 4 at t=100 is excluded
        assert!(ctx.ranges[1].is_empty());
    }

    #[test]
    fn backtrack_resumes_saved_range_without_searching() {
        let g = g1();
        // δ=90 so the level-1 window after root 0 holds both out-edges of 1
        let plan = compile_plan(&triangle(90));
        let mut ctx = SearchContext::for_root_chunk(&plan, 0, 1);
        let mut stats = MatchStats::default();
        let root = find_next_match(&mut ctx, &g, &plan, &mut stats).unwrap();
        bind_new_endpoints(&mut ctx, &plan, root, &g);
        descend(&mut ctx, &g, &plan, root, &mut stats);
        assert_eq!(ctx.ranges[1].len(), 2);
        let e1 = find_next_match(&mut ctx, &g, &plan, &mut stats).unwrap();
        assert_eq!(e1, 1);
        bind_new_endpoints(&mut ctx, &plan, e1, &g);
        descend(&mut ctx, &g, &plan, e1, &mut stats);
        assert_eq!(ctx.level, 2);
        // exhaust level 2 then backtrack: the level-1 remainder (edge 4) is
        // resumed from the cache
        let searches = stats.binary_searches;
        while find_next_match(&mut ctx, &g, &plan, &mut stats).is_some() {}
        assert!(backtrack(&mut ctx, &plan, &mut stats));
        assert_eq!(ctx.level, 1);
        assert_eq!(stats.binary_searches, searches);
        assert_eq!(stats.backtrack_binary_searches, 0);
        let e4 = find_next_match(&mut ctx, &g, &plan, &mut stats).unwrap();
        assert_eq!(e4, 4);
    }

    #[test]
    fn single_edge_backtrack_is_done() {
        let plan = compile_plan(&query(
            "pattern {\n edge 0 -> 1 @ 0\n}\nconstraints {\n cg_delta = 1s\n}\n",
        ));
        let mut ctx = SearchContext::for_root_chunk(&plan, 0, 0);
        let mut stats = MatchStats::default();
        assert!(!backtrack(&mut ctx, &plan, &mut stats));
    }

    fn anti_2path(window: u64) -> MotifQuery {
        query(&format!(
            "pattern {{\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n anti 0 -> 2 @ 2 attach=1 window={window}s\n}}\n\
             constraints {{\n cg_delta = 30s\n}}\n"
        ))
    }

    #[test]
    fn anti_edge_kills_witnessed_branch() {
        let g = g2();
        // matches of the bare 2-path: (0,1), (1,3), (4,5 is out of window)...
        let matched = collect_all(&g, &anti_2path(50));
        // (0,1) is killed by (0,2,25) inside [20,70]; (1,3) and (3,4) survive
        assert_eq!(matched, vec![vec![1, 3], vec![3, 4]]);
    }

    #[test]
    fn zero_window_anti_needs_exact_hit() {
        let g = g2();
        let matched = collect_all(&g, &anti_2path(0));
        // window [t_attach, t_attach]: no edge (0,2) at exactly t=20
        assert!(matched.contains(&vec![0, 1]));
    }

    #[test]
    fn consecutive_anti_levels() {
        // two anti-edges back to back in the middle of the motif
        let g = g2();
        let q = query(
            "pattern {\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n anti 0 -> 2 @ 2 attach=1 window=50s\n \
             anti 2 -> 1 @ 3 attach=0 window=100s\n edge 2 -> 0 @ 4\n}\n\
             constraints {\n cg_delta = 30s\n}\n",
        );
        let got = collect_all(&g, &q);
        for m in &got {
            assert_eq!(verify_match(&g, &q, m), Ok(()));
        }
        // triangle matches of g2 sans anti: (0,1,3) and (1,3,4).
        // (0,1,3): anti (0->2) in [20,70] witnessed by edge 2 -> killed.
        // (1,3,4): anti (0->2) is mapping (1->0): no such edge; anti
        // (2->1) is mapping (0->2): edge 2 at t=25 in [20,120] -> killed.
        assert!(got.is_empty(), "{got:?}");
    }

    #[test]
    fn trailing_anti_after_last_real_edge() {
        // same pattern but the anti is checked after the final real edge
        let g = g2();
        let q = query(
            "pattern {\n edge 0 -> 1 @ 0\n anti 0 -> 2 @ 2 attach=0 window=50s\n edge 1 -> 2 @ 1\n}\n\
             constraints {\n cg_delta = 30s\n}\n",
        );
        // anti ordered after... parse sorts by order: anti at order 2 is last.
        let matched = collect_all(&g, &q);
        // anchor is edge 0 of the match: (0,1): window [10,60] contains (0,2,25) -> killed
        assert_eq!(matched, vec![vec![1, 3], vec![3, 4]]);
    }

    #[test]
    fn disconnected_motif_scans_all_edges() {
        let g = load_text("0 1 10\n2 3 15\n4 5 40\n".as_bytes()).unwrap();
        let q = query(
            "pattern {\n edge 0 -> 1 @ 0\n edge 2 -> 3 @ 1\n}\nconstraints {\n cg_delta = 30s\n}\n\
             runtime_params {\n allow_disconnected = true\n}\n",
        );
        let got = collect_all(&g, &q);
        // pairs with four distinct endpoints within the window
        assert_eq!(got, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        let expected = crate::oracle::brute_force_mine(&g, &q, false).unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn verify_match_examples() {
        let g = g1();
        let q = triangle(30);
        assert_eq!(verify_match(&g, &q, &[0, 1, 2]), Ok(()));
        // span 10..100 exceeds δ=30
        assert_eq!(verify_match(&g, &q, &[0, 1, 4]), Err(Violation::CgDelta));
        let mut q2 = q.clone();
        q2.cg_delta = 1000;
        q2.fg_delta.insert(0, 5);
        assert_eq!(verify_match(&g, &q2, &[0, 1, 2]), Err(Violation::FgDelta { gap: 0 }));
        let mut q3 = q.clone();
        q3.cg_delta = 1000;
        // (0,1),(1,2),(0,1): motif vertex 2 is pinned to graph vertex 2
        assert_eq!(verify_match(&g, &q3, &[0, 1, 3]), Err(Violation::Structure { level: 2 }));
        // a 3-path cannot close back onto vertex 0
        let path = query(
            "pattern {\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n edge 2 -> 3 @ 2\n}\nconstraints {\n cg_delta = 30s\n}\n",
        );
        assert_eq!(verify_match(&g, &path, &[0, 1, 2]), Err(Violation::Injectivity { level: 2 }));
        assert_eq!(verify_match(&g, &q, &[0, 1]), Err(Violation::Length));
        assert_eq!(verify_match(&g, &q, &[1, 1, 2]), Err(Violation::Order));
    }

    #[test]
    fn emitted_matches_pass_verify() {
        let g = g2();
        for q in [triangle(30), anti_2path(50), anti_2path(0)] {
            for m in collect_all(&g, &q) {
                assert_eq!(verify_match(&g, &q, &m), Ok(()), "query {q:?} match {m:?}");
            }
        }
    }

    #[test]
    fn split_peels_shallowest_level_first() {
        let g = g1();
        let plan = compile_plan(&triangle(90));
        let mut stats = MatchStats::default();
        // root chunk [0, 4): take root 0, descend; level-1 window has 2 edges
        let mut ctx = SearchContext::for_root_chunk(&plan, 0, 4);
        let root = find_next_match(&mut ctx, &g, &plan, &mut stats).unwrap();
        bind_new_endpoints(&mut ctx, &plan, root, &g);
        descend(&mut ctx, &g, &plan, root, &mut stats);
        assert_eq!(ctx.ranges[0].len(), 3);
        assert_eq!(ctx.ranges[1].len(), 2);

        let donations = split_context(&mut ctx, &plan, 3, &mut stats);
        assert_eq!(donations.len(), 3);
        // whole root sub-trees go first; once the root window is down to
        // one candidate the donation comes from level 1
        assert_eq!(donations[0].level, 0);
        assert_eq!(donations[0].ranges[0].len(), 1);
        assert!(donations[0].estack.is_empty());
        assert_eq!(donations[1].level, 0);
        assert_eq!(donations[2].level, 1);
        assert_eq!(donations[2].ranges[1].len(), 1);
        assert_eq!(donations[2].estack.as_slice(), &[0]);
        assert_eq!(ctx.ranges[0].len(), 1);
        assert_eq!(ctx.ranges[1].len(), 1);
        assert_eq!(stats.splits_donated, 3);

        // nothing stealable once every level is down to one candidate
        let mut lone = SearchContext::for_root_chunk(&plan, 0, 1);
        assert!(split_context(&mut lone, &plan, 4, &mut stats).is_empty());
    }

    #[test]
    fn split_preserves_match_multiset() {
        let g = g2();
        for q in [triangle(90), anti_2path(50)] {
            let plan = compile_plan(&q);
            let mut expected = collect_all(&g, &q);

            let ctx = SearchContext::for_root_chunk(&plan, 0, g.n_edges() as EdgeId);
            let mut stats = MatchStats::default();
            // run a few iterations, then split as hard as possible
            for _ in 0..3 {
                struct StopAfter(u64);
                impl SchedulerHooks for StopAfter {
                    fn on_iteration(&mut self, ctx: &mut SearchContext, _s: &mut MatchStats) -> Directive {
                        if ctx.iter_count >= self.0 {
                            Directive::Dump
                        } else {
                            Directive::Continue
                        }
                    }
                }
                let mut sink = CollectSink::new(usize::MAX);
                let outcome =
                    run_task(&g, &plan, ctx.clone(), &mut sink, &mut StopAfter(2), &mut stats);
                if let TaskOutcome::Dumped(mut dumped) = outcome {
                    let mut got = sink.matches;
                    let donations = split_context(&mut dumped, &plan, 8, &mut stats);
                    for d in std::iter::once(dumped).chain(donations) {
                        let mut s = CollectSink::new(usize::MAX);
                        run_task(&g, &plan, d, &mut s, &mut NoHooks, &mut stats);
                        got.extend(s.matches);
                    }
                    got.sort();
                    expected.sort();
                    assert_eq!(got, expected);
                }
            }
        }
    }

    #[test]
    fn refine_is_idempotent_and_tightens_stale_ends() {
        let g = g1();
        let plan = compile_plan(&triangle(30));
        let mut stats = MatchStats::default();
        let mut ctx = SearchContext::for_root_chunk(&plan, 0, 4);
        let root = find_next_match(&mut ctx, &g, &plan, &mut stats).unwrap();
        bind_new_endpoints(&mut ctx, &plan, root, &g);
        descend(&mut ctx, &g, &plan, root, &mut stats);
        // engine-produced windows are already tight
        let before = ctx.clone();
        refine_context(&mut ctx, &g, &plan, &mut stats);
        assert_eq!(ctx, before);

        // hand-loosen the end pointer past the δ window and refine again
        let tight_end = ctx.ranges[1].end;
        ctx.ranges[1].end = g.out_list(1).len() as u32;
        refine_context(&mut ctx, &g, &plan, &mut stats);
        assert_eq!(ctx.ranges[1].end, tight_end);
        let refined_once = ctx.clone();
        refine_context(&mut ctx, &g, &plan, &mut stats);
        assert_eq!(ctx, refined_once);
        // level 0 (the root set) is never trimmed
        assert_eq!(ctx.ranges[0].len(), 3);
    }

    #[test]
    fn explode_redistribution_shapes() {
        // refined context with one leftover candidate at level 1 and a
        // three-candidate window at level 2: redistribution forms three
        // trees — {leftover + first} and one tree per remaining candidate
        let g = load_text(
            "0 1 10\n1 2 20\n1 2 21\n2 3 30\n2 3 31\n2 3 32\n".as_bytes(),
        )
        .unwrap();
        let q = query(
            "pattern {\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n edge 2 -> 3 @ 2\n}\n\
             constraints {\n cg_delta = 100s\n}\n",
        );
        let plan = compile_plan(&q);
        let mut stats = MatchStats::default();
        let mut ctx = SearchContext::for_root_chunk(&plan, 0, 1);
        for _ in 0..2 {
            let e = find_next_match(&mut ctx, &g, &plan, &mut stats).unwrap();
            bind_new_endpoints(&mut ctx, &plan, e, &g);
            descend(&mut ctx, &g, &plan, e, &mut stats);
        }
        assert_eq!(ctx.level, 2);
        assert_eq!(ctx.ranges[1].len(), 1); // the (1,2,21) alternative
        assert_eq!(ctx.ranges[2].len(), 3);

        let mut expected: Vec<_> = {
            let mut s = CollectSink::new(usize::MAX);
            run_task(&g, &plan, ctx.clone(), &mut s, &mut NoHooks, &mut stats);
            s.matches
        };

        let (roots, tasks) = explode_context(&mut ctx, &plan);
        assert_eq!(roots, None);
        // continuation keeps the level-1 leftover plus the first level-2
        // candidate; the other two candidates become their own trees
        assert_eq!(tasks.len(), 2);
        assert_eq!(ctx.ranges[1].len(), 1);
        assert_eq!(ctx.ranges[2].len(), 1);
        assert!(tasks.iter().all(|t| t.level == 2 && t.ranges[2].len() == 1));
        let mut got = Vec::new();
        for t in std::iter::once(ctx).chain(tasks) {
            let mut s = CollectSink::new(usize::MAX);
            run_task(&g, &plan, t, &mut s, &mut NoHooks, &mut stats);
            got.extend(s.matches);
        }
        got.sort();
        expected.sort();
        assert_eq!(got, expected);
    }
}
