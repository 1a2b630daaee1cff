//! Parallel execution of a compiled query.
//!
//! Work lives in per-group queues of tasks (root chunks or resumable
//! contexts). Workers drain their group's queue; when starved they first
//! steal a whole sub-partition from the group with the most outstanding
//! work, then ask the busiest running worker to donate sub-trees
//! (answered at iteration boundaries through [`engine::split_context`]),
//! and finally — when the queues are empty but tasks are still running —
//! raise a global abort round: running tasks observe the signal at their
//! next signal-check boundary, keep going for the abort timeout, and dump
//! their context if still unfinished. Dumped contexts are refined and
//! exploded into one task per candidate of their longest remaining
//! window, then re-enter the queue as ordinary tasks.
//!
//! Counts are exact under every combination of workers, chunking,
//! stealing, redistribution, and partitioning: tasks own disjoint
//! sub-trees by construction and results merge as sums.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use crate::engine::{
    explode_context, refine_context, run_task, split_context, CollectSink, CountSink, Directive,
    MatchSink, MatchStats, SchedulerHooks, SearchContext, TaskOutcome,
};
use crate::graph::{EdgeId, TemporalGraph};
use crate::partition::{build_partitions, effective_delta, PartitionSet};
use crate::plan::{compile_plan, MiningPlan};
use crate::query::{MotifQuery, OutputMode};

/// Knobs for the parallel runtime. Defaults follow the engine's tuned
/// values: donate only after 20 iterations, read the abort signal every
/// 1024 iterations, dump 100 ms after observing it, 4096 roots per task.
#[derive(Debug, Clone)]
pub struct SchedulerConfig {
    pub workers: usize,
    pub steal_after_iters: u64,
    pub signal_check_interval: u64,
    pub abort_timeout: Duration,
    /// Test hook: express the abort timeout in iterations instead of wall
    /// time so schedules are reproducible under a virtual clock.
    pub abort_after_iters: Option<u64>,
    pub root_chunk: usize,
    pub max_enumeration: u64,
    pub enable_stealing: bool,
    pub enable_redistribution: bool,
    pub partitions: usize,
    /// Collect the full match set and sort it before truncation.
    pub canonical: bool,
}

impl Default for SchedulerConfig {
    fn default() -> SchedulerConfig {
        SchedulerConfig {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            steal_after_iters: 20,
            signal_check_interval: 1024,
            abort_timeout: Duration::from_millis(100),
            abort_after_iters: None,
            root_chunk: 4096,
            max_enumeration: u64::MAX,
            enable_stealing: true,
            enable_redistribution: true,
            partitions: 1,
            canonical: false,
        }
    }
}

impl SchedulerConfig {
    /// Fills in everything the query's `runtime_params` section pinned.
    pub fn apply_query(mut self, q: &MotifQuery) -> SchedulerConfig {
        let r = &q.runtime;
        if let Some(w) = r.workers {
            self.workers = w.max(1);
        }
        if let Some(p) = r.partitions {
            self.partitions = p.max(1);
        }
        if let Some(v) = r.steal_after {
            self.steal_after_iters = v;
        }
        if let Some(v) = r.signal_interval {
            self.signal_check_interval = v.max(1);
        }
        if let Some(v) = r.abort_timeout_ms {
            self.abort_timeout = Duration::from_millis(v);
        }
        if let Some(v) = r.root_chunk {
            self.root_chunk = v.max(1);
        }
        if let OutputMode::Enumerate { max_matches } = q.output {
            self.max_enumeration = max_matches;
        }
        self
    }
}

/// Aggregated counters for one run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub engine: MatchStats,
    /// Contexts handed to other workers through steal requests.
    pub donations: u64,
    /// Tasks re-enqueued by tail redistribution (continuations included).
    pub respawns: u64,
    pub steal_requests: u64,
    pub subpartition_steals: u64,
    pub tasks_executed: u64,
    pub per_worker_busy: Vec<Duration>,
}

#[derive(Debug, Clone)]
pub enum OutputKind {
    Count(u64),
    Enumerate { matches: Vec<Vec<EdgeId>>, truncated: bool },
}

#[derive(Debug, Clone)]
pub struct MatchOutput {
    pub kind: OutputKind,
    pub stats: RunStats,
    pub wall_time: Duration,
}

impl MatchOutput {
    pub fn count(&self) -> Option<u64> {
        match &self.kind {
            OutputKind::Count(n) => Some(*n),
            OutputKind::Enumerate { .. } => None,
        }
    }

    pub fn matches(&self) -> Option<&[Vec<EdgeId>]> {
        match &self.kind {
            OutputKind::Count(_) => None,
            OutputKind::Enumerate { matches, .. } => Some(matches),
        }
    }

    /// Versioned stats report for `--stats`.
    pub fn to_json(&self, cfg: &SchedulerConfig) -> serde_json::Value {
        let mut v = serde_json::json!({
            "schema_version": 1,
            "wall_ms": self.wall_time.as_secs_f64() * 1e3,
            "workers": cfg.workers,
            "partitions": cfg.partitions,
            "iterations": self.stats.engine.iterations,
            "matches_emitted": self.stats.engine.emitted,
            "binary_searches": self.stats.engine.binary_searches,
            "backtrack_binary_searches": self.stats.engine.backtrack_binary_searches,
            "backtracks": self.stats.engine.backtracks,
            "refinements": self.stats.engine.refinements,
            "donations": self.stats.donations,
            "respawns": self.stats.respawns,
            "steal_requests": self.stats.steal_requests,
            "subpartition_steals": self.stats.subpartition_steals,
            "tasks_executed": self.stats.tasks_executed,
            "per_worker_busy_ms": self.stats.per_worker_busy.iter()
                .map(|d| d.as_secs_f64() * 1e3).collect::<Vec<_>>(),
        });
        match &self.kind {
            OutputKind::Count(n) => {
                v["mode"] = "count".into();
                v["count"] = (*n).into();
            }
            OutputKind::Enumerate { matches, truncated } => {
                v["mode"] = "enumerate".into();
                v["returned"] = matches.len().into();
                v["truncated"] = (*truncated).into();
            }
        }
        v
    }
}

enum Task {
    Roots { lo: EdgeId, hi: EdgeId },
    Resume(Box<SearchContext>),
}

struct QueueState {
    groups: Vec<VecDeque<Task>>,
    in_flight: usize,
    shutdown: bool,
}

/// Padded to a cache line: workers touch their own slot every iteration
/// and sharing a line across workers would serialize them on memory
/// traffic instead of work.
#[repr(align(64))]
struct WorkerFlags {
    steal_request: AtomicBool,
    busy: AtomicBool,
    iters_since_donation: AtomicU64,
}

struct Shared<'a> {
    graph: &'a TemporalGraph,
    plan: &'a MiningPlan,
    cfg: &'a SchedulerConfig,
    queue: Mutex<QueueState>,
    cv: Condvar,
    flags: Vec<WorkerFlags>,
    idle: AtomicUsize,
    abort_epoch: AtomicU64,
    round_active: AtomicBool,
    donations: AtomicU64,
    respawns: AtomicU64,
    steal_requests: AtomicU64,
    subpartition_steals: AtomicU64,
    tasks_executed: AtomicU64,
}

enum DumpDeadline {
    At(Instant),
    AfterIters(u64),
}

/// How many iterations may pass between publishes of a worker's
/// staleness metric (used only to pick steal victims, so coarse is fine).
const PUBLISH_INTERVAL: u64 = 64;

/// Per-task scheduler integration: answers steal requests by splitting
/// the running context and watches the abort signal. All per-iteration
/// state lives here, not in shared memory; the shared flags are only
/// read every iteration and written at a coarse cadence.
struct WorkerHook<'s, 'a> {
    shared: &'s Shared<'a>,
    id: usize,
    group: usize,
    epoch_seen: u64,
    deadline: Option<DumpDeadline>,
    donated_at: u64,
    until_publish: u64,
    until_signal_check: u64,
}

impl<'s, 'a> WorkerHook<'s, 'a> {
    fn new(shared: &'s Shared<'a>, id: usize, group: usize) -> WorkerHook<'s, 'a> {
        WorkerHook {
            shared,
            id,
            group,
            epoch_seen: shared.abort_epoch.load(Ordering::Acquire),
            deadline: None,
            donated_at: 0,
            until_publish: PUBLISH_INTERVAL,
            until_signal_check: shared.cfg.signal_check_interval,
        }
    }
}

impl SchedulerHooks for WorkerHook<'_, '_> {
    fn on_iteration(&mut self, ctx: &mut SearchContext, stats: &mut MatchStats) -> Directive {
        let shared = self.shared;
        let cfg = shared.cfg;
        let flags = &shared.flags[self.id];

        // coarse housekeeping: publish the staleness metric and test an
        // armed dump deadline (a clock read per iteration would cost more
        // than the search step itself)
        self.until_publish -= 1;
        if self.until_publish == 0 {
            self.until_publish = PUBLISH_INTERVAL;
            flags
                .iters_since_donation
                .store(ctx.iter_count - self.donated_at, Ordering::Relaxed);
            if let Some(d) = &self.deadline {
                let expired = match d {
                    DumpDeadline::At(t) => Instant::now() >= *t,
                    DumpDeadline::AfterIters(n) => ctx.iter_count >= *n,
                };
                if expired {
                    self.deadline = None;
                    return Directive::Dump;
                }
            }
        }

        // the steal flag is read every iteration; donation waits out the
        // warm-up threshold so short tasks are never split
        if cfg.enable_stealing
            && flags.steal_request.load(Ordering::Acquire)
            && ctx.iter_count > cfg.steal_after_iters
        {
            let want = shared.idle.load(Ordering::Relaxed).clamp(1, 8);
            let donated = split_context(ctx, shared.plan, want, stats);
            flags.steal_request.store(false, Ordering::Release);
            if !donated.is_empty() {
                self.donated_at = ctx.iter_count;
                flags.iters_since_donation.store(0, Ordering::Relaxed);
                shared.donations.fetch_add(donated.len() as u64, Ordering::Relaxed);
                let mut st = shared.queue.lock().unwrap();
                for d in donated {
                    st.groups[self.group].push_back(Task::Resume(Box::new(d)));
                }
                drop(st);
                shared.cv.notify_all();
            }
        }

        if cfg.enable_redistribution {
            self.until_signal_check -= 1;
            if self.until_signal_check == 0 {
                self.until_signal_check = cfg.signal_check_interval;
                if self.deadline.is_none() {
                    let epoch = shared.abort_epoch.load(Ordering::Acquire);
                    if epoch > self.epoch_seen {
                        self.epoch_seen = epoch;
                        self.deadline = Some(match cfg.abort_after_iters {
                            Some(n) => DumpDeadline::AfterIters(ctx.iter_count.saturating_add(n)),
                            None => DumpDeadline::At(Instant::now() + cfg.abort_timeout),
                        });
                    }
                }
            }
        }
        Directive::Continue
    }
}

/// Waits for a task: own queue first, then a whole sub-partition from the
/// fullest other group, otherwise requests a steal / triggers an abort
/// round and parks briefly.
fn acquire(shared: &Shared, id: usize, group: usize) -> Option<Task> {
    let mut st = shared.queue.lock().unwrap();
    loop {
        if st.shutdown {
            return None;
        }
        if let Some(t) = st.groups[group].pop_front() {
            st.in_flight += 1;
            return Some(t);
        }
        if st.groups.len() > 1 {
            let victim = (0..st.groups.len())
                .filter(|&g| g != group && !st.groups[g].is_empty())
                .max_by_key(|&g| st.groups[g].len());
            if let Some(g) = victim {
                let t = st.groups[g].pop_back().unwrap();
                shared.subpartition_steals.fetch_add(1, Ordering::Relaxed);
                st.in_flight += 1;
                return Some(t);
            }
        }
        if st.in_flight == 0 {
            st.shutdown = true;
            shared.cv.notify_all();
            return None;
        }

        // queues are drained but tasks are still running
        shared.idle.fetch_add(1, Ordering::Relaxed);
        if shared.cfg.enable_stealing {
            let victim = (0..shared.flags.len())
                .filter(|&w| w != id && shared.flags[w].busy.load(Ordering::Relaxed))
                .max_by_key(|&w| shared.flags[w].iters_since_donation.load(Ordering::Relaxed));
            if let Some(w) = victim {
                shared.flags[w].steal_request.store(true, Ordering::Release);
                shared.steal_requests.fetch_add(1, Ordering::Relaxed);
            }
        }
        if shared.cfg.enable_redistribution && !shared.round_active.swap(true, Ordering::AcqRel) {
            shared.abort_epoch.fetch_add(1, Ordering::Release);
        }
        let (guard, _) = shared
            .cv
            .wait_timeout(st, Duration::from_micros(200))
            .unwrap();
        st = guard;
        shared.idle.fetch_sub(1, Ordering::Relaxed);
    }
}

enum WorkerSink {
    Count(CountSink),
    Collect(CollectSink),
}

impl WorkerSink {
    fn new(cfg: &SchedulerConfig, output: OutputMode) -> WorkerSink {
        match output {
            OutputMode::Count => WorkerSink::Count(CountSink::default()),
            OutputMode::Enumerate { max_matches } => {
                // canonical mode needs the full set for a stable order;
                // cap the buffers anyway rather than run out of memory
                let cap = if cfg.canonical {
                    (max_matches as usize).saturating_mul(64).max(1 << 22)
                } else {
                    max_matches.min(usize::MAX as u64) as usize
                };
                WorkerSink::Collect(CollectSink::new(cap))
            }
        }
    }
}

impl MatchSink for WorkerSink {
    fn emit(&mut self, m: &[EdgeId]) {
        match self {
            WorkerSink::Count(s) => s.emit(m),
            WorkerSink::Collect(s) => s.emit(m),
        }
    }
}

struct WorkerResult {
    sink: WorkerSink,
    stats: MatchStats,
    busy: Duration,
}

fn worker(shared: &Shared, id: usize, group: usize, output: OutputMode) -> WorkerResult {
    let mut sink = WorkerSink::new(shared.cfg, output);
    let mut stats = MatchStats::default();
    let mut busy = Duration::ZERO;
    while let Some(task) = acquire(shared, id, group) {
        let started = Instant::now();
        let ctx = match task {
            Task::Roots { lo, hi } => SearchContext::for_root_chunk(shared.plan, lo, hi),
            Task::Resume(b) => *b,
        };
        shared.tasks_executed.fetch_add(1, Ordering::Relaxed);
        shared.flags[id].busy.store(true, Ordering::Relaxed);
        let mut hook = WorkerHook::new(shared, id, group);
        let outcome = run_task(shared.graph, shared.plan, ctx, &mut sink, &mut hook, &mut stats);
        shared.flags[id].busy.store(false, Ordering::Relaxed);
        shared.flags[id].steal_request.store(false, Ordering::Release);
        busy += started.elapsed();

        let spawned: Vec<Task> = match outcome {
            TaskOutcome::Completed => Vec::new(),
            TaskOutcome::Dumped(mut ctx) => {
                refine_context(&mut ctx, shared.graph, shared.plan, &mut stats);
                let (roots, donated) = explode_context(&mut ctx, shared.plan);
                let mut tasks = Vec::with_capacity(donated.len() + 2);
                if let Some((lo, hi)) = roots {
                    tasks.push(Task::Roots { lo, hi });
                }
                tasks.push(Task::Resume(Box::new(ctx)));
                tasks.extend(donated.into_iter().map(|d| Task::Resume(Box::new(d))));
                shared.respawns.fetch_add(tasks.len() as u64, Ordering::Relaxed);
                tasks
            }
        };
        let mut st = shared.queue.lock().unwrap();
        st.in_flight -= 1;
        for t in spawned {
            st.groups[group].push_back(t);
        }
        drop(st);
        // any progress ends the current redistribution round
        shared.round_active.store(false, Ordering::Release);
        shared.cv.notify_all();
    }
    WorkerResult { sink, stats, busy }
}

fn chunked(lo: EdgeId, hi: EdgeId, chunk: usize) -> impl Iterator<Item = Task> {
    let chunk = chunk.max(1) as u64;
    (lo as u64..hi as u64).step_by(chunk as usize).map(move |start| Task::Roots {
        lo: start as EdgeId,
        hi: (start + chunk).min(hi as u64) as EdgeId,
    })
}

/// Sub-partitions each major's root range 16 ways (the group-steal
/// granularity); minors go in whole.
const SUBPARTITIONS_PER_MAJOR: usize = 16;

fn partitioned_queues(pset: &PartitionSet) -> Vec<VecDeque<Task>> {
    let mut groups: Vec<VecDeque<Task>> = (0..pset.majors.len()).map(|_| VecDeque::new()).collect();
    for (g, major) in pset.majors.iter().enumerate() {
        let n = major.n_roots();
        if n > 0 {
            let per = n.div_ceil(SUBPARTITIONS_PER_MAJOR);
            groups[g].extend(chunked(major.root_lo, major.root_hi, per));
        }
        if let Some(minor) = pset.minors.get(g) {
            if minor.n_roots() > 0 {
                groups[g].push_back(Task::Roots { lo: minor.root_lo, hi: minor.root_hi });
            }
        }
    }
    groups
}

fn execute(
    graph: &TemporalGraph,
    plan: &MiningPlan,
    query: &MotifQuery,
    cfg: &SchedulerConfig,
    groups: Vec<VecDeque<Task>>,
) -> MatchOutput {
    let started = Instant::now();
    let n_workers = cfg.workers.max(1);
    let n_groups = groups.len();
    let shared = Shared {
        graph,
        plan,
        cfg,
        queue: Mutex::new(QueueState { groups, in_flight: 0, shutdown: false }),
        cv: Condvar::new(),
        flags: (0..n_workers)
            .map(|_| WorkerFlags {
                steal_request: AtomicBool::new(false),
                busy: AtomicBool::new(false),
                iters_since_donation: AtomicU64::new(0),
            })
            .collect(),
        idle: AtomicUsize::new(0),
        abort_epoch: AtomicU64::new(0),
        round_active: AtomicBool::new(false),
        donations: AtomicU64::new(0),
        respawns: AtomicU64::new(0),
        steal_requests: AtomicU64::new(0),
        subpartition_steals: AtomicU64::new(0),
        tasks_executed: AtomicU64::new(0),
    };

    let results: Vec<WorkerResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n_workers)
            .map(|id| {
                let shared = &shared;
                scope.spawn(move || worker(shared, id, id % n_groups, query.output))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut stats = RunStats {
        donations: shared.donations.load(Ordering::Relaxed),
        respawns: shared.respawns.load(Ordering::Relaxed),
        steal_requests: shared.steal_requests.load(Ordering::Relaxed),
        subpartition_steals: shared.subpartition_steals.load(Ordering::Relaxed),
        tasks_executed: shared.tasks_executed.load(Ordering::Relaxed),
        ..RunStats::default()
    };

    let mut count = 0u64;
    let mut matches: Vec<Vec<EdgeId>> = Vec::new();
    let mut truncated = false;
    for r in results {
        stats.engine.merge(&r.stats);
        stats.per_worker_busy.push(r.busy);
        match r.sink {
            WorkerSink::Count(c) => count += c.0,
            WorkerSink::Collect(c) => {
                truncated |= c.truncated;
                matches.extend(c.matches);
            }
        }
    }

    let kind = match query.output {
        OutputMode::Count => OutputKind::Count(count),
        OutputMode::Enumerate { max_matches } => {
            let max = max_matches.min(usize::MAX as u64) as usize;
            if cfg.canonical {
                matches.sort();
            }
            if matches.len() > max {
                matches.truncate(max);
                truncated = true;
            }
            OutputKind::Enumerate { matches, truncated }
        }
    };
    MatchOutput { kind, stats, wall_time: started.elapsed() }
}

/// Runs a validated query: compiles the plan, lays out the task queues
/// (one group per partition), and executes on `cfg.workers` threads.
pub fn run_query(graph: &TemporalGraph, query: &MotifQuery, cfg: &SchedulerConfig) -> MatchOutput {
    let plan = compile_plan(query);
    if cfg.partitions > 1 {
        let pset = build_partitions(graph, cfg.partitions, effective_delta(query));
        return schedule_partitions(graph, query, &pset, cfg);
    }
    let mut groups = vec![VecDeque::new()];
    groups[0].extend(chunked(0, graph.n_edges() as EdgeId, cfg.root_chunk));
    execute(graph, &plan, query, cfg, groups)
}

/// Runs a query over a prebuilt partition set: one executor group per
/// major partition, idle groups stealing sub-partitions from the fullest
/// queue. Totals are identical to the unpartitioned run.
pub fn schedule_partitions(
    graph: &TemporalGraph,
    query: &MotifQuery,
    pset: &PartitionSet,
    cfg: &SchedulerConfig,
) -> MatchOutput {
    debug_assert!(pset.delta >= effective_delta(query));
    let plan = compile_plan(query);
    let groups = partitioned_queues(pset);
    execute(graph, &plan, query, cfg, groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_text;
    use crate::oracle::brute_force_mine;
    use crate::query::parse_and_validate;

    fn g1() -> TemporalGraph {
        load_text("0 1 10\n1 2 20\n2 0 30\n0 1 40\n1 2 100\n".as_bytes()).unwrap()
    }

    fn g2() -> TemporalGraph {
        load_text("0 1 10\n1 2 20\n0 2 25\n2 0 30\n0 1 40\n1 2 100\n".as_bytes()).unwrap()
    }

    fn triangle() -> MotifQuery {
        parse_and_validate(
            "pattern {\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n edge 2 -> 0 @ 2\n}\nconstraints {\n cg_delta = 30s\n}\n",
        )
        .unwrap()
    }

    fn cfg(workers: usize) -> SchedulerConfig {
        SchedulerConfig { workers, ..SchedulerConfig::default() }
    }

    #[test]
    fn triangle_count_is_worker_invariant() {
        let g = g1();
        let q = triangle();
        for workers in [1, 2, 8] {
            assert_eq!(run_query(&g, &q, &cfg(workers)).count(), Some(2), "workers={workers}");
        }
    }

    #[test]
    fn anti_query_under_parallelism() {
        let g = g2();
        let q = parse_and_validate(
            "pattern {\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n anti 0 -> 2 @ 2 attach=1 window=50s\n}\n\
             constraints {\n cg_delta = 30s\n}\n",
        )
        .unwrap();
        assert_eq!(run_query(&g, &q, &cfg(4)).count(), Some(2));
    }

    #[test]
    fn empty_graph_runs_clean() {
        let g = load_text(std::io::empty()).unwrap();
        assert_eq!(run_query(&g, &triangle(), &cfg(4)).count(), Some(0));
    }

    #[test]
    fn enumerate_canonical_matches_oracle() {
        let g = g1();
        let mut q = triangle();
        q.output = OutputMode::Enumerate { max_matches: 10 };
        let mut c = cfg(4);
        c.canonical = true;
        c.max_enumeration = 10;
        let out = run_query(&g, &q, &c);
        assert_eq!(out.matches().unwrap(), brute_force_mine(&g, &q, false).unwrap());
    }

    #[test]
    fn enumerate_truncation_sets_flag() {
        let g = g1();
        let mut q = parse_and_validate(
            "pattern {\n edge 0 -> 1 @ 0\n}\nconstraints {\n cg_delta = 1s\n}\n",
        )
        .unwrap();
        q.output = OutputMode::Enumerate { max_matches: 2 };
        let mut c = cfg(2);
        c.canonical = true;
        let out = run_query(&g, &q, &c);
        let OutputKind::Enumerate { matches, truncated } = out.kind else { panic!() };
        assert_eq!(matches, vec![vec![0], vec![1]]);
        assert!(truncated);
    }

    #[test]
    fn partitioned_counts_match_unpartitioned() {
        let g = g1();
        let q = triangle();
        let baseline = run_query(&g, &q, &cfg(1)).count();
        for partitions in [2, 3, 4] {
            let mut c = cfg(4);
            c.partitions = partitions;
            assert_eq!(run_query(&g, &q, &c).count(), baseline, "partitions={partitions}");
        }
    }

    #[test]
    fn single_worker_records_no_donations() {
        let g = g2();
        let out = run_query(&g, &triangle(), &cfg(1));
        assert_eq!(out.stats.donations, 0);
        assert_eq!(out.count(), Some(2));
    }

    /// Half of all edges touch one hot vertex; the edges INTO it (the
    /// roots of the huge fan trees) sit at the front of the timeline.
    fn hot_vertex_graph(n_edges: usize, n_hot_roots: usize) -> TemporalGraph {
        let cold = 10_000u64;
        let mut rows = Vec::with_capacity(n_edges);
        let mut s = 0x243f6a8885a308d3u64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        for i in 0..n_edges {
            let t = i as u64;
            if i < 2 * n_hot_roots && i % 2 == 0 {
                rows.push((next() % cold, cold, t));
            } else if i % 2 == 1 {
                rows.push((cold, next() % cold, t));
            } else {
                rows.push((next() % cold, next() % cold, t));
            }
        }
        TemporalGraph::from_rows(rows, None)
    }

    /// Three edges fanning out of motif vertex 1: rooted at an edge into
    /// the hot vertex, every level scans the hot out-list.
    fn fan_motif() -> MotifQuery {
        parse_and_validate(
            "pattern {\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n edge 1 -> 3 @ 2\n edge 1 -> 4 @ 3\n}\n\
             constraints {\n cg_delta = 100s\n}\n",
        )
        .unwrap()
    }

    #[test]
    fn skew_forces_donations() {
        let g = hot_vertex_graph(20_000, 500);
        let q = fan_motif();
        // one giant task, several workers: stealing has to kick in
        let mut c = cfg(8);
        c.root_chunk = g.n_edges();
        c.enable_redistribution = false;
        let out = run_query(&g, &q, &c);
        assert!(out.stats.donations >= 7, "donations = {}", out.stats.donations);

        let serial = run_query(&g, &q, &cfg(1));
        assert_eq!(out.count(), serial.count());
    }

    #[test]
    fn uniform_tiny_tasks_never_donate() {
        let g = g1();
        let q = triangle();
        let mut c = cfg(8);
        c.root_chunk = 1;
        let out = run_query(&g, &q, &c);
        assert_eq!(out.stats.donations, 0);
    }

    #[test]
    fn redistribution_preserves_counts() {
        let g = hot_vertex_graph(20_000, 500);
        let q = fan_motif();
        let mut c = cfg(8);
        c.root_chunk = g.n_edges();
        c.enable_stealing = false;
        // virtual clock: dump 2000 iterations after the signal lands
        c.abort_after_iters = Some(2_000);
        c.signal_check_interval = 256;
        let out = run_query(&g, &q, &c);
        let serial = run_query(&g, &q, &cfg(1));
        assert_eq!(out.count(), serial.count());
        assert!(out.stats.respawns >= 1, "respawns = {}", out.stats.respawns);
    }

    #[test]
    fn subpartition_steal_on_skewed_partitions() {
        // all matches live in the first quarter of the timeline
        let mut text = String::new();
        for i in 0..500usize {
            let t = i as u64;
            text += &format!("{} {} {t}\n", i % 11, (i + 1) % 11);
        }
        for i in 500..2_000usize {
            // later edges all leave distinct sources, no 2-paths among them
            text += &format!("{} {} {}\n", 100 + i, 5_000 + i, i as u64);
        }
        let g = load_text(text.as_bytes()).unwrap();
        let q = parse_and_validate(
            "pattern {\n edge 0 -> 1 @ 0\n edge 1 -> 2 @ 1\n edge 2 -> 3 @ 2\n}\nconstraints {\n cg_delta = 40s\n}\n",
        )
        .unwrap();
        let mut c = cfg(4);
        c.partitions = 4;
        c.root_chunk = 8;
        let out = run_query(&g, &q, &c);
        let serial = run_query(&g, &q, &cfg(1));
        assert_eq!(out.count(), serial.count());
        assert!(out.stats.subpartition_steals >= 1, "steals = {}", out.stats.subpartition_steals);
    }

    #[test]
    fn stats_json_shape() {
        let out = run_query(&g1(), &triangle(), &cfg(2));
        let v = out.to_json(&cfg(2));
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["mode"], "count");
        assert_eq!(v["count"], 2);
        assert!(v["per_worker_busy_ms"].as_array().unwrap().len() == 2);
    }
}
