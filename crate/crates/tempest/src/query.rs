//! User-defined motif queries: a pattern (real edges and anti-edges with a
//! temporal order), a coarse window, optional per-gap fine windows, label
//! predicates, and runtime parameters.
//!
//! The text form is a sectioned key-value document:
//!
//! ```text
//! pattern {
//!   edge 0 -> 1 @ 0
//!   edge 1 -> 2 @ 1
//!   anti 2 -> 0 @ 2 attach=1 window=50s
//! }
//! constraints {
//!   cg_delta = 30s
//!   fg_delta 0 = 10s
//!   vertex_label 0 = 1
//! }
//! runtime_params {
//!   enumerate = false
//! }
//! ```
//!
//! Durations require a unit suffix (`s`, `m`, `h`, `d`); `s` is the
//! dataset's base time unit. The same structure is accepted as JSON with
//! durations as plain integers in base units.

use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::graph::{Label, Time};

/// Motif-local vertex id, dense in `[0, n_motif_vertices)`.
pub type MotifVertex = usize;

/// A real motif edge at a temporal position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MotifEdge {
    pub u: MotifVertex,
    pub v: MotifVertex,
    /// 0-based temporal position, dense over real edges and anti-edges combined.
    pub order: usize,
    pub label: Option<Label>,
}

/// An exclusion constraint: no graph edge `u -> v` may exist with a
/// timestamp inside `[t_attach, t_attach + window]`, where `t_attach` is
/// the timestamp matched by the attached real edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntiEdge {
    pub u: MotifVertex,
    pub v: MotifVertex,
    /// Index into [`MotifQuery::edges`] of the real edge this is anchored to.
    pub attach: usize,
    pub window: Time,
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    Count,
    Enumerate { max_matches: u64 },
}

/// Scheduler knobs carried by the query file; `None` means "use the
/// engine default or the CLI override".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuntimeParams {
    pub workers: Option<usize>,
    pub partitions: Option<usize>,
    pub allow_disconnected: bool,
    pub steal_after: Option<u64>,
    pub signal_interval: Option<u64>,
    pub abort_timeout_ms: Option<u64>,
    pub root_chunk: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotifQuery {
    /// Real edges, ascending by `order`.
    pub edges: Vec<MotifEdge>,
    /// Anti-edges, ascending by `order`.
    pub anti_edges: Vec<AntiEdge>,
    /// Coarse window: last matched timestamp minus root timestamp is at most this.
    pub cg_delta: Time,
    /// Fine windows keyed by gap index `i`: bound on `t(real i+1) - t(real i)`.
    pub fg_delta: BTreeMap<usize, Time>,
    pub vertex_labels: BTreeMap<MotifVertex, Label>,
    pub output: OutputMode,
    pub in_graph: Option<String>,
    pub runtime: RuntimeParams,
}

impl MotifQuery {
    pub fn n_motif_vertices(&self) -> usize {
        self.edges
            .iter()
            .flat_map(|e| [e.u, e.v])
            .chain(self.anti_edges.iter().flat_map(|a| [a.u, a.v]))
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn n_levels(&self) -> usize {
        self.edges.len() + self.anti_edges.len()
    }

    /// Largest anti-edge window, used to widen partition closure bounds.
    pub fn max_anti_window(&self) -> Time {
        self.anti_edges.iter().map(|a| a.window).max().unwrap_or(0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, col {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// One violated query invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic(pub String);

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("invalid query:\n{}", .0.iter().map(|d| format!("  - {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("bad json query: {0}")]
    Json(#[from] serde_json::Error),
}

/// Parses a duration like `90s`, `15m`, `2h`, `1d`. The suffix is
/// mandatory; a bare number is ambiguous between units and rejected.
pub fn parse_duration(s: &str) -> Result<Time, String> {
    let (num, mult) = match s.chars().last() {
        Some('s') => (&s[..s.len() - 1], 1),
        Some('m') => (&s[..s.len() - 1], 60),
        Some('h') => (&s[..s.len() - 1], 3600),
        Some('d') => (&s[..s.len() - 1], 86400),
        Some(c) if c.is_ascii_digit() => {
            return Err(format!("duration {s:?} has no unit suffix (s/m/h/d); bare numbers are ambiguous"))
        }
        _ => return Err(format!("bad duration {s:?}")),
    };
    let n: Time = num.parse().map_err(|_| format!("bad duration {s:?}"))?;
    Ok(n * mult)
}

fn fmt_duration(t: Time) -> String {
    if t > 0 && t.is_multiple_of(86400) {
        format!("{}d", t / 86400)
    } else if t > 0 && t.is_multiple_of(3600) {
        format!("{}h", t / 3600)
    } else if t > 0 && t.is_multiple_of(60) {
        format!("{}m", t / 60)
    } else {
        format!("{t}s")
    }
}

struct Cursor<'a> {
    line: &'a str,
    lineno: usize,
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str, lineno: usize) -> Cursor<'a> {
        // `->`, `@`, `=`, `{`, `}` are tokens even without surrounding spaces
        let mut tokens = Vec::new();
        let mut start = None;
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < line.len() {
            let rest = &line[i..];
            let sym = if rest.starts_with("->") {
                Some(2)
            } else if rest.starts_with(['@', '=', '{', '}']) {
                Some(1)
            } else {
                None
            };
            if let Some(len) = sym {
                if let Some(s) = start.take() {
                    tokens.push((s, &line[s..i]));
                }
                tokens.push((i, &line[i..i + len]));
                i += len;
            } else if bytes[i].is_ascii_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push((s, &line[s..i]));
                }
                i += 1;
            } else {
                if start.is_none() {
                    start = Some(i);
                }
                i += 1;
            }
        }
        if let Some(s) = start {
            tokens.push((s, &line[s..]));
        }
        Cursor { line, lineno, tokens, pos: 0 }
    }

    fn err(&self, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.lineno, col: col + 1, msg: msg.into() }
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.1)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.tokens.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.err(self.line.len(), format!("expected {what} at end of line"))),
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        let (col, got) = self.next(&format!("`{tok}`"))?;
        if got != tok {
            return Err(self.err(col, format!("expected `{tok}`, got {got:?}")));
        }
        Ok(())
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, ParseError> {
        let (col, tok) = self.next(what)?;
        tok.parse().map_err(|_| self.err(col, format!("bad {what} {tok:?}")))
    }

    fn duration(&mut self, what: &str) -> Result<Time, ParseError> {
        let (col, tok) = self.next(what)?;
        parse_duration(tok).map_err(|msg| self.err(col, msg))
    }

    fn end(&self) -> Result<(), ParseError> {
        if let Some(&(col, tok)) = self.tokens.get(self.pos) {
            return Err(self.err(col, format!("unexpected trailing {tok:?}")));
        }
        Ok(())
    }

    /// Ends a statement; a trailing `}` closes the enclosing section.
    fn finish_stmt(&mut self) -> Result<bool, ParseError> {
        if self.peek() == Some("}") {
            self.pos += 1;
            self.end()?;
            return Ok(true);
        }
        self.end()?;
        Ok(false)
    }
}

/// Parses the sectioned text form. Parsing does not validate; call
/// [`validate_query`] (or use [`parse_and_validate`]) before compiling.
pub fn parse_query(text: &str) -> Result<MotifQuery, ParseError> {
    let mut q = MotifQuery {
        edges: Vec::new(),
        anti_edges: Vec::new(),
        cg_delta: 0,
        fg_delta: BTreeMap::new(),
        vertex_labels: BTreeMap::new(),
        output: OutputMode::Count,
        in_graph: None,
        runtime: RuntimeParams::default(),
    };
    let mut enumerate = false;
    let mut max_matches: Option<u64> = None;
    let mut section: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor::new(line, idx + 1);
        if section.is_none() {
            let (col, name) = cur.next("section name")?;
            if !matches!(name, "pattern" | "in_graph" | "constraints" | "runtime_params") {
                return Err(cur.err(col, format!("unknown section {name:?}")));
            }
            cur.expect("{")?;
            section = Some(name.to_string());
            if cur.peek().is_none() {
                continue; // multi-line form; statements follow
            }
            // single-line form: one statement and the closing brace inline
        } else if cur.peek() == Some("}") {
            cur.expect("}")?;
            cur.end()?;
            section = None;
            continue;
        }
        let sec = section.as_deref().unwrap();
        match sec {
            "pattern" => parse_pattern_stmt(&mut cur, &mut q)?,
            "in_graph" => {
                let (col, key) = cur.next("key")?;
                if key != "path" {
                    return Err(cur.err(col, format!("unknown key {key:?} in in_graph")));
                }
                cur.expect("=")?;
                let (_, val) = cur.next("path")?;
                q.in_graph = Some(val.to_string());
            }
            "constraints" => parse_constraint_stmt(&mut cur, &mut q)?,
            "runtime_params" => parse_runtime_stmt(&mut cur, &mut q, &mut enumerate, &mut max_matches)?,
            _ => unreachable!(),
        }
        if cur.finish_stmt()? {
            section = None;
        }
    }
    if let Some(sec) = section {
        return Err(ParseError {
            line: text.lines().count(),
            col: 1,
            msg: format!("section {sec:?} is never closed"),
        });
    }
    if enumerate {
        q.output = OutputMode::Enumerate { max_matches: max_matches.unwrap_or(u64::MAX) };
    }
    q.edges.sort_by_key(|e| e.order);
    q.anti_edges.sort_by_key(|a| a.order);
    Ok(q)
}

fn parse_pattern_stmt(cur: &mut Cursor, q: &mut MotifQuery) -> Result<(), ParseError> {
    let (col, kw) = cur.next("`edge` or `anti`")?;
    match kw {
        "edge" => {
            let u = cur.number("motif vertex")?;
            cur.expect("->")?;
            let v = cur.number("motif vertex")?;
            cur.expect("@")?;
            let order = cur.number("order")?;
            let mut label = None;
            if cur.peek() == Some("label") {
                cur.expect("label")?;
                cur.expect("=")?;
                label = Some(cur.number("label")?);
            }
            q.edges.push(MotifEdge { u, v, order, label });
        }
        "anti" => {
            let u = cur.number("motif vertex")?;
            cur.expect("->")?;
            let v = cur.number("motif vertex")?;
            cur.expect("@")?;
            let order = cur.number("order")?;
            let mut attach = None;
            let mut window = None;
            while cur.peek().is_some_and(|t| t != "}") {
                let (kcol, key) = cur.next("anti-edge key")?;
                cur.expect("=")?;
                match key {
                    "attach" => attach = Some(cur.number("attach index")?),
                    "window" => window = Some(cur.duration("window")?),
                    _ => return Err(cur.err(kcol, format!("unknown key {key:?} on anti-edge"))),
                }
            }
            let attach = attach.ok_or_else(|| cur.err(col, "anti-edge needs attach=<edge>"))?;
            let window = window.ok_or_else(|| cur.err(col, "anti-edge needs window=<duration>"))?;
            q.anti_edges.push(AntiEdge { u, v, attach, window, order });
        }
        _ => return Err(cur.err(col, format!("expected `edge` or `anti`, got {kw:?}"))),
    }
    Ok(())
}

fn parse_constraint_stmt(cur: &mut Cursor, q: &mut MotifQuery) -> Result<(), ParseError> {
    let (col, key) = cur.next("constraint key")?;
    match key {
        "cg_delta" => {
            cur.expect("=")?;
            q.cg_delta = cur.duration("cg_delta")?;
        }
        "fg_delta" => {
            let gap = cur.number("gap index")?;
            cur.expect("=")?;
            let d = cur.duration("fg_delta")?;
            q.fg_delta.insert(gap, d);
        }
        "vertex_label" => {
            let v = cur.number("motif vertex")?;
            cur.expect("=")?;
            let l = cur.number("label")?;
            q.vertex_labels.insert(v, l);
        }
        "edge_label" => {
            let e: usize = cur.number("real edge index")?;
            cur.expect("=")?;
            let l = cur.number("label")?;
            match q.edges.iter_mut().find(|me| me.order == e) {
                Some(me) => me.label = Some(l),
                None => return Err(cur.err(col, format!("edge_label references unknown edge order {e}"))),
            }
        }
        _ => return Err(cur.err(col, format!("unknown key {key:?} in constraints"))),
    }
    Ok(())
}

fn parse_runtime_stmt(
    cur: &mut Cursor,
    q: &mut MotifQuery,
    enumerate: &mut bool,
    max_matches: &mut Option<u64>,
) -> Result<(), ParseError> {
    let (col, key) = cur.next("runtime key")?;
    cur.expect("=")?;
    match key {
        "enumerate" => {
            let (vcol, val) = cur.next("true/false")?;
            *enumerate = match val {
                "true" => true,
                "false" => false,
                _ => return Err(cur.err(vcol, format!("expected true/false, got {val:?}"))),
            };
        }
        "max_matches" => *max_matches = Some(cur.number("max_matches")?),
        "workers" => q.runtime.workers = Some(cur.number("workers")?),
        "partitions" => q.runtime.partitions = Some(cur.number("partitions")?),
        "allow_disconnected" => {
            let (vcol, val) = cur.next("true/false")?;
            q.runtime.allow_disconnected = match val {
                "true" => true,
                "false" => false,
                _ => return Err(cur.err(vcol, format!("expected true/false, got {val:?}"))),
            };
        }
        "steal_after" => q.runtime.steal_after = Some(cur.number("steal_after")?),
        "signal_interval" => q.runtime.signal_interval = Some(cur.number("signal_interval")?),
        "abort_timeout_ms" => q.runtime.abort_timeout_ms = Some(cur.number("abort_timeout_ms")?),
        "root_chunk" => q.runtime.root_chunk = Some(cur.number("root_chunk")?),
        _ => return Err(cur.err(col, format!("unknown key {key:?} in runtime_params"))),
    }
    Ok(())
}

/// Renders a query in the text form such that `parse_query(serialize_query(q)) == q`.
pub fn serialize_query(q: &MotifQuery) -> String {
    let mut out = String::from("pattern {\n");
    let mut level = 0;
    let mut edges = q.edges.iter().peekable();
    let mut antis = q.anti_edges.iter().peekable();
    while level < q.n_levels() {
        if edges.peek().is_some_and(|e| e.order == level) {
            let e = edges.next().unwrap();
            out += &format!("  edge {} -> {} @ {}", e.u, e.v, e.order);
            if let Some(l) = e.label {
                out += &format!(" label = {l}");
            }
            out.push('\n');
        } else if let Some(a) = antis.next() {
            out += &format!(
                "  anti {} -> {} @ {} attach={} window={}\n",
                a.u,
                a.v,
                a.order,
                a.attach,
                fmt_duration(a.window)
            );
        }
        level += 1;
    }
    out += "}\n";
    if let Some(path) = &q.in_graph {
        out += &format!("in_graph {{\n  path = {path}\n}}\n");
    }
    out += "constraints {\n";
    out += &format!("  cg_delta = {}\n", fmt_duration(q.cg_delta));
    for (gap, d) in &q.fg_delta {
        out += &format!("  fg_delta {gap} = {}\n", fmt_duration(*d));
    }
    for (v, l) in &q.vertex_labels {
        out += &format!("  vertex_label {v} = {l}\n");
    }
    out += "}\nruntime_params {\n";
    match q.output {
        OutputMode::Count => out += "  enumerate = false\n",
        OutputMode::Enumerate { max_matches } => {
            out += "  enumerate = true\n";
            if max_matches != u64::MAX {
                out += &format!("  max_matches = {max_matches}\n");
            }
        }
    }
    let r = &q.runtime;
    if let Some(w) = r.workers {
        out += &format!("  workers = {w}\n");
    }
    if let Some(p) = r.partitions {
        out += &format!("  partitions = {p}\n");
    }
    if r.allow_disconnected {
        out += "  allow_disconnected = true\n";
    }
    if let Some(v) = r.steal_after {
        out += &format!("  steal_after = {v}\n");
    }
    if let Some(v) = r.signal_interval {
        out += &format!("  signal_interval = {v}\n");
    }
    if let Some(v) = r.abort_timeout_ms {
        out += &format!("  abort_timeout_ms = {v}\n");
    }
    if let Some(v) = r.root_chunk {
        out += &format!("  root_chunk = {v}\n");
    }
    out += "}\n";
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonQuery {
    pattern: JsonPattern,
    #[serde(default)]
    in_graph: Option<String>,
    #[serde(default)]
    constraints: JsonConstraints,
    #[serde(default)]
    runtime_params: JsonRuntime,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonPattern {
    edges: Vec<JsonEdge>,
    #[serde(default)]
    anti_edges: Vec<JsonAnti>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonEdge {
    u: MotifVertex,
    v: MotifVertex,
    order: usize,
    #[serde(default)]
    label: Option<Label>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonAnti {
    u: MotifVertex,
    v: MotifVertex,
    order: usize,
    attach: usize,
    window: Time,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct JsonConstraints {
    #[serde(default)]
    cg_delta: Time,
    #[serde(default)]
    fg_delta: BTreeMap<String, Time>,
    #[serde(default)]
    vertex_labels: BTreeMap<String, Label>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct JsonRuntime {
    #[serde(default)]
    enumerate: bool,
    #[serde(default)]
    max_matches: Option<u64>,
    #[serde(default)]
    workers: Option<usize>,
    #[serde(default)]
    partitions: Option<usize>,
    #[serde(default)]
    allow_disconnected: bool,
    #[serde(default)]
    steal_after: Option<u64>,
    #[serde(default)]
    signal_interval: Option<u64>,
    #[serde(default)]
    abort_timeout_ms: Option<u64>,
    #[serde(default)]
    root_chunk: Option<usize>,
}

/// Parses the JSON form: same keys as the text sections, durations as
/// integers in the dataset's base time unit.
pub fn parse_query_json(text: &str) -> Result<MotifQuery, QueryError> {
    let j: JsonQuery = serde_json::from_str(text)?;
    let parse_key = |s: &String| -> Result<usize, QueryError> {
        s.parse().map_err(|_| {
            QueryError::Json(serde::de::Error::custom(format!("bad integer map key {s:?}")))
        })
    };
    let mut q = MotifQuery {
        edges: j
            .pattern
            .edges
            .iter()
            .map(|e| MotifEdge { u: e.u, v: e.v, order: e.order, label: e.label })
            .collect(),
        anti_edges: j
            .pattern
            .anti_edges
            .iter()
            .map(|a| AntiEdge { u: a.u, v: a.v, attach: a.attach, window: a.window, order: a.order })
            .collect(),
        cg_delta: j.constraints.cg_delta,
        fg_delta: BTreeMap::new(),
        vertex_labels: BTreeMap::new(),
        output: if j.runtime_params.enumerate {
            OutputMode::Enumerate { max_matches: j.runtime_params.max_matches.unwrap_or(u64::MAX) }
        } else {
            OutputMode::Count
        },
        in_graph: j.in_graph,
        runtime: RuntimeParams {
            workers: j.runtime_params.workers,
            partitions: j.runtime_params.partitions,
            allow_disconnected: j.runtime_params.allow_disconnected,
            steal_after: j.runtime_params.steal_after,
            signal_interval: j.runtime_params.signal_interval,
            abort_timeout_ms: j.runtime_params.abort_timeout_ms,
            root_chunk: j.runtime_params.root_chunk,
        },
    };
    for (k, v) in &j.constraints.fg_delta {
        q.fg_delta.insert(parse_key(k)?, *v);
    }
    for (k, v) in &j.constraints.vertex_labels {
        q.vertex_labels.insert(parse_key(k)?, *v);
    }
    q.edges.sort_by_key(|e| e.order);
    q.anti_edges.sort_by_key(|a| a.order);
    Ok(q)
}

/// Checks every query invariant; returns all violations, not just the first.
pub fn validate_query(q: &MotifQuery) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut diag = |msg: String| diags.push(Diagnostic(msg));

    if q.edges.is_empty() {
        diag("query has no real edges".into());
    }
    let n_vertices = q.n_motif_vertices();
    let mut present = vec![false; n_vertices];
    for id in q
        .edges
        .iter()
        .flat_map(|e| [e.u, e.v])
        .chain(q.anti_edges.iter().flat_map(|a| [a.u, a.v]))
    {
        present[id] = true;
    }
    if let Some(missing) = present.iter().position(|p| !p) {
        diag(format!("motif vertex ids are not dense: {missing} is unused"));
    }

    let n_levels = q.n_levels();
    let mut order_seen = vec![false; n_levels];
    for (order, what) in q
        .edges
        .iter()
        .map(|e| (e.order, "edge"))
        .chain(q.anti_edges.iter().map(|a| (a.order, "anti-edge")))
    {
        if order >= n_levels {
            diag(format!("{what} order {order} out of range (orders must be dense 0..{n_levels})"));
        } else if order_seen[order] {
            diag(format!("duplicate temporal order {order}"));
        } else {
            order_seen[order] = true;
        }
    }

    for e in &q.edges {
        if e.u == e.v {
            diag(format!("motif self-loop {0} -> {0} at order {1}", e.u, e.order));
        }
    }
    for a in &q.anti_edges {
        if a.u == a.v {
            diag(format!("anti-edge self-loop {0} -> {0} at order {1}", a.u, a.order));
        }
    }

    if !q.runtime.allow_disconnected {
        let mut mapped: Vec<MotifVertex> = Vec::new();
        for e in &q.edges {
            if !mapped.is_empty() && !mapped.contains(&e.u) && !mapped.contains(&e.v) {
                diag(format!(
                    "edge {} -> {} at order {} shares no vertex with earlier edges \
                     (set allow_disconnected = true to permit this)",
                    e.u, e.v, e.order
                ));
            }
            mapped.push(e.u);
            mapped.push(e.v);
        }
    }

    for a in &q.anti_edges {
        let mapped_before = |v: MotifVertex| {
            q.edges.iter().any(|e| e.order < a.order && (e.u == v || e.v == v))
        };
        if !mapped_before(a.u) || !mapped_before(a.v) {
            diag(format!("anti-edge endpoint unmapped at order {}", a.order));
        }
        match q.edges.get(a.attach) {
            Some(e) if e.order < a.order => {}
            Some(_) => diag(format!(
                "anti-edge at order {} attaches to edge {} which is not earlier",
                a.order, a.attach
            )),
            None => diag(format!("anti-edge at order {} attaches to unknown edge {}", a.order, a.attach)),
        }
    }

    if q.cg_delta == 0 {
        diag("cg_delta must be positive".into());
    }
    for (&gap, &d) in &q.fg_delta {
        if d == 0 {
            diag(format!("fg_delta {gap} must be positive"));
        }
        if q.edges.len() < 2 || gap > q.edges.len() - 2 {
            diag(format!("fg_delta gap index {gap} out of range"));
        }
    }
    for &v in q.vertex_labels.keys() {
        if v >= n_vertices {
            diag(format!("vertex_label references unknown motif vertex {v}"));
        }
    }
    if let OutputMode::Enumerate { max_matches: 0 } = q.output {
        diag("max_matches must be at least 1 in enumerate mode".into());
    }

    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

/// Parse then validate, as the CLI does.
pub fn parse_and_validate(text: &str) -> Result<MotifQuery, QueryError> {
    let q = parse_query(text)?;
    validate_query(&q).map_err(QueryError::Invalid)?;
    Ok(q)
}
