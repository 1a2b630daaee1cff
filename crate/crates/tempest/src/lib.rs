//! tempest — temporal motif mining over timestamped edge lists.
//!
//! A temporal motif is a sequence of directed edges with a fixed temporal
//! order that must land inside a coarse window δ, optionally narrowed by
//! per-gap fine windows, vertex/edge label predicates, and temporal
//! anti-edges (windows in which an edge must be absent). Queries are
//! compiled into a per-level mining plan executed by a DFS core that
//! caches candidate windows for backtracking, underneath a work-stealing
//! runtime with tail-task redistribution and chronological partitioning.
//!
//! ```
//! use tempest::{graph, query, runtime};
//!
//! let g = graph::load_text("0 1 10\n1 2 20\n2 0 30\n0 1 40\n1 2 100\n".as_bytes())?;
//! let q = query::parse_and_validate(
//!     "pattern {
//!        edge 0 -> 1 @ 0
//!        edge 1 -> 2 @ 1
//!        edge 2 -> 0 @ 2
//!      }
//!      constraints { cg_delta = 30s }",
//! )?;
//! let out = runtime::run_query(&g, &q, &runtime::SchedulerConfig::default());
//! assert_eq!(out.count(), Some(2));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod engine;
pub mod graph;
pub mod oracle;
pub mod partition;
pub mod perfmodel;
pub mod plan;
pub mod query;
pub mod runtime;

// Keep the book's code samples compiling: every fenced Rust block in the
// guide runs as a doctest of this crate.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(unused)]
            struct $name;
        };
    }
    chapter!(Motifs, "../../../book/src/motifs.md");
    chapter!(Queries, "../../../book/src/queries.md");
    chapter!(Engine, "../../../book/src/engine.md");
    chapter!(Runtime, "../../../book/src/runtime.md");
    chapter!(Partitions, "../../../book/src/partitions.md");
    chapter!(Models, "../../../book/src/models.md");
}
