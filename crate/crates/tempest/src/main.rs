use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tempest::graph::{self, TemporalGraph};
use tempest::oracle;
use tempest::partition::{build_partitions, effective_delta, render_partitions};
use tempest::perfmodel;
use tempest::plan::{compile_plan, render_plan};
use tempest::query::{self, MotifQuery, OutputMode};
use tempest::runtime::{run_query, MatchOutput, OutputKind, SchedulerConfig};

/// Temporal motif mining over timestamped edge lists.
#[derive(Parser)]
#[command(name = "tempest", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine a motif query in a temporal graph.
    Mine(MineArgs),
    /// Brute-force reference miner (small graphs only).
    Oracle(OracleArgs),
    /// Convert a graph between text and binary formats.
    Convert(ConvertArgs),
    /// Inspect chronological major/minor partitions for a window.
    Partition(PartitionArgs),
    /// Dump the compiled per-level mining plan for a query.
    Plan(PlanArgs),
    /// Evaluate a load-balancing performance model.
    Model(ModelArgs),
}

#[derive(Args)]
struct MineArgs {
    /// Graph path, then query path; with a single path the query's
    /// `in_graph` section names the graph.
    #[arg(required = true, num_args = 1..=2)]
    inputs: Vec<PathBuf>,
    /// Attach vertex labels from a `vertex_id label` file.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Parse the query as JSON (also inferred from a .json suffix).
    #[arg(long)]
    query_json: bool,
    /// Worker threads (default: TEMPEST_WORKERS or all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Executor groups over chronological partitions [default: 1]
    #[arg(long)]
    partitions: Option<usize>,
    /// Enumerate up to this many matches instead of counting.
    #[arg(long, value_name = "MAX")]
    enumerate: Option<u64>,
    /// Collect the full match set and sort it before truncation.
    #[arg(long)]
    canonical: bool,
    /// Print matched edges as src,dst,t triples instead of indices.
    #[arg(long)]
    resolve: bool,
    /// Emit the JSON stats report after the result.
    #[arg(long)]
    stats: bool,
    /// Iterations before a task answers steal requests [default: 20]
    #[arg(long)]
    steal_after: Option<u64>,
    /// Iterations between abort-signal checks [default: 1024]
    #[arg(long)]
    signal_interval: Option<u64>,
    /// Grace period before an aborted task dumps, in ms [default: 100]
    #[arg(long)]
    abort_timeout_ms: Option<u64>,
    /// Roots per task [default: 4096]
    #[arg(long)]
    root_chunk: Option<usize>,
    /// Disable work stealing between workers.
    #[arg(long)]
    no_steal: bool,
    /// Disable tail-task redistribution.
    #[arg(long)]
    no_redistribute: bool,
}

#[derive(Args)]
struct OracleArgs {
    graph: PathBuf,
    query: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    query_json: bool,
    /// Enumerate matches (sorted) instead of counting.
    #[arg(long, value_name = "MAX")]
    enumerate: Option<u64>,
    #[arg(long)]
    resolve: bool,
    /// Override the brute-force size guard.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    /// Output path; .bin/.tmpg for binary, anything else for text.
    output: PathBuf,
    /// Attach vertex labels before writing.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    graph: PathBuf,
    /// Number of major partitions.
    #[arg(short, long, default_value_t = 2)]
    n: usize,
    /// Window to close over (duration with s/m/h/d suffix).
    #[arg(long, conflicts_with = "query")]
    delta: Option<String>,
    /// Take the window (widened for anti-edges) from a query file.
    #[arg(long)]
    query: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    query: PathBuf,
    #[arg(long)]
    query_json: bool,
}

#[derive(Args)]
struct ModelArgs {
    #[command(subcommand)]
    which: ModelCommand,
}

#[derive(Subcommand)]
enum ModelCommand {
    /// 32 / (t_imb * (1 + k*eps/i_opt))
    IntraWarp {
        #[arg(long)]
        t_imb: f64,
        #[arg(long, default_value_t = 0.0)]
        k: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        i_opt: f64,
    },
    /// o / ((1 - ((phi-1)/phi) * l_imb) + kc_over_t)
    Tail {
        #[arg(long, default_value_t = 1.0)]
        o: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        l_imb: f64,
        #[arg(long, default_value_t = 0.0)]
        kc_over_t: f64,
    },
    /// (l/theta) / (1 - l + l/theta)
    Residual {
        #[arg(long)]
        l_imb: f64,
        #[arg(long)]
        theta: f64,
    },
    /// 1 / (((1-f)/f)/phi + 1)
    TailFraction {
        #[arg(long)]
        work_fraction: f64,
        #[arg(long)]
        phi: f64,
    },
}

/// Exit 1 for parse/validation problems, 2 for I/O problems.
enum CliError {
    Usage(String),
    Io(String),
}

impl From<query::QueryError> for CliError {
    fn from(e: query::QueryError) -> CliError {
        CliError::Usage(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(s)
}

fn load_graph(path: &Path, labels: Option<&Path>) -> Result<TemporalGraph, CliError> {
    let mut g = graph::load_path(path).map_err(|e| match e {
        graph::GraphError::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })?;
    if let Some(labels) = labels {
        let f = File::open(labels).map_err(|e| CliError::Io(format!("{}: {e}", labels.display())))?;
        let warnings = g.attach_vertex_labels(BufReader::new(f)).map_err(|e| match e {
            graph::GraphError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Usage(other.to_string()),
        })?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
    }
    Ok(g)
}

fn load_query(path: &Path, force_json: bool) -> Result<MotifQuery, CliError> {
    let text = read_file(path)?;
    let json = force_json || path.extension().is_some_and(|e| e == "json");
    let q = if json { query::parse_query_json(&text)? } else { query::parse_query(&text).map_err(query::QueryError::from)? };
    query::validate_query(&q).map_err(query::QueryError::Invalid)?;
    Ok(q)
}

fn default_workers() -> Option<usize> {
    std::env::var("TEMPEST_WORKERS").ok().and_then(|v| v.parse().ok())
}

fn print_matches(graph: &TemporalGraph, matches: &[Vec<graph::EdgeId>], resolve: bool) {
    for m in matches {
        let line: Vec<String> = m
            .iter()
            .map(|&e| {
                if resolve {
                    let edge = graph.edge(e);
                    format!(
                        "{},{},{}",
                        graph.original_id(edge.src),
                        graph.original_id(edge.dst),
                        edge.t
                    )
                } else {
                    e.to_string()
                }
            })
            .collect();
        println!("{}", line.join(" "));
    }
}

fn cmd_mine(args: MineArgs) -> Result<(), CliError> {
    let (graph_path, query_path) = match args.inputs.as_slice() {
        [g, q] => (Some(g.clone()), q.clone()),
        [q] => (None, q.clone()),
        _ => unreachable!("clap enforces 1..=2"),
    };
    let mut q = load_query(&query_path, args.query_json)?;
    let graph_path = graph_path
        .or_else(|| q.in_graph.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("no graph: pass one before the query or set in_graph".into()))?;
    let g = load_graph(&graph_path, args.labels.as_deref())?;

    if let Some(max) = args.enumerate {
        q.output = OutputMode::Enumerate { max_matches: max.max(1) };
    }
    let mut cfg = SchedulerConfig::default().apply_query(&q);
    if let Some(w) = args.workers.or_else(default_workers) {
        cfg.workers = w.max(1);
    }
    if let Some(p) = args.partitions {
        cfg.partitions = p.max(1);
    }
    if let Some(v) = args.steal_after {
        cfg.steal_after_iters = v;
    }
    if let Some(v) = args.signal_interval {
        cfg.signal_check_interval = v.max(1);
    }
    if let Some(v) = args.abort_timeout_ms {
        cfg.abort_timeout = std::time::Duration::from_millis(v);
    }
    if let Some(v) = args.root_chunk {
        cfg.root_chunk = v.max(1);
    }
    if let OutputMode::Enumerate { max_matches } = q.output {
        cfg.max_enumeration = max_matches;
    }
    cfg.canonical = args.canonical;
    cfg.enable_stealing = !args.no_steal;
    cfg.enable_redistribution = !args.no_redistribute;

    let out: MatchOutput = run_query(&g, &q, &cfg);
    match &out.kind {
        OutputKind::Count(n) => println!("count: {n}"),
        OutputKind::Enumerate { matches, truncated } => {
            print_matches(&g, matches, args.resolve);
            if *truncated {
                eprintln!("note: enumeration truncated at {} matches", matches.len());
            }
        }
    }
    if args.stats {
        println!("{}", serde_json::to_string_pretty(&out.to_json(&cfg)).unwrap());
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), CliError> {
    let q = load_query(&args.query, args.query_json)?;
    let g = load_graph(&args.graph, args.labels.as_deref())?;
    let matches =
        oracle::brute_force_mine(&g, &q, args.force).map_err(|e| CliError::Usage(e.to_string()))?;
    match args.enumerate {
        Some(max) => {
            let shown = &matches[..matches.len().min(max as usize)];
            print_matches(&g, shown, args.resolve);
        }
        None => println!("count: {}", matches.len()),
    }
    Ok(())
}

fn cmd_convert(args: ConvertArgs) -> Result<(), CliError> {
    let g = load_graph(&args.input, args.labels.as_deref())?;
    let binary = args.output.extension().is_some_and(|e| e == "bin" || e == "tmpg");
    if binary {
        graph::save_path(&g, &args.output).map_err(|e| CliError::Io(e.to_string()))?;
    } else {
        use std::io::Write;
        let f = File::create(&args.output).map_err(|e| CliError::Io(e.to_string()))?;
        let mut w = std::io::BufWriter::new(f);
        for (i, e) in g.edges().iter().enumerate() {
            let result = if g.has_edge_labels() {
                writeln!(
                    w,
                    "{} {} {} {}",
                    g.original_id(e.src),
                    g.original_id(e.dst),
                    e.t,
                    g.edge_label(i as graph::EdgeId)
                )
            } else {
                writeln!(w, "{} {} {}", g.original_id(e.src), g.original_id(e.dst), e.t)
            };
            result.map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    eprintln!(
        "wrote {} ({} vertices, {} edges)",
        args.output.display(),
        g.n_vertices(),
        g.n_edges()
    );
    Ok(())
}

fn cmd_partition(args: PartitionArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph, None)?;
    let delta = match (&args.delta, &args.query) {
        (Some(d), None) => query::parse_duration(d).map_err(CliError::Usage)?,
        (None, Some(qpath)) => effective_delta(&load_query(qpath, false)?),
        _ => return Err(CliError::Usage("pass exactly one of --delta or --query".into())),
    };
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let pset = build_partitions(&g, args.n, delta);
    print!("{}", render_partitions(&g, &pset));
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> Result<(), CliError> {
    let q = load_query(&args.query, args.query_json)?;
    print!("{}", render_plan(&compile_plan(&q)));
    Ok(())
}

fn cmd_model(args: ModelArgs) -> Result<(), CliError> {
    let value = match args.which {
        ModelCommand::IntraWarp { t_imb, k, eps, i_opt } => {
            perfmodel::intra_warp_speedup(t_imb, k, eps, i_opt)
        }
        ModelCommand::Tail { o, phi, l_imb, kc_over_t } => {
            perfmodel::tail_speedup(o, phi, l_imb, kc_over_t)
        }
        ModelCommand::Residual { l_imb, theta } => perfmodel::residual_tail_fraction(l_imb, theta),
        ModelCommand::TailFraction { work_fraction, phi } => {
            perfmodel::tail_fraction_from_work(work_fraction, phi)
        }
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{value}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mine(a) => cmd_mine(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Model(a) => cmd_model(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
