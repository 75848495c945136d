use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use grade_route::experiment::{self, ExperimentConfig, ExperimentError, RouteMode, RouteRequest};
use grade_route::grading::GradingError;
use grade_route::kb::{KbError, KnowledgeBase, RouteRecord};
use grade_route::pso::{self, PsoError, SwarmConfig};
use grade_route::topology::{generate_topology, GeneratorParams, NodeId, Topology, TopologyError};
use grade_route::traffic::{Thresholds, TrafficError, TrafficMatrix, TrafficModel};
use grade_route::RoutingGraph;

const EXIT_NO_PATH: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(
    name = "grade-route",
    version,
    about = "Grade-filtered swarm routing on region topologies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random region topology (and optionally a demand matrix).
    Generate(GenerateArgs),
    /// Find a route between two nodes.
    Route(RouteArgs),
    /// Run paired graded/ungraded trials and print the comparison.
    Compare(CompareArgs),
    /// Turn a comparison CSV into per-trial node and iteration series.
    Report(ReportArgs),
}

#[derive(Args)]
struct TopologyArgs {
    #[arg(long, default_value_t = 4)]
    regions: usize,
    #[arg(long, default_value_t = 8)]
    pnr: usize,
    /// Probability of each extra intra-region link.
    #[arg(long, default_value_t = 0.4)]
    intra_prob: f64,
    /// Links between every pair of regions.
    #[arg(long, default_value_t = 2)]
    inter_links: usize,
}

impl TopologyArgs {
    fn params(&self) -> GeneratorParams {
        GeneratorParams {
            region_count: self.regions,
            pnr: self.pnr,
            intra_edge_prob: self.intra_prob,
            inter_edges_per_region_pair: self.inter_links,
            ..GeneratorParams::default()
        }
    }
}

#[derive(Args)]
struct SwarmArgs {
    #[arg(long, default_value_t = 30)]
    particles: usize,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    /// Inertia weight.
    #[arg(long, default_value_t = 0.8)]
    w: f64,
    #[arg(long, default_value_t = 2.0)]
    c1: f64,
    #[arg(long, default_value_t = 2.0)]
    c2: f64,
    #[arg(long, default_value_t = 4.0)]
    vmax: f64,
    /// Relative bandwidth noise per particle evaluation (0 disables it).
    #[arg(long, default_value_t = 0.05)]
    perturbation: f64,
}

impl SwarmArgs {
    fn config(&self, window: usize, seed: u64) -> SwarmConfig {
        SwarmConfig {
            particle_count: self.particles,
            iterations: self.iterations,
            inertia: self.w,
            cognitive: self.c1,
            social: self.c2,
            v_max: self.vmax,
            window,
            perturbation: self.perturbation,
            seed,
        }
    }
}

#[derive(Args)]
struct ThresholdArgs {
    /// Link utilization at or above which a node counts as congested.
    #[arg(long, default_value_t = 0.8)]
    util_threshold: f64,
    /// Per-link delay at or above which a node counts as delayed.
    #[arg(long, default_value_t = 1.0)]
    delay_threshold: f64,
}

impl ThresholdArgs {
    fn thresholds(&self) -> Thresholds {
        Thresholds {
            delay: self.delay_threshold,
            utilization: self.util_threshold,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    topology: TopologyArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Topology output file.
    #[arg(long)]
    out: PathBuf,
    /// Also write a synthetic demand matrix here.
    #[arg(long)]
    traffic_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.15)]
    demand_density: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Ungraded,
    Graded,
    Oracle,
}

impl From<Mode> for RouteMode {
    fn from(m: Mode) -> RouteMode {
        match m {
            Mode::Ungraded => RouteMode::Ungraded,
            Mode::Graded => RouteMode::Graded,
            Mode::Oracle => RouteMode::Oracle,
        }
    }
}

#[derive(Args)]
struct RouteArgs {
    #[arg(long)]
    topology: PathBuf,
    /// Demand matrix. Without it the network carries no traffic.
    #[arg(long)]
    traffic: Option<PathBuf>,
    #[arg(long)]
    source: usize,
    #[arg(long)]
    dest: usize,
    #[arg(long, value_enum, default_value_t = Mode::Graded)]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Node-index window for path decoding. Defaults to nodes per region.
    #[arg(long)]
    window: Option<usize>,
    /// Service rate per unit of capacity.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[command(flatten)]
    swarm: SwarmArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Knowledge-base file to record the route in (created if missing).
    #[arg(long)]
    kb: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    topology: TopologyArgs,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    /// Master seed; every trial and method derives its own stream from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.15)]
    demand_density: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[command(flatten)]
    swarm: SwarmArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// CSV output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Comparison CSV produced by `compare`.
    #[arg(long)]
    input: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

/// Converts `e` and names the file it came from.
fn in_file(path: &std::path::Path, e: impl Into<Failure>) -> Failure {
    let f = e.into();
    Failure {
        message: format!("{}: {}", path.display(), f.message),
        ..f
    }
}

fn io_failure(what: &std::path::Path, e: io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", what.display()),
    }
}

impl From<TopologyError> for Failure {
    fn from(e: TopologyError) -> Failure {
        Failure::from_topology_ref(&e, e.to_string())
    }
}

fn traffic_code(e: &TrafficError) -> u8 {
    match e {
        TrafficError::Io(_) => EXIT_IO,
        TrafficError::InvalidMu(_) | TrafficError::InvalidThreshold(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

impl From<TrafficError> for Failure {
    fn from(e: TrafficError) -> Failure {
        Failure {
            code: traffic_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<KbError> for Failure {
    fn from(e: KbError) -> Failure {
        let code = match &e {
            KbError::Io(_) => EXIT_IO,
            KbError::Parse { .. } => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Failure {
        let code = match &e {
            ExperimentError::Topology(t) => return Failure::from_topology_ref(t, e.to_string()),
            ExperimentError::Traffic(t) => traffic_code(t),
            ExperimentError::Grading(GradingError::GradeCount { .. }) => EXIT_DATA,
            ExperimentError::Grading(_) => EXIT_USAGE,
            ExperimentError::Pso(PsoError::InvalidConfig(_)) => EXIT_USAGE,
            ExperimentError::Pso(PsoError::UnknownNode(_)) => EXIT_USAGE,
            ExperimentError::InvalidConfig(_) => EXIT_USAGE,
            ExperimentError::Parse { .. } | ExperimentError::Csv(_) => EXIT_DATA,
            ExperimentError::Io(_) => EXIT_IO,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn from_topology_ref(e: &TopologyError, message: String) -> Failure {
        let code = match e {
            TopologyError::Io(_) => EXIT_IO,
            TopologyError::InvalidParameter(_) | TopologyError::UnknownNode(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure { code, message }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Route(a) => cmd_route(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Report(a) => cmd_report(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("grade-route: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_generate(a: &GenerateArgs) -> Result<u8, Failure> {
    let t = generate_topology(&a.topology.params(), a.seed)?;
    t.save(&a.out).map_err(|e| in_file(&a.out, e))?;
    println!(
        "wrote {} ({} regions x {} nodes, {} links)",
        a.out.display(),
        t.region_count(),
        t.pnr(),
        t.links().len()
    );
    if let Some(path) = &a.traffic_out {
        if !(0.0..=1.0).contains(&a.demand_density) {
            return Err(Failure::usage("--demand-density must lie in [0, 1]"));
        }
        let seed = grade_route::seed::derive(a.seed, &[1]);
        let m = TrafficMatrix::synthetic(t.node_count(), a.demand_density, 0.1, 1.0, seed);
        m.save(path).map_err(|e| in_file(path, e))?;
        println!("wrote {} ({} demands)", path.display(), m.demands().count());
    }
    Ok(0)
}

fn node_arg(t: &Topology, n: usize, flag: &str) -> Result<NodeId, Failure> {
    if n < t.node_count() {
        Ok(NodeId(n))
    } else {
        Err(Failure::usage(format!(
            "{flag} {n} is outside the topology's nodes 0..{}",
            t.node_count()
        )))
    }
}

fn join_path(nodes: &[NodeId]) -> String {
    nodes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn cmd_route(a: &RouteArgs) -> Result<u8, Failure> {
    let t = Topology::load(&a.topology).map_err(|e| in_file(&a.topology, e))?;
    let source = node_arg(&t, a.source, "--source")?;
    let dest = node_arg(&t, a.dest, "--dest")?;
    if source == dest {
        return Err(Failure::usage("--source and --dest must differ"));
    }
    let thresholds = a.thresholds.thresholds();
    thresholds.validate()?;
    let model = match &a.traffic {
        Some(path) => {
            let m = TrafficMatrix::load(path, t.node_count()).map_err(|e| in_file(path, e))?;
            TrafficModel::new(&t, m, a.mu)?
        }
        None => TrafficModel::idle(&t, a.mu)?,
    };
    let req = RouteRequest {
        source,
        dest,
        mode: a.mode.into(),
        swarm: a.swarm.config(a.window.unwrap_or(t.pnr()), a.seed),
        thresholds,
    };
    let r = experiment::route(&t, &model, &req)?;

    println!("mode: {}", r.mode.as_str());
    println!("source: {}  dest: {}", r.source, r.dest);
    println!(
        "nodes: {} considered of {}",
        r.nodes_considered, r.nodes_total
    );
    println!("network delay: {}", r.network_delay);
    if let Some(g) = &r.graded {
        if g.subgraph.widened() {
            println!("grade filter widened to reconnect source and dest");
        }
    }
    if let Some(run) = &r.run {
        println!("iterations to converge: {}", run.iterations_to_converge);
    }
    if let Some(o) = &r.oracle {
        println!(
            "paths examined: {}{}",
            o.paths_examined,
            if o.truncated { " (truncated)" } else { "" }
        );
    }
    if !r.path.valid {
        println!("path: none");
        println!("fitness: 0");
        return Ok(EXIT_NO_PATH);
    }
    println!("path: {}", join_path(&r.path.nodes));
    println!("fitness: {}", r.fitness);
    if r.run.is_some() {
        let g = match &r.graded {
            Some(g) => g.subgraph.graph().clone(),
            None => RoutingGraph::full(&t),
        };
        println!("unperturbed path fitness: {}", pso::fitness(&r.path, &g));
    }

    if let Some(kb_path) = &a.kb {
        let mut kb = KnowledgeBase::load_or_default(kb_path).map_err(|e| in_file(kb_path, e))?;
        let record = match (&r.run, &r.oracle) {
            (Some(run), _) => RouteRecord::from_run(run, r.mode == RouteMode::Graded, a.seed),
            (None, Some(_)) => Some(RouteRecord {
                source,
                dest,
                path: r.path.nodes.clone(),
                fitness: r.fitness,
                iterations_to_converge: 0,
                graded: false,
                seed: a.seed,
            }),
            (None, None) => None,
        };
        if let Some(record) = record {
            let kept = kb.record(record);
            kb.save(kb_path).map_err(|e| in_file(kb_path, e))?;
            println!(
                "kb: {}",
                if kept {
                    "recorded"
                } else {
                    "existing route is at least as good"
                }
            );
        }
    }
    Ok(0)
}

fn cmd_compare(a: &CompareArgs) -> Result<u8, Failure> {
    let cfg = ExperimentConfig {
        topology: a.topology.params(),
        demand_density: a.demand_density,
        mu: a.mu,
        thresholds: a.thresholds.thresholds(),
        swarm: a.swarm.config(a.topology.pnr, 0),
        trial_count: a.trials,
        master_seed: a.seed,
        ..ExperimentConfig::default()
    };
    let report = experiment::compare(&cfg)?;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io_err = |e: io::Error| Failure {
        code: EXIT_IO,
        message: e.to_string(),
    };
    writeln!(
        out,
        "{:>5} {:>9} {:>10} {:>9} {:>10} {:>7}",
        "trial", "ungr.it", "ungr.fit", "grad.it", "grad.fit", "nodes"
    )
    .map_err(io_err)?;
    for r in &report.rows {
        match &r.error {
            Some(e) => writeln!(out, "{:>5} failed: {e}", r.trial),
            None => writeln!(
                out,
                "{:>5} {:>9} {:>10.6} {:>9} {:>10.6} {:>3}/{:<3}",
                r.trial,
                r.ungraded_iterations,
                r.ungraded_fitness,
                r.graded_iterations,
                r.graded_fitness,
                r.nodes_graded,
                r.nodes_total
            ),
        }
        .map_err(io_err)?;
    }
    let s = &report.summary;
    writeln!(
        out,
        "trials: {} ok, {} failed",
        s.trials_ok, s.trials_failed
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "median iteration reduction: {}",
        s.median_iteration_reduction
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "fraction graded <= ungraded: {:.3}",
        s.fraction_graded_not_slower
    )
    .map_err(io_err)?;
    writeln!(out, "mean nodes graded/total: {:.3}", s.mean_node_ratio).map_err(io_err)?;

    if let Some(path) = &a.out {
        fs::write(path, experiment::comparison_csv(&report.rows))
            .map_err(|e| io_failure(path, e))?;
    }
    Ok(0)
}

fn cmd_report(a: &ReportArgs) -> Result<u8, Failure> {
    let input = fs::read_to_string(&a.input).map_err(|e| io_failure(&a.input, e))?;
    let csv = experiment::report(&input).map_err(|e| in_file(&a.input, e))?;
    match &a.out {
        Some(path) => fs::write(path, csv).map_err(|e| io_failure(path, e))?,
        None => print!("{csv}"),
    }
    Ok(0)
}
