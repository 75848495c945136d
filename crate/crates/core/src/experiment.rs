//! End-to-end pipeline and the graded-vs-ungraded comparison harness.
//!
//! One routing request flows through the traffic model (flows and node
//! dynamics), Level-1 grading, and Level-2 swarm search. The comparison
//! harness repeats that on seeded random topologies and records how many
//! iterations each method needed to settle on its best path.

use std::io;

use rand::Rng as _;
use thiserror::Error;

use crate::grading::{self, GradedSubgraph, GradingError, NodeGrade};
use crate::graph::RoutingGraph;
use crate::oracle::{self, OracleResult};
use crate::pso::{self, Path, PsoError, RunOutcome, SwarmConfig};
use crate::seed;
use crate::topology::{
    generate_topology, GeneratorParams, NodeId, RegionId, Topology, TopologyError,
};
use crate::traffic::{self, NodeDynamics, Thresholds, TrafficError, TrafficMatrix, TrafficModel};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Grading(#[from] GradingError),
    #[error(transparent)]
    Pso(#[from] PsoError),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Level-1 output for one (source, dest) request.
#[derive(Debug, Clone)]
pub struct Graded {
    pub dynamics: Vec<NodeDynamics>,
    pub grades: Vec<NodeGrade>,
    pub subgraph: GradedSubgraph,
}

/// Runs the traffic model and Level-1 selection.
pub fn grade(
    t: &Topology,
    model: &TrafficModel,
    thresholds: &Thresholds,
    source: NodeId,
    dest: NodeId,
) -> Result<Graded, ExperimentError> {
    let dynamics = traffic::derive_dynamics(t, model, thresholds)?;
    let grades = grading::grade_nodes(t, &dynamics);
    let g: Vec<_> = grades.iter().map(|n| n.grade).collect();
    let subgraph = grading::level1_select(t, &g, source, dest)?;
    Ok(Graded {
        dynamics,
        grades,
        subgraph,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteMode {
    Ungraded,
    Graded,
    Oracle,
}

impl RouteMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RouteMode::Ungraded => "ungraded",
            RouteMode::Graded => "graded",
            RouteMode::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RouteReport {
    pub mode: RouteMode,
    pub source: NodeId,
    pub dest: NodeId,
    pub path: Path,
    pub fitness: f64,
    /// Swarm modes only.
    pub run: Option<RunOutcome>,
    /// Oracle mode only.
    pub oracle: Option<OracleResult>,
    pub nodes_total: usize,
    pub nodes_considered: usize,
    pub network_delay: f64,
    pub graded: Option<Graded>,
}

#[derive(Debug, Clone, Copy)]
pub struct RouteRequest {
    pub source: NodeId,
    pub dest: NodeId,
    pub mode: RouteMode,
    pub swarm: SwarmConfig,
    pub thresholds: Thresholds,
}

/// Answers one routing request. Fails on saturated traffic, naming the link.
pub fn route(
    t: &Topology,
    model: &TrafficModel,
    req: &RouteRequest,
) -> Result<RouteReport, ExperimentError> {
    for n in [req.source, req.dest] {
        t.node(n)?;
    }
    let network_delay = model.network_delay(t)?;
    let full = RoutingGraph::full(t);
    let mut report = RouteReport {
        mode: req.mode,
        source: req.source,
        dest: req.dest,
        path: Path {
            nodes: vec![req.source],
            valid: false,
        },
        fitness: 0.0,
        run: None,
        oracle: None,
        nodes_total: t.node_count(),
        nodes_considered: t.node_count(),
        network_delay,
        graded: None,
    };
    match req.mode {
        RouteMode::Oracle => {
            let r = oracle::best_path_bruteforce(
                &full,
                req.source,
                req.dest,
                oracle::DEFAULT_MAX_PATHS,
            );
            report.path = r.best_path.clone();
            report.fitness = r.best_fitness;
            report.oracle = Some(r);
        }
        RouteMode::Ungraded => {
            let run = pso::run(&req.swarm, &full, req.source, req.dest)?;
            report.path = run.path.clone();
            report.fitness = run.fitness;
            report.run = Some(run);
        }
        RouteMode::Graded => {
            let graded = grade(t, model, &req.thresholds, req.source, req.dest)?;
            let run = pso::run(&req.swarm, graded.subgraph.graph(), req.source, req.dest)?;
            report.nodes_considered = graded.subgraph.kept_count();
            report.path = run.path.clone();
            report.fitness = run.fitness;
            report.run = Some(run);
            report.graded = Some(graded);
        }
    }
    Ok(report)
}

/// Everything the comparison harness varies or holds fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub topology: GeneratorParams,
    /// Probability that an ordered node pair carries a demand.
    pub demand_density: f64,
    pub demand_min: f64,
    pub demand_max: f64,
    pub mu: f64,
    pub thresholds: Thresholds,
    /// Template; `seed` is replaced per trial and method and `window` is set
    /// to the topology's nodes per region.
    pub swarm: SwarmConfig,
    pub trial_count: usize,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            topology: GeneratorParams::default(),
            demand_density: 0.15,
            demand_min: 0.1,
            demand_max: 1.0,
            mu: 1.0,
            thresholds: Thresholds::default(),
            swarm: SwarmConfig::default(),
            trial_count: 30,
            master_seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trial_count == 0 {
            return Err(ExperimentError::InvalidConfig(
                "trial count must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.demand_density) {
            return Err(ExperimentError::InvalidConfig(
                "demand density must lie in [0, 1]".into(),
            ));
        }
        if !(self.demand_min >= 0.0
            && self.demand_min <= self.demand_max
            && self.demand_max.is_finite())
        {
            return Err(ExperimentError::InvalidConfig(
                "demand range is empty".into(),
            ));
        }
        self.topology.validate()?;
        self.thresholds.validate()?;
        self.swarm.validate()?;
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(TrafficError::InvalidMu(self.mu).into());
        }
        Ok(())
    }

    fn trial_seed(&self, trial: usize, tag: SeedTag) -> u64 {
        seed::derive(self.master_seed, &[trial as u64, tag as u64])
    }
}

#[derive(Debug, Clone, Copy)]
enum SeedTag {
    Topology = 0,
    Demands = 1,
    Endpoints = 2,
    Ungraded = 3,
    Graded = 4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub trial: usize,
    pub ungraded_iterations: usize,
    pub ungraded_fitness: f64,
    pub graded_iterations: usize,
    pub graded_fitness: f64,
    pub nodes_total: usize,
    pub nodes_graded: usize,
    /// Set when the trial failed; the numeric columns are then meaningless.
    pub error: Option<String>,
}

/// Full state of one comparison trial.
#[derive(Debug, Clone)]
pub struct Trial {
    pub topology: Topology,
    pub source: NodeId,
    pub dest: NodeId,
    pub graded: Graded,
    pub ungraded_run: RunOutcome,
    pub graded_run: RunOutcome,
    pub row: ComparisonRow,
}

/// Picks source and destination in two different regions (or two distinct
/// nodes when there is a single region).
fn pick_endpoints(t: &Topology, seed: u64) -> Option<(NodeId, NodeId)> {
    if t.node_count() < 2 {
        return None;
    }
    let mut rng = seed::rng(seed);
    let pnr = t.pnr();
    let regions = t.region_count();
    if regions == 1 {
        let s = rng.gen_range(0..pnr);
        let mut d = rng.gen_range(0..pnr - 1);
        if d >= s {
            d += 1;
        }
        return Some((NodeId(s), NodeId(d)));
    }
    let ra = rng.gen_range(0..regions);
    let mut rb = rng.gen_range(0..regions - 1);
    if rb >= ra {
        rb += 1;
    }
    let mut pick = |r: usize| {
        let members: Vec<NodeId> = t.region_nodes(RegionId(r)).collect();
        members[rng.gen_range(0..members.len())]
    };
    let s = pick(ra);
    let d = pick(rb);
    Some((s, d))
}

/// Runs trial number `trial` of the comparison.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Trial, ExperimentError> {
    let t = generate_topology(&cfg.topology, cfg.trial_seed(trial, SeedTag::Topology))?;
    let demands = TrafficMatrix::synthetic(
        t.node_count(),
        cfg.demand_density,
        cfg.demand_min,
        cfg.demand_max,
        cfg.trial_seed(trial, SeedTag::Demands),
    );
    let model = TrafficModel::new(&t, demands, cfg.mu)?;
    let (source, dest) = pick_endpoints(&t, cfg.trial_seed(trial, SeedTag::Endpoints))
        .ok_or_else(|| ExperimentError::InvalidConfig("topology needs at least 2 nodes".into()))?;
    let graded = grade(&t, &model, &cfg.thresholds, source, dest)?;

    let window = t.pnr();
    let ungraded_cfg = SwarmConfig {
        window,
        seed: cfg.trial_seed(trial, SeedTag::Ungraded),
        ..cfg.swarm
    };
    let graded_cfg = SwarmConfig {
        window,
        seed: cfg.trial_seed(trial, SeedTag::Graded),
        ..cfg.swarm
    };
    let ungraded_run = pso::run(&ungraded_cfg, &RoutingGraph::full(&t), source, dest)?;
    let graded_run = pso::run(&graded_cfg, graded.subgraph.graph(), source, dest)?;
    let row = ComparisonRow {
        trial,
        ungraded_iterations: ungraded_run.iterations_to_converge,
        ungraded_fitness: ungraded_run.fitness,
        graded_iterations: graded_run.iterations_to_converge,
        graded_fitness: graded_run.fitness,
        nodes_total: t.node_count(),
        nodes_graded: graded.subgraph.kept_count(),
        error: None,
    };
    Ok(Trial {
        topology: t,
        source,
        dest,
        graded,
        ungraded_run,
        graded_run,
        row,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub trials_ok: usize,
    pub trials_failed: usize,
    /// Median of `ungraded_iterations - graded_iterations`.
    pub median_iteration_reduction: f64,
    /// Share of trials where graded needed no more iterations than ungraded.
    pub fraction_graded_not_slower: f64,
    pub mean_node_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub summary: Summary,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

pub fn summarize(rows: &[ComparisonRow]) -> Summary {
    let ok: Vec<&ComparisonRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let n = ok.len() as f64;
    let mut reductions: Vec<f64> = ok
        .iter()
        .map(|r| r.ungraded_iterations as f64 - r.graded_iterations as f64)
        .collect();
    let not_slower = ok
        .iter()
        .filter(|r| r.graded_iterations <= r.ungraded_iterations)
        .count() as f64;
    let ratio: f64 = ok
        .iter()
        .map(|r| r.nodes_graded as f64 / r.nodes_total as f64)
        .sum();
    Summary {
        trials_ok: ok.len(),
        trials_failed: rows.len() - ok.len(),
        median_iteration_reduction: median(&mut reductions),
        fraction_graded_not_slower: not_slower / n,
        mean_node_ratio: ratio / n,
    }
}

/// Runs every trial in order. A failing trial becomes an error row.
pub fn compare(cfg: &ExperimentConfig) -> Result<ComparisonReport, ExperimentError> {
    cfg.validate()?;
    let rows: Vec<ComparisonRow> = (0..cfg.trial_count)
        .map(|trial| match run_trial(cfg, trial) {
            Ok(t) => t.row,
            Err(e) => ComparisonRow {
                trial,
                ungraded_iterations: 0,
                ungraded_fitness: 0.0,
                graded_iterations: 0,
                graded_fitness: 0.0,
                nodes_total: cfg.topology.region_count * cfg.topology.pnr,
                nodes_graded: 0,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let summary = summarize(&rows);
    Ok(ComparisonReport { rows, summary })
}

pub const COMPARE_HEADER: [&str; 7] = [
    "trial",
    "ungraded_iterations",
    "ungraded_fitness",
    "graded_iterations",
    "graded_fitness",
    "nodes_total",
    "nodes_graded",
];

/// Writes rows with [`COMPARE_HEADER`] columns. Failed trials keep their
/// trial and node-total cells and leave the rest empty.
pub fn write_comparison_csv<W: io::Write>(
    rows: &[ComparisonRow],
    out: W,
) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_HEADER)?;
    for r in rows {
        let cells: [String; 7] = if r.error.is_some() {
            [
                r.trial.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                r.nodes_total.to_string(),
                String::new(),
            ]
        } else {
            [
                r.trial.to_string(),
                r.ungraded_iterations.to_string(),
                r.ungraded_fitness.to_string(),
                r.graded_iterations.to_string(),
                r.graded_fitness.to_string(),
                r.nodes_total.to_string(),
                r.nodes_graded.to_string(),
            ]
        };
        w.write_record(&cells)?;
    }
    w.flush()?;
    Ok(())
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut buf = Vec::new();
    write_comparison_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub const REPORT_HEADER: [&str; 7] = [
    "trial",
    "nodes_total",
    "nodes_graded",
    "node_reduction",
    "ungraded_iterations",
    "graded_iterations",
    "iteration_reduction",
];

fn parse_cell<T: std::str::FromStr>(
    cell: &str,
    line: usize,
    col: &str,
) -> Result<Option<T>, ExperimentError> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse().map(Some).map_err(|_| ExperimentError::Parse {
        line,
        message: format!("invalid {col} `{cell}`"),
    })
}

/// Aggregates a comparison CSV into per-trial node-count and iteration
/// series.
pub fn report(csv_in: &str) -> Result<String, ExperimentError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(csv_in.as_bytes());
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(REPORT_HEADER)?;
    let mut records = reader.records();
    match records.next() {
        None => {}
        Some(header) => {
            let header = header.map_err(|e| csv_parse_error(e, 1))?;
            if header.iter().ne(COMPARE_HEADER) {
                return Err(ExperimentError::Parse {
                    line: 1,
                    message: format!("expected header `{}`", COMPARE_HEADER.join(",")),
                });
            }
        }
    }
    for (i, rec) in records.enumerate() {
        let fallback_line = i + 2;
        let rec = rec.map_err(|e| csv_parse_error(e, fallback_line))?;
        let line = rec.position().map_or(fallback_line, |p| p.line() as usize);
        if rec.len() != COMPARE_HEADER.len() {
            return Err(ExperimentError::Parse {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    COMPARE_HEADER.len(),
                    rec.len()
                ),
            });
        }
        let trial: usize =
            parse_cell(&rec[0], line, "trial")?.ok_or_else(|| ExperimentError::Parse {
                line,
                message: "missing trial".into(),
            })?;
        let ui: Option<usize> = parse_cell(&rec[1], line, "ungraded_iterations")?;
        parse_cell::<f64>(&rec[2], line, "ungraded_fitness")?;
        let gi: Option<usize> = parse_cell(&rec[3], line, "graded_iterations")?;
        parse_cell::<f64>(&rec[4], line, "graded_fitness")?;
        let total: Option<usize> = parse_cell(&rec[5], line, "nodes_total")?;
        let kept: Option<usize> = parse_cell(&rec[6], line, "nodes_graded")?;
        let show = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
        let diff = |a: Option<usize>, b: Option<usize>| match (a, b) {
            (Some(a), Some(b)) => (a as i64 - b as i64).to_string(),
            _ => String::new(),
        };
        out.write_record([
            trial.to_string(),
            show(total),
            show(kept),
            diff(total, kept),
            show(ui),
            show(gi),
            diff(ui, gi),
        ])?;
    }
    let bytes = out
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_parse_error(e: csv::Error, fallback_line: usize) -> ExperimentError {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    ExperimentError::Parse {
        line,
        message: e.to_string(),
    }
}
