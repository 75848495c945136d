//! Browser bindings for the grade-route demo page.
//!
//! Every operation is stateless: the page sends the generator parameters
//! and seed along with each request and the topology is rebuilt from them.
//! The plain Rust functions return serde structs; the `#[wasm_bindgen]`
//! wrappers hand JSON strings to JavaScript.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use grade_route::experiment::{self, ExperimentConfig, RouteMode, RouteRequest};
use grade_route::pso::SwarmConfig;
use grade_route::seed;
use grade_route::topology::{generate_topology, GeneratorParams, NodeId, Topology};
use grade_route::traffic::{Thresholds, TrafficMatrix, TrafficModel};

const DEMAND_DENSITY: f64 = 0.15;

#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub regions: usize,
    pub pnr: usize,
    pub seed: u64,
}

impl Scenario {
    fn build(&self) -> Result<(Topology, TrafficModel), String> {
        let params = GeneratorParams {
            region_count: self.regions,
            pnr: self.pnr,
            ..GeneratorParams::default()
        };
        let t = generate_topology(&params, self.seed).map_err(|e| e.to_string())?;
        let demands = TrafficMatrix::synthetic(
            t.node_count(),
            DEMAND_DENSITY,
            0.1,
            1.0,
            seed::derive(self.seed, &[1]),
        );
        let model = TrafficModel::new(&t, demands, 1.0).map_err(|e| e.to_string())?;
        Ok((t, model))
    }
}

#[derive(Debug, Serialize)]
pub struct NodeView {
    pub id: usize,
    pub region: usize,
    pub x: f64,
    pub y: f64,
    pub alive: bool,
    pub priority: u8,
    pub grade: i8,
    pub kept: bool,
    /// Why Level-1 kept the node, or "excluded".
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct LinkView {
    pub u: usize,
    pub v: usize,
    pub bandwidth: f64,
    pub kept: bool,
}

#[derive(Debug, Serialize)]
pub struct GradedView {
    pub nodes: Vec<NodeView>,
    pub links: Vec<LinkView>,
    pub kept: usize,
    pub widened: bool,
    pub connected: bool,
}

/// Regions sit on a ring and each region's nodes on a small ring around
/// the region center, all inside the unit square.
fn layout(t: &Topology) -> Vec<(f64, f64)> {
    use std::f64::consts::TAU;
    let r = t.region_count() as f64;
    let (big, small) = if t.region_count() == 1 {
        (0.0, 0.4)
    } else {
        (0.32, 0.14)
    };
    t.nodes()
        .iter()
        .map(|n| {
            let a = TAU * n.region.0 as f64 / r;
            let k = (n.id.0 % t.pnr()) as f64;
            let b = TAU * k / t.pnr() as f64 + a;
            (
                0.5 + big * a.cos() + small * b.cos(),
                0.5 + big * a.sin() + small * b.sin(),
            )
        })
        .collect()
}

fn endpoints(t: &Topology, source: usize, dest: usize) -> Result<(NodeId, NodeId), String> {
    let n = t.node_count();
    if source >= n || dest >= n {
        return Err(format!("nodes are numbered 0..{}", n - 1));
    }
    if source == dest {
        return Err("source and destination must differ".into());
    }
    Ok((NodeId(source), NodeId(dest)))
}

/// Generates the scenario and runs Level-1 grading for one request.
pub fn graded_view(sc: Scenario, source: usize, dest: usize) -> Result<GradedView, String> {
    let (t, model) = sc.build()?;
    let (s, d) = endpoints(&t, source, dest)?;
    let g =
        experiment::grade(&t, &model, &Thresholds::default(), s, d).map_err(|e| e.to_string())?;
    let sub = &g.subgraph;
    let pos = layout(&t);
    let nodes = t
        .nodes()
        .iter()
        .map(|n| NodeView {
            id: n.id.0,
            region: n.region.0,
            x: pos[n.id.0].0,
            y: pos[n.id.0].1,
            alive: n.attrs.is_alive(),
            priority: g.grades[n.id.0].priority.value(),
            grade: g.grades[n.id.0].grade.value(),
            kept: sub.is_kept(n.id),
            reason: sub
                .reason(n.id)
                .map_or("excluded", |r| r.as_str())
                .to_string(),
        })
        .collect();
    let links = t
        .links()
        .iter()
        .map(|l| LinkView {
            u: l.u.0,
            v: l.v.0,
            bandwidth: l.bandwidth,
            kept: sub.is_kept(l.u) && sub.is_kept(l.v),
        })
        .collect();
    Ok(GradedView {
        nodes,
        links,
        kept: sub.kept_count(),
        widened: sub.widened(),
        connected: sub.connected(),
    })
}

#[derive(Debug, Serialize)]
pub struct RouteView {
    pub mode: String,
    pub path: Vec<usize>,
    pub valid: bool,
    pub fitness: f64,
    pub iterations_to_converge: Option<usize>,
    /// Best fitness after each iteration (index 0 is the initial swarm).
    pub trace: Vec<f64>,
    pub nodes_considered: usize,
    pub nodes_total: usize,
}

fn parse_mode(mode: &str) -> Result<RouteMode, String> {
    match mode {
        "ungraded" => Ok(RouteMode::Ungraded),
        "graded" => Ok(RouteMode::Graded),
        "oracle" => Ok(RouteMode::Oracle),
        other => Err(format!("unknown mode `{other}`")),
    }
}

pub fn route_view(
    sc: Scenario,
    source: usize,
    dest: usize,
    mode: &str,
    perturbation: f64,
) -> Result<RouteView, String> {
    let (t, model) = sc.build()?;
    let (s, d) = endpoints(&t, source, dest)?;
    let req = RouteRequest {
        source: s,
        dest: d,
        mode: parse_mode(mode)?,
        swarm: SwarmConfig {
            window: t.pnr(),
            perturbation,
            seed: seed::derive(sc.seed, &[2]),
            ..SwarmConfig::default()
        },
        thresholds: Thresholds::default(),
    };
    let r = experiment::route(&t, &model, &req).map_err(|e| e.to_string())?;
    Ok(RouteView {
        mode: r.mode.as_str().to_string(),
        path: r.path.nodes.iter().map(|n| n.0).collect(),
        valid: r.path.valid,
        fitness: r.fitness,
        iterations_to_converge: r.run.as_ref().map(|run| run.iterations_to_converge),
        trace: r.run.map(|run| run.trace).unwrap_or_default(),
        nodes_considered: r.nodes_considered,
        nodes_total: r.nodes_total,
    })
}

#[derive(Debug, Serialize)]
pub struct CompareRowView {
    pub trial: usize,
    pub ungraded_iterations: usize,
    pub ungraded_fitness: f64,
    pub graded_iterations: usize,
    pub graded_fitness: f64,
    pub nodes_total: usize,
    pub nodes_graded: usize,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct CompareView {
    pub rows: Vec<CompareRowView>,
    pub median_iteration_reduction: f64,
    pub fraction_graded_not_slower: f64,
    pub mean_node_ratio: f64,
    pub csv: String,
}

pub fn compare_view(sc: Scenario, trials: usize) -> Result<CompareView, String> {
    let cfg = ExperimentConfig {
        topology: GeneratorParams {
            region_count: sc.regions,
            pnr: sc.pnr,
            ..GeneratorParams::default()
        },
        trial_count: trials,
        master_seed: sc.seed,
        ..ExperimentConfig::default()
    };
    let report = experiment::compare(&cfg).map_err(|e| e.to_string())?;
    let csv = experiment::comparison_csv(&report.rows);
    Ok(CompareView {
        rows: report
            .rows
            .into_iter()
            .map(|r| CompareRowView {
                trial: r.trial,
                ungraded_iterations: r.ungraded_iterations,
                ungraded_fitness: r.ungraded_fitness,
                graded_iterations: r.graded_iterations,
                graded_fitness: r.graded_fitness,
                nodes_total: r.nodes_total,
                nodes_graded: r.nodes_graded,
                error: r.error,
            })
            .collect(),
        median_iteration_reduction: report.summary.median_iteration_reduction,
        fraction_graded_not_slower: report.summary.fraction_graded_not_slower,
        mean_node_ratio: report.summary.mean_node_ratio,
        csv,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn generate_graded(
    regions: usize,
    pnr: usize,
    seed: u32,
    source: usize,
    dest: usize,
) -> Result<String, JsValue> {
    to_js(graded_view(
        Scenario {
            regions,
            pnr,
            seed: seed.into(),
        },
        source,
        dest,
    ))
}

#[wasm_bindgen]
pub fn find_route(
    regions: usize,
    pnr: usize,
    seed: u32,
    source: usize,
    dest: usize,
    mode: &str,
    perturbation: f64,
) -> Result<String, JsValue> {
    to_js(route_view(
        Scenario {
            regions,
            pnr,
            seed: seed.into(),
        },
        source,
        dest,
        mode,
        perturbation,
    ))
}

#[wasm_bindgen]
pub fn run_compare(
    regions: usize,
    pnr: usize,
    seed: u32,
    trials: usize,
) -> Result<String, JsValue> {
    to_js(compare_view(
        Scenario {
            regions,
            pnr,
            seed: seed.into(),
        },
        trials,
    ))
}
