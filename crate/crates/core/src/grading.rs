//! Level-1: node priorities, grades, and the graded subgraph.
//!
//! Each node is classified by a fixed rule chain into a priority class
//! `1..=6` (1 best), which maps onto the `-3..=+3` grade scale where 0 is
//! the most desirable node and -3 a node without remaining lifetime.
//! [`level1_select`] then keeps the nodes worth routing through.

use std::fmt;

use thiserror::Error;

use crate::graph::RoutingGraph;
use crate::topology::{LinkId, NodeAttributes, NodeId, RegionId, Topology};
use crate::traffic::NodeDynamics;

/// Nodes at this in-degree or above are treated as over-dense.
pub const DENSITY_LIMIT: usize = 5;

/// How many nodes per region are always retained.
pub const TOP_PER_REGION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Priority(u8);

impl Priority {
    pub fn new(value: u8) -> Option<Priority> {
        (1..=6).contains(&value).then_some(Priority(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grade(i8);

impl Grade {
    pub const OPTIMAL: Grade = Grade(0);

    pub fn new(value: i8) -> Option<Grade> {
        (-3..=3).contains(&value).then_some(Grade(value))
    }

    pub fn value(self) -> i8 {
        self.0
    }

    fn within(self, lo: i8, hi: i8) -> bool {
        (lo..=hi).contains(&self.0)
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The priority rule chain. Checks run outermost first: dead node, then
/// over-density, congestion, missing resources, and delay.
pub fn assign_priority(attrs: &NodeAttributes, dynamics: &NodeDynamics) -> Priority {
    let p = if !attrs.is_alive() {
        6
    } else if dynamics.density >= DENSITY_LIMIT {
        5
    } else if dynamics.congestion_present {
        4
    } else if !attrs.resource_allocated {
        3
    } else if dynamics.delay_present {
        2
    } else {
        1
    };
    Priority(p)
}

/// Places a priority class on the grade scale. Usable-but-degraded classes
/// (delay, no resources, congestion) take the positive side in worsening
/// order; over-dense and dead nodes take the negative side.
pub fn priority_to_grade(p: Priority) -> Grade {
    Grade(match p.0 {
        1 => 0,
        2 => 1,
        3 => 2,
        4 => 3,
        5 => -2,
        _ => -3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeGrade {
    pub priority: Priority,
    pub grade: Grade,
}

/// Priorities and grades for every node of `t`.
pub fn grade_nodes(t: &Topology, dynamics: &[NodeDynamics]) -> Vec<NodeGrade> {
    assert_eq!(
        dynamics.len(),
        t.node_count(),
        "one dynamics entry per node"
    );
    t.nodes()
        .iter()
        .zip(dynamics)
        .map(|(n, d)| {
            let priority = assign_priority(&n.attrs, d);
            NodeGrade {
                priority,
                grade: priority_to_grade(priority),
            }
        })
        .collect()
}

/// Why a node survived Level-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeepReason {
    Endpoint,
    InRange,
    Top3,
    Fallback,
}

impl KeepReason {
    pub fn as_str(self) -> &'static str {
        match self {
            KeepReason::Endpoint => "endpoint",
            KeepReason::InRange => "in-range",
            KeepReason::Top3 => "top3",
            KeepReason::Fallback => "fallback",
        }
    }
}

#[derive(Debug, Error)]
pub enum GradingError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("source and destination are both {0}")]
    SameEndpoints(NodeId),
    #[error("{found} grades supplied for {expected} nodes")]
    GradeCount { expected: usize, found: usize },
}

/// The nodes kept by Level-1, with the links they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedSubgraph {
    reasons: Vec<Option<KeepReason>>,
    graph: RoutingGraph,
    widened: bool,
    connected: bool,
}

impl GradedSubgraph {
    pub fn is_kept(&self, n: NodeId) -> bool {
        self.reasons.get(n.0).is_some_and(Option::is_some)
    }

    pub fn kept_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.reasons
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_some())
            .map(|(i, _)| NodeId(i))
    }

    pub fn kept_count(&self) -> usize {
        self.reasons.iter().filter(|r| r.is_some()).count()
    }

    pub fn reason(&self, n: NodeId) -> Option<KeepReason> {
        self.reasons.get(n.0).copied().flatten()
    }

    pub fn induced_links(&self) -> Vec<LinkId> {
        self.graph.link_ids()
    }

    /// The view Level-2 searches.
    pub fn graph(&self) -> &RoutingGraph {
        &self.graph
    }

    /// Whether the `[-2, +3]` fallback band had to be applied.
    pub fn widened(&self) -> bool {
        self.widened
    }

    /// Whether the destination is reachable from the source in the subgraph.
    pub fn connected(&self) -> bool {
        self.connected
    }
}

/// True iff `dest` is reachable from `source` inside `g`.
pub fn verify_connectivity(g: &GradedSubgraph, source: NodeId, dest: NodeId) -> bool {
    g.graph.reachable(source, dest)
}

/// Level-1 node selection.
///
/// Keeps the endpoints, every node graded in `[0, +2]`, and the three best
/// nodes of each region ranked by `|grade|`, then node bandwidth (higher
/// first), then id. If the endpoints end up disconnected, nodes graded in
/// `[-2, +3]` are added once; a still-disconnected result is returned with
/// [`GradedSubgraph::connected`] false.
pub fn level1_select(
    t: &Topology,
    grades: &[Grade],
    source: NodeId,
    dest: NodeId,
) -> Result<GradedSubgraph, GradingError> {
    for n in [source, dest] {
        if !t.contains(n) {
            return Err(GradingError::UnknownNode(n));
        }
    }
    if source == dest {
        return Err(GradingError::SameEndpoints(source));
    }
    if grades.len() != t.node_count() {
        return Err(GradingError::GradeCount {
            expected: t.node_count(),
            found: grades.len(),
        });
    }

    let mut reasons: Vec<Option<KeepReason>> = vec![None; t.node_count()];
    for r in 0..t.region_count() {
        let mut members: Vec<NodeId> = t.region_nodes(RegionId(r)).collect();
        members.sort_by(|&a, &b| {
            let bw = |n: NodeId| t.nodes()[n.0].attrs.bandwidth;
            grades[a.0]
                .0
                .unsigned_abs()
                .cmp(&grades[b.0].0.unsigned_abs())
                .then(bw(b).total_cmp(&bw(a)))
                .then(a.cmp(&b))
        });
        for n in members.into_iter().take(TOP_PER_REGION) {
            reasons[n.0] = Some(KeepReason::Top3);
        }
    }
    for (i, g) in grades.iter().enumerate() {
        if g.within(0, 2) {
            reasons[i] = Some(KeepReason::InRange);
        }
    }
    reasons[source.0] = Some(KeepReason::Endpoint);
    reasons[dest.0] = Some(KeepReason::Endpoint);

    let mask =
        |reasons: &[Option<KeepReason>]| reasons.iter().map(Option::is_some).collect::<Vec<_>>();
    let mut graph = RoutingGraph::induced(t, &mask(&reasons));
    let mut widened = false;
    if !graph.reachable(source, dest) {
        widened = true;
        for (i, g) in grades.iter().enumerate() {
            if reasons[i].is_none() && g.within(-2, 3) {
                reasons[i] = Some(KeepReason::Fallback);
            }
        }
        graph = RoutingGraph::induced(t, &mask(&reasons));
    }
    let connected = graph.reachable(source, dest);
    Ok(GradedSubgraph {
        reasons,
        graph,
        widened,
        connected,
    })
}

/// CSV report with columns `node,region,priority,grade,kept,reason`.
pub fn grade_report_csv(t: &Topology, grades: &[NodeGrade], g: &GradedSubgraph) -> String {
    let mut out = String::from("node,region,priority,grade,kept,reason\n");
    for (n, ng) in t.nodes().iter().zip(grades) {
        let reason = g.reason(n.id);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            n.id,
            n.region,
            ng.priority,
            ng.grade,
            u8::from(reason.is_some()),
            reason.map_or("excluded", KeepReason::as_str)
        ));
    }
    out
}
