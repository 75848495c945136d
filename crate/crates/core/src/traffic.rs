//! M/M/1 traffic model.
//!
//! External demands `gamma[j][k]` (messages/sec from `j` to `k`) are routed on
//! minimum-hop paths to obtain per-link flows `lambda_i`. Each link behaves as
//! an M/M/1 queue with service rate `mu * C_i`, contributing
//! `lambda_i / (mu * C_i - lambda_i)` to the delay.

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::Path;

use rand::Rng as _;
use thiserror::Error;

use crate::seed;
use crate::text::{content_lines, sig9};
use crate::topology::{LinkId, NodeId, Topology};

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("traffic matrix covers {found} nodes but topology has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("demand {0}->{0} from a node to itself")]
    SelfDemand(NodeId),
    #[error("demand {j}->{k} refers to a node outside 0..{node_count}")]
    UnknownNode {
        j: NodeId,
        k: NodeId,
        node_count: usize,
    },
    #[error("demand {j}->{k} must be finite and non-negative, got {gamma}")]
    InvalidDemand { j: NodeId, k: NodeId, gamma: f64 },
    #[error("demand {0}->{1} declared twice")]
    DuplicateDemand(NodeId, NodeId),
    #[error("no route for demand {0}->{1}: nodes are disconnected")]
    NoRoute(NodeId, NodeId),
    #[error("link {u}-{v} saturated: flow {flow} >= mu*C = {service}")]
    Saturated {
        u: NodeId,
        v: NodeId,
        flow: f64,
        service: f64,
    },
    #[error("service rate mu must be positive, got {0}")]
    InvalidMu(f64),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sparse external traffic matrix. Omitted pairs carry zero demand.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrafficMatrix {
    node_count: usize,
    demands: BTreeMap<(NodeId, NodeId), f64>,
}

impl TrafficMatrix {
    pub fn new(node_count: usize) -> Self {
        TrafficMatrix {
            node_count,
            demands: BTreeMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn set(&mut self, j: NodeId, k: NodeId, gamma: f64) -> Result<(), TrafficError> {
        if j.0 >= self.node_count || k.0 >= self.node_count {
            return Err(TrafficError::UnknownNode {
                j,
                k,
                node_count: self.node_count,
            });
        }
        if j == k {
            return Err(TrafficError::SelfDemand(j));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(TrafficError::InvalidDemand { j, k, gamma });
        }
        if gamma == 0.0 {
            self.demands.remove(&(j, k));
        } else {
            self.demands.insert((j, k), gamma);
        }
        Ok(())
    }

    pub fn get(&self, j: NodeId, k: NodeId) -> f64 {
        self.demands.get(&(j, k)).copied().unwrap_or(0.0)
    }

    /// Non-zero demands in `(j, k)` order.
    pub fn demands(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.demands.iter().map(|(&(j, k), &g)| (j, k, g))
    }

    pub fn total(&self) -> f64 {
        self.demands.values().sum()
    }

    /// Random demands: each ordered pair gets a demand with probability
    /// `density`, sized uniformly in `[lo, hi]`.
    pub fn synthetic(node_count: usize, density: f64, lo: f64, hi: f64, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut m = TrafficMatrix::new(node_count);
        for j in 0..node_count {
            for k in 0..node_count {
                if j != k && rng.gen_bool(density.clamp(0.0, 1.0)) {
                    let g = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
                    let g = crate::text::quantize9(g);
                    m.set(NodeId(j), NodeId(k), g)
                        .expect("synthetic demand is valid");
                }
            }
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("traffic v1\n");
        for (j, k, g) in self.demands() {
            out.push_str(&format!("demand {j} {k} {}\n", sig9(g)));
        }
        out
    }

    /// Parses the `traffic v1` format for a topology of `node_count` nodes.
    pub fn from_text(text: &str, node_count: usize) -> Result<Self, TrafficError> {
        let mut lines = content_lines(text);
        match lines.next() {
            Some((_, "traffic v1")) => {}
            Some((line, other)) => {
                return Err(TrafficError::Parse {
                    line,
                    message: format!("expected header `traffic v1`, found `{other}`"),
                })
            }
            None => {
                return Err(TrafficError::Parse {
                    line: 1,
                    message: "empty traffic file".into(),
                })
            }
        }
        let mut m = TrafficMatrix::new(node_count);
        for (line, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            let parsed = match f.as_slice() {
                ["demand", j, k, g] => j
                    .parse()
                    .ok()
                    .zip(k.parse().ok())
                    .zip(g.parse::<f64>().ok()),
                _ => None,
            };
            let ((j, k), g) = parsed.ok_or_else(|| TrafficError::Parse {
                line,
                message: format!("expected `demand <j> <k> <gamma>`, found `{l}`"),
            })?;
            let (j, k) = (NodeId(j), NodeId(k));
            if m.demands.contains_key(&(j, k)) {
                return Err(TrafficError::Parse {
                    line,
                    message: TrafficError::DuplicateDemand(j, k).to_string(),
                });
            }
            m.set(j, k, g).map_err(|e| TrafficError::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TrafficError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, node_count: usize) -> Result<Self, TrafficError> {
        TrafficMatrix::from_text(&fs::read_to_string(path)?, node_count)
    }
}

/// Per-link average message flow `lambda_i`, indexed by [`LinkId`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinkFlows(pub Vec<f64>);

impl LinkFlows {
    pub fn zero(link_count: usize) -> Self {
        LinkFlows(vec![0.0; link_count])
    }

    pub fn get(&self, l: LinkId) -> f64 {
        self.0[l.0]
    }
}

/// Minimum-hop path from `s` to `d`; among equal-length paths the
/// lexicographically smallest node sequence wins.
///
/// BFS that scans neighbors in ascending order and keeps the first
/// discoverer as parent yields exactly that path.
pub fn min_hop_path(t: &Topology, s: NodeId, d: NodeId) -> Option<Vec<NodeId>> {
    if !t.contains(s) || !t.contains(d) {
        return None;
    }
    let mut parent: Vec<Option<NodeId>> = vec![None; t.node_count()];
    let mut seen = vec![false; t.node_count()];
    seen[s.0] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(n) = queue.pop_front() {
        if n == d {
            let mut path = vec![d];
            let mut cur = d;
            while let Some(p) = parent[cur.0] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for &(m, _) in t.neighbors(n).expect("node in range") {
            if !seen[m.0] {
                seen[m.0] = true;
                parent[m.0] = Some(n);
                queue.push_back(m);
            }
        }
    }
    None
}

/// Routes every demand on its minimum-hop path and accumulates link flows.
pub fn compute_flows(t: &Topology, gamma: &TrafficMatrix) -> Result<LinkFlows, TrafficError> {
    if gamma.node_count() != t.node_count() {
        return Err(TrafficError::Dimension {
            expected: t.node_count(),
            found: gamma.node_count(),
        });
    }
    let mut flows = LinkFlows::zero(t.links().len());
    for (j, k, g) in gamma.demands() {
        let path = min_hop_path(t, j, k).ok_or(TrafficError::NoRoute(j, k))?;
        for hop in path.windows(2) {
            let l = t
                .link_between(hop[0], hop[1])
                .expect("consecutive path nodes are linked");
            flows.0[l.0] += g;
        }
    }
    Ok(flows)
}

fn delay_term(t: &Topology, flows: &LinkFlows, mu: f64, l: LinkId) -> Result<f64, TrafficError> {
    let link = t.link(l);
    let lambda = flows.get(l);
    let service = mu * link.capacity;
    if lambda >= service {
        return Err(TrafficError::Saturated {
            u: link.u,
            v: link.v,
            flow: lambda,
            service,
        });
    }
    Ok(lambda / (service - lambda))
}

/// Queueing delay `sum lambda_i / (mu * C_i - lambda_i)` over `links`.
/// Passing every link gives the network-wide delay.
pub fn total_delay(
    t: &Topology,
    flows: &LinkFlows,
    mu: f64,
    links: impl IntoIterator<Item = LinkId>,
) -> Result<f64, TrafficError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(TrafficError::InvalidMu(mu));
    }
    links.into_iter().map(|l| delay_term(t, flows, mu, l)).sum()
}

/// The demands, service scale and resulting flows for one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficModel {
    pub gamma: TrafficMatrix,
    pub mu: f64,
    pub flows: LinkFlows,
}

impl TrafficModel {
    pub fn new(t: &Topology, gamma: TrafficMatrix, mu: f64) -> Result<Self, TrafficError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(TrafficError::InvalidMu(mu));
        }
        let flows = compute_flows(t, &gamma)?;
        Ok(TrafficModel { gamma, mu, flows })
    }

    pub fn idle(t: &Topology, mu: f64) -> Result<Self, TrafficError> {
        TrafficModel::new(t, TrafficMatrix::new(t.node_count()), mu)
    }

    pub fn network_delay(&self, t: &Topology) -> Result<f64, TrafficError> {
        total_delay(t, &self.flows, self.mu, (0..t.links().len()).map(LinkId))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Node delay above this flags the node as delayed.
    pub delay: f64,
    /// Incident-link utilization above this flags congestion.
    pub utilization: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            delay: 1.0,
            utilization: 0.8,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), TrafficError> {
        if !(self.delay > 0.0 && self.delay.is_finite()) {
            return Err(TrafficError::InvalidThreshold(format!(
                "delay threshold must be positive, got {}",
                self.delay
            )));
        }
        if !(self.utilization > 0.0 && self.utilization < 1.0) {
            return Err(TrafficError::InvalidThreshold(format!(
                "utilization threshold must lie in (0, 1), got {}",
                self.utilization
            )));
        }
        Ok(())
    }
}

/// Observed per-node state feeding the priority rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NodeDynamics {
    pub delay_present: bool,
    pub congestion_present: bool,
    /// In-degree of the node.
    pub density: usize,
}

/// Derives delay, congestion and density flags for every node.
///
/// A node's delay is the queueing delay summed over its incident links and
/// its congestion is the worst incident-link utilization. A saturated
/// incident link sets both flags.
pub fn derive_dynamics(
    t: &Topology,
    model: &TrafficModel,
    thresholds: &Thresholds,
) -> Result<Vec<NodeDynamics>, TrafficError> {
    thresholds.validate()?;
    if model.flows.0.len() != t.links().len() {
        return Err(TrafficError::Dimension {
            expected: t.links().len(),
            found: model.flows.0.len(),
        });
    }
    let dynamics = (0..t.node_count())
        .map(|i| {
            let adj = t.neighbors(NodeId(i)).expect("node in range");
            let mut delay = 0.0;
            let mut worst_util: f64 = 0.0;
            let mut saturated = false;
            for &(_, l) in adj {
                let lambda = model.flows.get(l);
                let service = model.mu * t.link(l).capacity;
                if lambda >= service {
                    saturated = true;
                    continue;
                }
                delay += lambda / (service - lambda);
                worst_util = worst_util.max(lambda / service);
            }
            NodeDynamics {
                delay_present: saturated || delay > thresholds.delay,
                congestion_present: saturated || worst_util > thresholds.utilization,
                density: adj.len(),
            }
        })
        .collect();
    Ok(dynamics)
}
