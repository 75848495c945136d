//! Region-based network topologies.
//!
//! Nodes are partitioned into `region_count` regions of exactly `pnr` nodes
//! each. Links are undirected, carry a bandwidth (the path-fitness weight)
//! and a capacity (the queueing-delay weight), and at most one link joins
//! any unordered pair of nodes.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use thiserror::Error;

use crate::seed;
use crate::text::{content_lines, quantize9, sig9};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionId(pub usize);

/// Index into [`Topology::links`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Static per-node inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeAttributes {
    /// Remaining lifetime; zero means the node is dead.
    pub network_lifetime: f64,
    pub resource_allocated: bool,
    /// Mbps, strictly positive.
    pub bandwidth: f64,
}

impl NodeAttributes {
    pub fn is_alive(&self) -> bool {
        self.network_lifetime > 0.0
    }
}

impl Default for NodeAttributes {
    fn default() -> Self {
        NodeAttributes {
            network_lifetime: 100.0,
            resource_allocated: true,
            bandwidth: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub region: RegionId,
    pub attrs: NodeAttributes,
}

/// An undirected link, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub u: NodeId,
    pub v: NodeId,
    pub bandwidth: f64,
    pub capacity: f64,
}

impl Link {
    /// The endpoint opposite `n`. `n` must be an endpoint.
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown region {0}")]
    UnknownRegion(RegionId),
    #[error("node {0} declared twice")]
    DuplicateNode(NodeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate link {0}-{1}")]
    DuplicateLink(NodeId, NodeId),
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("network lifetime must be non-negative, got {0}")]
    NegativeLifetime(f64),
    #[error("expected {expected} nodes (regions x pnr), found {found}")]
    NodeCount { expected: usize, found: usize },
    #[error("region {region} holds {found} nodes, expected {expected}")]
    RegionSize {
        region: RegionId,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<TopologyError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TopologyError {
    fn at(self, line: usize) -> Self {
        TopologyError::AtLine {
            line,
            source: Box::new(self),
        }
    }

    /// True for malformed or inconsistent file content (as opposed to I/O).
    pub fn is_data_error(&self) -> bool {
        !matches!(self, TopologyError::Io(_))
    }
}

/// An immutable region-partitioned topology.
#[derive(Debug, Clone)]
pub struct Topology {
    region_count: usize,
    pnr: usize,
    nodes: Vec<Node>,
    links: Vec<Link>,
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
    pair_index: HashMap<(usize, usize), LinkId>,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.region_count == other.region_count
            && self.pnr == other.pnr
            && self.nodes == other.nodes
            && self.links == other.links
    }
}

impl Topology {
    pub fn region_count(&self) -> usize {
        self.region_count
    }

    /// Nodes per region.
    pub fn pnr(&self) -> usize {
        self.pnr
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, n: NodeId) -> Result<&Node, TopologyError> {
        self.nodes.get(n.0).ok_or(TopologyError::UnknownNode(n))
    }

    pub fn link(&self, l: LinkId) -> &Link {
        &self.links[l.0]
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.0 < self.nodes.len()
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.pair_index.get(&ordered(a, b)).copied()
    }

    /// Neighbors of `n` with the joining link, in ascending node order.
    pub fn neighbors(&self, n: NodeId) -> Result<&[(NodeId, LinkId)], TopologyError> {
        self.adjacency
            .get(n.0)
            .map(Vec::as_slice)
            .ok_or(TopologyError::UnknownNode(n))
    }

    /// Number of links incident to `n`. Links are undirected, so this is
    /// also the node's in-degree.
    pub fn in_degree(&self, n: NodeId) -> Result<usize, TopologyError> {
        self.neighbors(n).map(<[_]>::len)
    }

    /// Nodes belonging to region `r`, ascending.
    pub fn region_nodes(&self, r: RegionId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(move |n| n.region == r)
            .map(|n| n.id)
    }

    /// Single-region topology over `node_count` default nodes. Each edge is
    /// `(u, v, bandwidth)` and gets a capacity equal to its bandwidth.
    pub fn from_edges(
        node_count: usize,
        edges: &[(usize, usize, f64)],
    ) -> Result<Topology, TopologyError> {
        let mut b = TopologyBuilder::new(1, node_count)?;
        for i in 0..node_count {
            b.add_node(NodeId(i), RegionId(0), NodeAttributes::default())?;
        }
        for &(u, v, bw) in edges {
            b.add_link(NodeId(u), NodeId(v), bw, bw)?;
        }
        b.build()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("topology v1\n");
        out.push_str(&format!("regions {} pnr {}\n", self.region_count, self.pnr));
        for n in &self.nodes {
            out.push_str(&format!(
                "node {} {} {} {} {}\n",
                n.id,
                n.region,
                sig9(n.attrs.bandwidth),
                sig9(n.attrs.network_lifetime),
                u8::from(n.attrs.resource_allocated)
            ));
        }
        for l in &self.links {
            out.push_str(&format!(
                "link {} {} {} {}\n",
                l.u,
                l.v,
                sig9(l.bandwidth),
                sig9(l.capacity)
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Topology, TopologyError> {
        let mut lines = content_lines(text);
        match lines.next() {
            Some((_, "topology v1")) => {}
            Some((line, other)) => {
                return Err(TopologyError::Parse {
                    line,
                    message: format!("expected header `topology v1`, found `{other}`"),
                })
            }
            None => {
                return Err(TopologyError::Parse {
                    line: 1,
                    message: "empty topology file".into(),
                })
            }
        }
        let mut builder = match lines.next() {
            Some((line, l)) => {
                let f: Vec<&str> = l.split_whitespace().collect();
                if f.len() != 4 || f[0] != "regions" || f[2] != "pnr" {
                    return Err(TopologyError::Parse {
                        line,
                        message: format!("expected `regions <R> pnr <P>`, found `{l}`"),
                    });
                }
                let regions = parse_field::<usize>(f[1], line, "region count")?;
                let pnr = parse_field::<usize>(f[3], line, "pnr")?;
                TopologyBuilder::new(regions, pnr).map_err(|e| e.at(line))?
            }
            None => {
                return Err(TopologyError::Parse {
                    line: text.lines().count().max(1),
                    message: "missing `regions <R> pnr <P>` line".into(),
                })
            }
        };
        for (line, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            match f.first().copied() {
                Some("node") if f.len() == 6 => {
                    let id = NodeId(parse_field(f[1], line, "node id")?);
                    let region = RegionId(parse_field(f[2], line, "region")?);
                    let bandwidth = parse_field(f[3], line, "bandwidth")?;
                    let network_lifetime = parse_field(f[4], line, "lifetime")?;
                    let resource_allocated = match f[5] {
                        "0" => false,
                        "1" => true,
                        other => {
                            return Err(TopologyError::Parse {
                                line,
                                message: format!("resource flag must be 0 or 1, found `{other}`"),
                            })
                        }
                    };
                    let attrs = NodeAttributes {
                        network_lifetime,
                        resource_allocated,
                        bandwidth,
                    };
                    builder
                        .add_node(id, region, attrs)
                        .map_err(|e| e.at(line))?;
                }
                Some("link") if f.len() == 5 => {
                    let u = NodeId(parse_field(f[1], line, "node id")?);
                    let v = NodeId(parse_field(f[2], line, "node id")?);
                    let bw = parse_field(f[3], line, "bandwidth")?;
                    let cap = parse_field(f[4], line, "capacity")?;
                    builder.add_link(u, v, bw, cap).map_err(|e| e.at(line))?;
                }
                _ => {
                    return Err(TopologyError::Parse {
                        line,
                        message: format!("unrecognized line `{l}`"),
                    })
                }
            }
        }
        builder.build()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TopologyError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Topology, TopologyError> {
        Topology::from_text(&fs::read_to_string(path)?)
    }
}

fn ordered(a: NodeId, b: NodeId) -> (usize, usize) {
    if a.0 <= b.0 {
        (a.0, b.0)
    } else {
        (b.0, a.0)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, TopologyError> {
    s.parse().map_err(|_| TopologyError::Parse {
        line,
        message: format!("invalid {what} `{s}`"),
    })
}

/// Incremental, validating constructor for [`Topology`].
#[derive(Debug)]
pub struct TopologyBuilder {
    region_count: usize,
    pnr: usize,
    nodes: Vec<Option<Node>>,
    links: Vec<Link>,
    pair_index: HashMap<(usize, usize), LinkId>,
}

impl TopologyBuilder {
    pub fn new(region_count: usize, pnr: usize) -> Result<Self, TopologyError> {
        if region_count == 0 || pnr == 0 {
            return Err(TopologyError::InvalidParameter(format!(
                "regions and pnr must be >= 1 (got {region_count} and {pnr})"
            )));
        }
        Ok(TopologyBuilder {
            region_count,
            pnr,
            nodes: vec![None; region_count * pnr],
            links: Vec::new(),
            pair_index: HashMap::new(),
        })
    }

    pub fn add_node(
        &mut self,
        id: NodeId,
        region: RegionId,
        attrs: NodeAttributes,
    ) -> Result<(), TopologyError> {
        if region.0 >= self.region_count {
            return Err(TopologyError::UnknownRegion(region));
        }
        if !(attrs.bandwidth > 0.0 && attrs.bandwidth.is_finite()) {
            return Err(TopologyError::NonPositive {
                what: "node bandwidth",
                value: attrs.bandwidth,
            });
        }
        if !(attrs.network_lifetime >= 0.0 && attrs.network_lifetime.is_finite()) {
            return Err(TopologyError::NegativeLifetime(attrs.network_lifetime));
        }
        let slot = self
            .nodes
            .get_mut(id.0)
            .ok_or_else(|| TopologyError::NodeCount {
                expected: self.region_count * self.pnr,
                found: id.0 + 1,
            })?;
        if slot.is_some() {
            return Err(TopologyError::DuplicateNode(id));
        }
        *slot = Some(Node { id, region, attrs });
        Ok(())
    }

    pub fn has_link(&self, a: NodeId, b: NodeId) -> bool {
        self.pair_index.contains_key(&ordered(a, b))
    }

    pub fn add_link(
        &mut self,
        a: NodeId,
        b: NodeId,
        bandwidth: f64,
        capacity: f64,
    ) -> Result<LinkId, TopologyError> {
        for n in [a, b] {
            if n.0 >= self.nodes.len() {
                return Err(TopologyError::UnknownNode(n));
            }
        }
        if a == b {
            return Err(TopologyError::SelfLoop(a));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(TopologyError::NonPositive {
                what: "link bandwidth",
                value: bandwidth,
            });
        }
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(TopologyError::NonPositive {
                what: "link capacity",
                value: capacity,
            });
        }
        let key = ordered(a, b);
        if self.pair_index.contains_key(&key) {
            return Err(TopologyError::DuplicateLink(NodeId(key.0), NodeId(key.1)));
        }
        let id = LinkId(self.links.len());
        self.pair_index.insert(key, id);
        self.links.push(Link {
            u: NodeId(key.0),
            v: NodeId(key.1),
            bandwidth,
            capacity,
        });
        Ok(id)
    }

    pub fn build(self) -> Result<Topology, TopologyError> {
        let expected = self.region_count * self.pnr;
        let found = self.nodes.iter().filter(|n| n.is_some()).count();
        if found != expected {
            return Err(TopologyError::NodeCount { expected, found });
        }
        let nodes: Vec<Node> = self.nodes.into_iter().flatten().collect();
        let mut sizes = vec![0usize; self.region_count];
        for n in &nodes {
            sizes[n.region.0] += 1;
        }
        if let Some((r, &size)) = sizes.iter().enumerate().find(|(_, &s)| s != self.pnr) {
            return Err(TopologyError::RegionSize {
                region: RegionId(r),
                expected: self.pnr,
                found: size,
            });
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, l) in self.links.iter().enumerate() {
            adjacency[l.u.0].push((l.v, LinkId(i)));
            adjacency[l.v.0].push((l.u, LinkId(i)));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Topology {
            region_count: self.region_count,
            pnr: self.pnr,
            nodes,
            links: self.links,
            adjacency,
            pair_index: self.pair_index,
        })
    }
}

/// Closed sampling range `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    fn sample(&self, rng: &mut seed::Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.gen_range(self.min..=self.max)
        }
    }

    fn check(&self, what: &str) -> Result<(), TopologyError> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(TopologyError::InvalidParameter(format!(
                "{what} range [{}, {}] is empty or not finite",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Sampling ranges for generated node and link attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttrRanges {
    /// Lifetime of live nodes.
    pub lifetime: Range,
    /// Probability that a node is generated dead (lifetime 0).
    pub dead_prob: f64,
    pub node_bandwidth: Range,
    pub link_bandwidth: Range,
    pub capacity: Range,
    pub resource_prob: f64,
}

impl Default for AttrRanges {
    fn default() -> Self {
        AttrRanges {
            lifetime: Range::new(10.0, 100.0),
            dead_prob: 0.1,
            node_bandwidth: Range::new(1.0, 100.0),
            link_bandwidth: Range::new(1.0, 10.0),
            capacity: Range::new(10.0, 40.0),
            resource_prob: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub region_count: usize,
    pub pnr: usize,
    pub intra_edge_prob: f64,
    pub inter_edges_per_region_pair: usize,
    pub attrs: AttrRanges,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            region_count: 4,
            pnr: 8,
            intra_edge_prob: 0.4,
            inter_edges_per_region_pair: 2,
            attrs: AttrRanges::default(),
        }
    }
}

fn check_prob(p: f64, what: &str) -> Result<(), TopologyError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(TopologyError::InvalidParameter(format!(
            "{what} must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), TopologyError> {
        if self.region_count == 0 || self.pnr == 0 {
            return Err(TopologyError::InvalidParameter(
                "regions and pnr must be >= 1".into(),
            ));
        }
        check_prob(self.intra_edge_prob, "intra-region edge probability")?;
        check_prob(self.attrs.dead_prob, "dead-node probability")?;
        check_prob(self.attrs.resource_prob, "resource probability")?;
        let a = &self.attrs;
        a.lifetime.check("lifetime")?;
        a.node_bandwidth.check("node bandwidth")?;
        a.link_bandwidth.check("link bandwidth")?;
        a.capacity.check("capacity")?;
        if a.lifetime.min < 0.0 {
            return Err(TopologyError::InvalidParameter(
                "lifetime range must be non-negative".into(),
            ));
        }
        for (r, what) in [
            (a.node_bandwidth, "node bandwidth"),
            (a.link_bandwidth, "link bandwidth"),
            (a.capacity, "capacity"),
        ] {
            if r.min <= 0.0 {
                return Err(TopologyError::InvalidParameter(format!(
                    "{what} range must be strictly positive"
                )));
            }
        }
        Ok(())
    }
}

/// Generates a random region-based topology.
///
/// Node ids are laid out region by region, so region `r` owns ids
/// `r*pnr .. (r+1)*pnr`. Every region gets a random spanning tree first and
/// then each remaining intra-region pair is linked with `intra_edge_prob`.
/// Each pair of regions is then joined by up to
/// `inter_edges_per_region_pair` distinct random links. Sampled reals are
/// rounded to 9 significant digits so the text format round-trips exactly.
pub fn generate_topology(params: &GeneratorParams, seed: u64) -> Result<Topology, TopologyError> {
    params.validate()?;
    let mut rng = seed::rng(seed);
    let pnr = params.pnr;
    let a = &params.attrs;
    let mut b = TopologyBuilder::new(params.region_count, pnr)?;

    for i in 0..params.region_count * pnr {
        let network_lifetime = if rng.gen_bool(a.dead_prob) {
            0.0
        } else {
            quantize9(a.lifetime.sample(&mut rng))
        };
        let attrs = NodeAttributes {
            network_lifetime,
            resource_allocated: rng.gen_bool(a.resource_prob),
            bandwidth: quantize9(a.node_bandwidth.sample(&mut rng)),
        };
        b.add_node(NodeId(i), RegionId(i / pnr), attrs)?;
    }

    let link = |b: &mut TopologyBuilder, rng: &mut seed::Rng, u: usize, v: usize| {
        let bw = quantize9(a.link_bandwidth.sample(rng));
        let cap = quantize9(a.capacity.sample(rng));
        b.add_link(NodeId(u), NodeId(v), bw, cap).map(|_| ())
    };

    for r in 0..params.region_count {
        let base = r * pnr;
        let mut order: Vec<usize> = (base..base + pnr).collect();
        order.shuffle(&mut rng);
        for i in 1..order.len() {
            let parent = order[rng.gen_range(0..i)];
            link(&mut b, &mut rng, order[i], parent)?;
        }
        for u in base..base + pnr {
            for v in u + 1..base + pnr {
                if !b.has_link(NodeId(u), NodeId(v)) && rng.gen_bool(params.intra_edge_prob) {
                    link(&mut b, &mut rng, u, v)?;
                }
            }
        }
    }

    for ra in 0..params.region_count {
        for rb in ra + 1..params.region_count {
            let mut pairs: Vec<(usize, usize)> = (ra * pnr..(ra + 1) * pnr)
                .flat_map(|u| (rb * pnr..(rb + 1) * pnr).map(move |v| (u, v)))
                .collect();
            pairs.shuffle(&mut rng);
            for &(u, v) in pairs.iter().take(params.inter_edges_per_region_pair) {
                link(&mut b, &mut rng, u, v)?;
            }
        }
    }

    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star3() -> Topology {
        Topology::from_edges(3, &[(1, 0, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn smallest_generated_topology() {
        let p = GeneratorParams {
            region_count: 1,
            pnr: 1,
            intra_edge_prob: 0.7,
            inter_edges_per_region_pair: 3,
            ..Default::default()
        };
        let t = generate_topology(&p, 7).unwrap();
        assert_eq!(t.node_count(), 1);
        assert!(t.links().is_empty());
    }

    #[test]
    fn full_intra_probability_gives_cliques() {
        let p = GeneratorParams {
            region_count: 2,
            pnr: 3,
            intra_edge_prob: 1.0,
            inter_edges_per_region_pair: 1,
            ..Default::default()
        };
        let t = generate_topology(&p, 1).unwrap();
        assert_eq!(t.links().len(), 7);
        let intra = t
            .links()
            .iter()
            .filter(|l| t.nodes()[l.u.0].region == t.nodes()[l.v.0].region)
            .count();
        assert_eq!(intra, 6);
        for n in 0..3 {
            assert!(t.in_degree(NodeId(n)).unwrap() >= 2);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GeneratorParams {
            region_count: 4,
            pnr: 5,
            intra_edge_prob: 0.4,
            inter_edges_per_region_pair: 2,
            ..Default::default()
        };
        let a = generate_topology(&p, 42).unwrap();
        let b = generate_topology(&p, 42).unwrap();
        assert_eq!(a.node_count(), 20);
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(a, generate_topology(&p, 43).unwrap());
    }

    #[test]
    fn inverted_range_is_rejected() {
        let mut p = GeneratorParams::default();
        p.attrs.link_bandwidth = Range::new(5.0, 1.0);
        assert!(matches!(
            generate_topology(&p, 0),
            Err(TopologyError::InvalidParameter(_))
        ));
        let p = GeneratorParams {
            intra_edge_prob: 1.5,
            ..Default::default()
        };
        assert!(generate_topology(&p, 0).is_err());
    }

    #[test]
    fn degree_queries() {
        let t = Topology::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(t.in_degree(NodeId(3)).unwrap(), 0);
        assert_eq!(t.in_degree(NodeId(0)).unwrap(), 2);
        assert_eq!(star3().in_degree(NodeId(1)).unwrap(), 2);
        assert!(matches!(
            t.in_degree(NodeId(9)),
            Err(TopologyError::UnknownNode(NodeId(9)))
        ));
    }

    #[test]
    fn neighbors_are_sorted() {
        let t = Topology::from_edges(4, &[(0, 3, 1.0), (0, 2, 1.0), (0, 1, 1.0)]).unwrap();
        let ns: Vec<_> = t
            .neighbors(NodeId(0))
            .unwrap()
            .iter()
            .map(|p| p.0 .0)
            .collect();
        assert_eq!(ns, vec![1, 2, 3]);
        let line = Topology::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let ns: Vec<_> = line
            .neighbors(NodeId(1))
            .unwrap()
            .iter()
            .map(|p| p.0 .0)
            .collect();
        assert_eq!(ns, vec![0, 2]);
        let lonely = Topology::from_edges(2, &[]).unwrap();
        assert!(lonely.neighbors(NodeId(1)).unwrap().is_empty());
        assert!(lonely.neighbors(NodeId(2)).is_err());
    }

    #[test]
    fn builder_rejects_bad_links() {
        assert!(matches!(
            Topology::from_edges(2, &[(0, 0, 1.0)]),
            Err(TopologyError::SelfLoop(_))
        ));
        assert!(matches!(
            Topology::from_edges(2, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(TopologyError::DuplicateLink(..))
        ));
        assert!(matches!(
            Topology::from_edges(2, &[(0, 1, 0.0)]),
            Err(TopologyError::NonPositive { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let t = generate_topology(&GeneratorParams::default(), 9).unwrap();
        let text = t.to_text();
        let back = Topology::from_text(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn self_loop_reports_line() {
        let text = "topology v1\nregions 1 pnr 1\nnode 0 0 5 5 1\nlink 0 0 5 5\n";
        let err = Topology::from_text(text).unwrap_err();
        assert!(
            matches!(err, TopologyError::AtLine { line: 4, .. }),
            "{err}"
        );
        assert!(err.to_string().contains("self-loop"));
    }

    #[test]
    fn missing_node_lines_are_rejected() {
        let text = "topology v1\nregions 1 pnr 3\n# two of three\nnode 0 0 5 5 1\nnode 1 0 5 5 1\n";
        assert!(matches!(
            Topology::from_text(text),
            Err(TopologyError::NodeCount {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn malformed_line_names_line_number() {
        let text = "topology v1\nregions 1 pnr 1\nnode 0 0 five 5 1\n";
        let err = Topology::from_text(text).unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 3, .. }), "{err}");
        let err = Topology::from_text("graph v2\n").unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 1, .. }));
    }

    #[test]
    fn region_sizes_are_checked() {
        let text = "topology v1\nregions 2 pnr 1\nnode 0 0 5 5 1\nnode 1 0 5 5 1\n";
        assert!(matches!(
            Topology::from_text(text),
            Err(TopologyError::RegionSize { .. })
        ));
    }
}
