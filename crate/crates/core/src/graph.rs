//! The adjacency view that path search runs on.
//!
//! A [`RoutingGraph`] keeps the node numbering of its [`Topology`] but may
//! hide some nodes (the ones Level-1 grading filtered out). Hidden nodes keep
//! their index, have no neighbors, and never appear as anyone's neighbor, so
//! priority vectors and index-window rules stay aligned with the topology.

use std::collections::VecDeque;

use crate::topology::{LinkId, NodeId, Topology};

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingGraph {
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
    present: Vec<bool>,
    bandwidth: Vec<f64>,
}

impl RoutingGraph {
    /// Every node and link of `t`.
    pub fn full(t: &Topology) -> RoutingGraph {
        RoutingGraph::induced(t, &vec![true; t.node_count()])
    }

    /// The subgraph induced by the nodes flagged in `keep`.
    pub fn induced(t: &Topology, keep: &[bool]) -> RoutingGraph {
        assert_eq!(keep.len(), t.node_count(), "keep mask length");
        let adjacency = (0..t.node_count())
            .map(|i| {
                if !keep[i] {
                    return Vec::new();
                }
                t.neighbors(NodeId(i))
                    .expect("node in range")
                    .iter()
                    .copied()
                    .filter(|(n, _)| keep[n.0])
                    .collect()
            })
            .collect();
        RoutingGraph {
            adjacency,
            present: keep.to_vec(),
            bandwidth: t.links().iter().map(|l| l.bandwidth).collect(),
        }
    }

    /// Size of the node index space (hidden nodes included).
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.present.get(n.0).copied().unwrap_or(false)
    }

    pub fn present_count(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    /// Ascending by neighbor id. Empty for hidden or out-of-range nodes.
    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, LinkId)] {
        self.adjacency.get(n.0).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.neighbors(a)
            .binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|i| self.adjacency[a.0][i].1)
    }

    pub fn bandwidth(&self, l: LinkId) -> f64 {
        self.bandwidth[l.0]
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidth
    }

    /// Undirected links visible in this view, ascending by link id.
    pub fn link_ids(&self) -> Vec<LinkId> {
        let mut ids: Vec<LinkId> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |(n, _)| n.0 > i).map(|&(_, l)| l))
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Breadth-first reachability.
    pub fn reachable(&self, source: NodeId, dest: NodeId) -> bool {
        self.reachable_by(source, dest, |_, _| true)
    }

    /// Reachability using only the hops a path decoder with index window
    /// `window` may take (see [`crate::pso::within_window`]). Every directed
    /// walk contains a simple path, so this decides whether any decodable
    /// path exists.
    pub fn window_reachable(&self, source: NodeId, dest: NodeId, window: usize) -> bool {
        self.reachable_by(source, dest, |a, b| {
            crate::pso::within_window(a, b, source, dest, window)
        })
    }

    fn reachable_by(
        &self,
        source: NodeId,
        dest: NodeId,
        allowed: impl Fn(NodeId, NodeId) -> bool,
    ) -> bool {
        if !self.contains(source) || !self.contains(dest) {
            return false;
        }
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([source]);
        seen[source.0] = true;
        while let Some(n) = queue.pop_front() {
            if n == dest {
                return true;
            }
            for &(m, _) in self.neighbors(n) {
                if !seen[m.0] && allowed(n, m) {
                    seen[m.0] = true;
                    queue.push_back(m);
                }
            }
        }
        false
    }
}
