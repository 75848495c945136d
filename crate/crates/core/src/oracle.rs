//! Exhaustive ground truth for small graphs.

use crate::graph::RoutingGraph;
use crate::pso::{fitness, Path};
use crate::topology::NodeId;

pub const DEFAULT_MAX_PATHS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub paths: Vec<Path>,
    /// Set when enumeration stopped at the cap.
    pub truncated: bool,
}

/// All simple `source -> dest` paths in depth-first order, neighbors visited
/// in ascending id order, stopping after `max_paths`.
pub fn enumerate_simple_paths(
    g: &RoutingGraph,
    source: NodeId,
    dest: NodeId,
    max_paths: usize,
) -> Enumeration {
    let mut out = Enumeration {
        paths: Vec::new(),
        truncated: false,
    };
    if !g.contains(source) || !g.contains(dest) || max_paths == 0 {
        return out;
    }
    if source == dest {
        out.paths.push(Path {
            nodes: vec![source],
            valid: true,
        });
        return out;
    }
    let mut on_path = vec![false; g.node_count()];
    on_path[source.0] = true;
    let mut stack = vec![source];
    dfs(g, dest, max_paths, &mut stack, &mut on_path, &mut out);
    out
}

fn dfs(
    g: &RoutingGraph,
    dest: NodeId,
    cap: usize,
    stack: &mut Vec<NodeId>,
    on_path: &mut [bool],
    out: &mut Enumeration,
) {
    let current = *stack.last().expect("non-empty stack");
    for &(next, _) in g.neighbors(current) {
        if out.truncated {
            return;
        }
        if on_path[next.0] {
            continue;
        }
        if next == dest {
            if out.paths.len() == cap {
                out.truncated = true;
                return;
            }
            let mut nodes = stack.clone();
            nodes.push(dest);
            out.paths.push(Path { nodes, valid: true });
            continue;
        }
        on_path[next.0] = true;
        stack.push(next);
        dfs(g, dest, cap, stack, on_path, out);
        stack.pop();
        on_path[next.0] = false;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_path: Path,
    pub best_fitness: f64,
    pub paths_examined: usize,
    pub truncated: bool,
}

/// The fitness-maximal simple path. Ties go to the shorter path, then to
/// the lexicographically smaller node sequence.
pub fn best_path_bruteforce(
    g: &RoutingGraph,
    source: NodeId,
    dest: NodeId,
    max_paths: usize,
) -> OracleResult {
    let e = enumerate_simple_paths(g, source, dest, max_paths);
    let mut best: Option<(f64, &Path)> = None;
    for p in &e.paths {
        let f = fitness(p, g);
        let better = match best {
            None => true,
            Some((bf, bp)) => {
                f > bf || (f == bf && (p.nodes.len(), &p.nodes) < (bp.nodes.len(), &bp.nodes))
            }
        };
        if better {
            best = Some((f, p));
        }
    }
    match best {
        Some((f, p)) => OracleResult {
            best_path: p.clone(),
            best_fitness: f,
            paths_examined: e.paths.len(),
            truncated: e.truncated,
        },
        None => OracleResult {
            best_path: Path {
                nodes: vec![source],
                valid: false,
            },
            best_fitness: 0.0,
            paths_examined: 0,
            truncated: e.truncated,
        },
    }
}
