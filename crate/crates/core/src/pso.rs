//! Level-2: particle swarm search for the maximum-fitness path.
//!
//! A particle's position is a vector holding one real priority per node.
//! [`decode_path`] turns it into a path by walking from the source and
//! always stepping to the highest-priority admissible neighbor. Fitness is
//! the share of the path's total bandwidth carried by its first link.

use rand::Rng as _;
use thiserror::Error;

use crate::graph::RoutingGraph;
use crate::seed;
use crate::topology::{LinkId, NodeId};

/// Priority written over nodes already on the partial path.
pub const TOMBSTONE: f64 = -999.0;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub valid: bool,
}

impl Path {
    pub fn source(&self) -> Option<NodeId> {
        self.nodes.first().copied()
    }

    pub fn hops(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

/// Whether stepping from `current` to `candidate` respects the index window.
///
/// When the source id exceeds the destination id the walk may not drop by
/// `window` or more ids in one hop; otherwise it may not climb by `window`
/// or more.
pub fn within_window(
    current: NodeId,
    candidate: NodeId,
    source: NodeId,
    dest: NodeId,
    window: usize,
) -> bool {
    let delta = candidate.0 as i64 - current.0 as i64;
    let m = window as i64;
    if source > dest {
        delta > -m
    } else {
        delta < m
    }
}

/// Decodes a priority vector into a path from `source` toward `dest`.
///
/// `priorities` is read-only; tombstoning happens on a working copy.
/// Ties between equal priorities go to the lower node id.
pub fn decode_path(
    priorities: &[f64],
    g: &RoutingGraph,
    source: NodeId,
    dest: NodeId,
    window: usize,
) -> Path {
    let mut nodes = vec![source];
    if source == dest {
        return Path { nodes, valid: true };
    }
    if !g.contains(source) || priorities.len() != g.node_count() {
        return Path {
            nodes,
            valid: false,
        };
    }
    let mut work = priorities.to_vec();
    work[source.0] = TOMBSTONE;
    let mut current = source;
    loop {
        let mut best: Option<NodeId> = None;
        for &(c, _) in g.neighbors(current) {
            if work[c.0] == TOMBSTONE || !within_window(current, c, source, dest, window) {
                continue;
            }
            if best.is_none_or(|b| work[c.0] > work[b.0]) {
                best = Some(c);
            }
        }
        let Some(next) = best else {
            return Path {
                nodes,
                valid: false,
            };
        };
        nodes.push(next);
        work[next.0] = TOMBSTONE;
        if next == dest {
            return Path { nodes, valid: true };
        }
        current = next;
    }
}

/// Path fitness with link bandwidths supplied by `bandwidth`, which is
/// called once per link in path order.
pub fn fitness_with(
    path: &Path,
    g: &RoutingGraph,
    mut bandwidth: impl FnMut(LinkId) -> f64,
) -> f64 {
    if !path.valid || path.nodes.len() < 2 {
        return 0.0;
    }
    let mut first = 0.0;
    let mut total = 0.0;
    for (i, hop) in path.nodes.windows(2).enumerate() {
        let Some(l) = g.link_between(hop[0], hop[1]) else {
            return 0.0;
        };
        let b = bandwidth(l);
        if i == 0 {
            first = b;
        }
        total += b;
    }
    first / total
}

/// First-link bandwidth over total path bandwidth. Invalid and single-node
/// paths score 0.
pub fn fitness(path: &Path, g: &RoutingGraph) -> f64 {
    fitness_with(path, g, |l| g.bandwidth(l))
}

#[derive(Debug, Error)]
pub enum PsoError {
    #[error("invalid swarm configuration: {0}")]
    InvalidConfig(String),
    #[error("node {0} is not in the routing graph")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwarmConfig {
    pub particle_count: usize,
    pub iterations: usize,
    /// Inertia weight `w`.
    pub inertia: f64,
    /// Cognitive coefficient `c1`.
    pub cognitive: f64,
    /// Social coefficient `c2`.
    pub social: f64,
    /// Per-component velocity clamp.
    pub v_max: f64,
    /// Index-window bound for decoding; set to nodes per region.
    pub window: usize,
    /// Half-width of the multiplicative noise applied to on-path link
    /// bandwidths each iteration. Zero disables it.
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            particle_count: 30,
            iterations: 100,
            inertia: 0.8,
            cognitive: 2.0,
            social: 2.0,
            v_max: 4.0,
            window: 4,
            perturbation: 0.05,
            seed: 0,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), PsoError> {
        let bad = |m: String| Err(PsoError::InvalidConfig(m));
        if self.particle_count == 0 {
            return bad("particle count must be >= 1".into());
        }
        if self.window == 0 {
            return bad("window must be >= 1".into());
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return bad(format!("v_max must be positive, got {}", self.v_max));
        }
        for (v, name) in [
            (self.inertia, "w"),
            (self.cognitive, "c1"),
            (self.social, "c2"),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(0.0..0.5).contains(&self.perturbation) {
            return bad(format!(
                "perturbation must lie in [0, 0.5), got {}",
                self.perturbation
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub path: Path,
    pub fitness: f64,
    pub pbest_position: Vec<f64>,
    pub pbest_path: Path,
    pub pbest_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalBest {
    pub position: Vec<f64>,
    pub path: Path,
    pub fitness: f64,
    /// Index of the particle that found it.
    pub particle: usize,
}

#[derive(Debug, Clone)]
pub struct Swarm {
    particles: Vec<Particle>,
    gbest: GlobalBest,
    source: NodeId,
    dest: NodeId,
    rng: seed::Rng,
}

impl Swarm {
    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn gbest(&self) -> &GlobalBest {
        &self.gbest
    }

    /// Advances one iteration. Returns whether the global best improved.
    #[allow(clippy::needless_range_loop)]
    pub fn step(&mut self, g: &RoutingGraph, cfg: &SwarmConfig) -> bool {
        let n = g.node_count();
        let gbest_position = self.gbest.position.clone();
        for p in &mut self.particles {
            for d in 0..n {
                let r1: f64 = self.rng.gen();
                let r2: f64 = self.rng.gen();
                let v = cfg.inertia * p.velocity[d]
                    + cfg.cognitive * r1 * (p.pbest_position[d] - p.position[d])
                    + cfg.social * r2 * (gbest_position[d] - p.position[d]);
                p.velocity[d] = v.clamp(-cfg.v_max, cfg.v_max);
                p.position[d] += p.velocity[d];
            }
            p.path = decode_path(&p.position, g, self.source, self.dest, cfg.window);
            p.fitness = if cfg.perturbation > 0.0 {
                let h = cfg.perturbation;
                let rng = &mut self.rng;
                fitness_with(&p.path, g, |l| {
                    g.bandwidth(l) * rng.gen_range(1.0 - h..=1.0 + h)
                })
            } else {
                fitness(&p.path, g)
            };
            if p.fitness > p.pbest_fitness {
                p.pbest_fitness = p.fitness;
                p.pbest_position.clone_from(&p.position);
                p.pbest_path.clone_from(&p.path);
            }
        }
        match best_index(&self.particles) {
            Some(i) if self.particles[i].pbest_fitness > self.gbest.fitness => {
                let p = &self.particles[i];
                self.gbest = GlobalBest {
                    position: p.pbest_position.clone(),
                    path: p.pbest_path.clone(),
                    fitness: p.pbest_fitness,
                    particle: i,
                };
                true
            }
            _ => false,
        }
    }
}

/// Highest pbest fitness; ties go to the lowest index.
fn best_index(particles: &[Particle]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in particles.iter().enumerate() {
        if best.is_none_or(|b| p.pbest_fitness > particles[b].pbest_fitness) {
            best = Some(i);
        }
    }
    best
}

/// Creates a seeded swarm with positions in `[-5, 5]` and velocities in
/// `[-1, 1]`, every particle decoded and scored.
pub fn init_swarm(
    cfg: &SwarmConfig,
    g: &RoutingGraph,
    source: NodeId,
    dest: NodeId,
) -> Result<Swarm, PsoError> {
    cfg.validate()?;
    for n in [source, dest] {
        if !g.contains(n) {
            return Err(PsoError::UnknownNode(n));
        }
    }
    let mut rng = seed::rng(cfg.seed);
    let n = g.node_count();
    let particles: Vec<Particle> = (0..cfg.particle_count)
        .map(|_| {
            let position: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
            let velocity: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let path = decode_path(&position, g, source, dest, cfg.window);
            let fit = fitness(&path, g);
            Particle {
                pbest_position: position.clone(),
                pbest_path: path.clone(),
                pbest_fitness: fit,
                position,
                velocity,
                path,
                fitness: fit,
            }
        })
        .collect();
    let i = best_index(&particles).expect("at least one particle");
    let gbest = GlobalBest {
        position: particles[i].pbest_position.clone(),
        path: particles[i].pbest_path.clone(),
        fitness: particles[i].pbest_fitness,
        particle: i,
    };
    Ok(Swarm {
        particles,
        gbest,
        source,
        dest,
        rng,
    })
}

/// Result of a full swarm run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub source: NodeId,
    pub dest: NodeId,
    pub path: Path,
    pub fitness: f64,
    /// 1-based iteration of the last gBest improvement, 0 if the initial
    /// swarm was never beaten.
    pub iterations_to_converge: usize,
    /// gBest fitness after initialization (index 0) and after each iteration.
    pub trace: Vec<f64>,
}

pub fn run(
    cfg: &SwarmConfig,
    g: &RoutingGraph,
    source: NodeId,
    dest: NodeId,
) -> Result<RunOutcome, PsoError> {
    let mut swarm = init_swarm(cfg, g, source, dest)?;
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    trace.push(swarm.gbest.fitness);
    let mut iterations_to_converge = 0;
    for it in 1..=cfg.iterations {
        if swarm.step(g, cfg) {
            iterations_to_converge = it;
        }
        trace.push(swarm.gbest.fitness);
    }
    Ok(RunOutcome {
        source,
        dest,
        path: swarm.gbest.path,
        fitness: swarm.gbest.fitness,
        iterations_to_converge,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Topology;

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> RoutingGraph {
        RoutingGraph::full(&Topology::from_edges(n, edges).unwrap())
    }

    #[test]
    fn decode_same_endpoints() {
        let g = graph(4, &[(0, 1, 1.0)]);
        let p = decode_path(&[0.0; 4], &g, NodeId(3), NodeId(3), 4);
        assert_eq!(p.nodes, ids(&[3]));
        assert!(p.valid);
    }

    #[test]
    fn decode_line() {
        let g = graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let p = decode_path(&[0.0, 5.0, 9.0], &g, NodeId(0), NodeId(2), 3);
        assert_eq!(p.nodes, ids(&[0, 1, 2]));
        assert!(p.valid);
    }

    #[test]
    fn decode_dead_end_is_invalid() {
        let g = graph(4, &[(0, 1, 1.0), (0, 2, 1.0)]);
        let p = decode_path(&[1.0, 2.0, 3.0, 4.0], &g, NodeId(0), NodeId(3), 4);
        assert!(!p.valid);
        assert_eq!(p.nodes, ids(&[0, 2]));
    }

    #[test]
    fn decode_tombstones_visited_nodes() {
        let g = graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let x = [100.0, 9.0, 1.0];
        let p = decode_path(&x, &g, NodeId(0), NodeId(2), 3);
        assert_eq!(p.nodes, ids(&[0, 1, 2]));
        assert_eq!(x, [100.0, 9.0, 1.0]);
    }

    #[test]
    fn decode_ties_prefer_lower_id() {
        let g = graph(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]);
        let p = decode_path(&[0.0, 1.0, 1.0, 0.0], &g, NodeId(0), NodeId(3), 4);
        assert_eq!(p.nodes, ids(&[0, 1, 3]));
    }

    #[test]
    fn window_blocks_long_jumps() {
        // 0 -> 5 is a climb of 5 >= window 3; only 0-1-...-5 is admissible.
        let g = graph(
            6,
            &[
                (0, 5, 1.0),
                (0, 1, 1.0),
                (1, 3, 1.0),
                (3, 5, 1.0),
                (1, 2, 1.0),
            ],
        );
        let x = [0.0, 1.0, -1.0, 2.0, 0.0, 9.0];
        let p = decode_path(&x, &g, NodeId(0), NodeId(5), 3);
        assert_eq!(p.nodes, ids(&[0, 1, 3, 5]));
        // Descending runs bound drops instead.
        let p = decode_path(&x, &g, NodeId(5), NodeId(0), 3);
        assert_eq!(p.nodes, ids(&[5, 3, 1, 0]));
        assert!(within_window(NodeId(5), NodeId(0), NodeId(0), NodeId(5), 3));
        assert!(!within_window(
            NodeId(5),
            NodeId(0),
            NodeId(5),
            NodeId(0),
            3
        ));
    }

    #[test]
    fn fitness_cases() {
        let g = graph(3, &[(0, 1, 8.0), (1, 2, 2.0), (0, 2, 5.0)]);
        let two = Path {
            nodes: ids(&[0, 1, 2]),
            valid: true,
        };
        assert!((fitness(&two, &g) - 0.8).abs() < 1e-12);
        let one = Path {
            nodes: ids(&[0, 2]),
            valid: true,
        };
        assert_eq!(fitness(&one, &g), 1.0);
        let single = Path {
            nodes: ids(&[0]),
            valid: true,
        };
        assert_eq!(fitness(&single, &g), 0.0);
        let invalid = Path {
            nodes: ids(&[0, 1]),
            valid: false,
        };
        assert_eq!(fitness(&invalid, &g), 0.0);
    }

    #[test]
    fn config_validation() {
        let cfg = SwarmConfig {
            particle_count: 0,
            ..Default::default()
        };
        let g = graph(2, &[(0, 1, 1.0)]);
        assert!(matches!(
            init_swarm(&cfg, &g, NodeId(0), NodeId(1)),
            Err(PsoError::InvalidConfig(_))
        ));
        let cfg = SwarmConfig {
            perturbation: 0.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn frozen_swarm() {
        let g = graph(4, &[(0, 1, 3.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)]);
        let cfg = SwarmConfig {
            inertia: 0.0,
            cognitive: 0.0,
            social: 0.0,
            perturbation: 0.0,
            particle_count: 5,
            seed: 3,
            ..Default::default()
        };
        let mut s = init_swarm(&cfg, &g, NodeId(0), NodeId(3)).unwrap();
        let g0 = s.gbest().clone();
        s.step(&g, &cfg);
        let after_one: Vec<Vec<f64>> = s.particles().iter().map(|p| p.position.clone()).collect();
        for _ in 0..10 {
            assert!(!s.step(&g, &cfg));
        }
        assert!(s
            .particles()
            .iter()
            .all(|p| p.velocity.iter().all(|&v| v == 0.0)));
        let later: Vec<Vec<f64>> = s.particles().iter().map(|p| p.position.clone()).collect();
        assert_eq!(after_one, later);
        assert_eq!(s.gbest(), &g0);
    }

    #[test]
    fn single_particle_is_gbest() {
        let g = graph(3, &[(0, 1, 2.0), (1, 2, 2.0)]);
        let cfg = SwarmConfig {
            particle_count: 1,
            window: 3,
            ..Default::default()
        };
        let s = init_swarm(&cfg, &g, NodeId(0), NodeId(2)).unwrap();
        assert_eq!(s.gbest().particle, 0);
        assert_eq!(s.gbest().fitness, s.particles()[0].fitness);
        assert_eq!(s.gbest().path, ids_path(&[0, 1, 2]));
        assert_eq!(s.gbest().fitness, 0.5);
    }

    fn ids_path(v: &[usize]) -> Path {
        Path {
            nodes: ids(v),
            valid: true,
        }
    }

    #[test]
    fn zero_iterations_returns_initial_best() {
        let g = graph(3, &[(0, 1, 2.0), (1, 2, 6.0)]);
        let cfg = SwarmConfig {
            iterations: 0,
            window: 3,
            ..Default::default()
        };
        let out = run(&cfg, &g, NodeId(0), NodeId(2)).unwrap();
        assert_eq!(out.iterations_to_converge, 0);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.path, ids_path(&[0, 1, 2]));
        assert_eq!(out.fitness, 0.25);
    }

    #[test]
    fn unperturbed_fitness_is_stable() {
        let g = graph(3, &[(0, 1, 2.0), (1, 2, 6.0)]);
        let cfg = SwarmConfig {
            perturbation: 0.0,
            window: 3,
            particle_count: 4,
            ..Default::default()
        };
        let mut s = init_swarm(&cfg, &g, NodeId(0), NodeId(2)).unwrap();
        for _ in 0..20 {
            s.step(&g, &cfg);
            for p in s.particles() {
                assert_eq!(p.fitness, fitness(&p.path, &g));
            }
        }
    }

    #[test]
    fn init_is_deterministic() {
        let g = graph(4, &[(0, 1, 3.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)]);
        let cfg = SwarmConfig {
            seed: 99,
            ..Default::default()
        };
        let a = init_swarm(&cfg, &g, NodeId(0), NodeId(3)).unwrap();
        let b = init_swarm(&cfg, &g, NodeId(0), NodeId(3)).unwrap();
        assert_eq!(a.particles(), b.particles());
        assert_eq!(a.gbest(), b.gbest());
    }
}
