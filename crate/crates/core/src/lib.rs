//! Quality-graded routing over region-based network topologies.
//!
//! The pipeline has two levels. Level-1 observes every node through an
//! M/M/1 traffic model, assigns it a priority class and a grade on the
//! `-3..=+3` scale, and keeps only the promising nodes. Level-2 searches
//! the surviving subgraph for the maximum-fitness path with a particle
//! swarm whose particles are node-priority vectors decoded into paths.
//!
//! ```
//! use grade_route::graph::RoutingGraph;
//! use grade_route::oracle::best_path_bruteforce;
//! use grade_route::pso::{run, SwarmConfig};
//! use grade_route::topology::{NodeId, Topology};
//!
//! let t = Topology::from_edges(3, &[(0, 1, 8.0), (1, 2, 2.0), (0, 2, 5.0)]).unwrap();
//! let g = RoutingGraph::full(&t);
//! let cfg = SwarmConfig { window: 3, perturbation: 0.0, ..SwarmConfig::default() };
//! let out = run(&cfg, &g, NodeId(0), NodeId(2)).unwrap();
//! let exact = best_path_bruteforce(&g, NodeId(0), NodeId(2), 1000);
//! assert_eq!(out.fitness, exact.best_fitness);
//! ```

pub mod experiment;
pub mod grading;
pub mod graph;
pub mod kb;
pub mod oracle;
pub mod pso;
pub mod seed;
pub mod topology;
pub mod traffic;

mod text;

pub use graph::RoutingGraph;
pub use topology::{Link, LinkId, NodeAttributes, NodeId, RegionId, Topology};
