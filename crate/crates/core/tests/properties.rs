mod common;

use proptest::prelude::*;

use grade_route::grading::{level1_select, priority_to_grade, Grade, Priority};
use grade_route::kb::{KnowledgeBase, RouteRecord};
use grade_route::pso::{self, decode_path, fitness, SwarmConfig};
use grade_route::topology::{generate_topology, GeneratorParams, NodeId, RegionId, Topology};
use grade_route::traffic::{compute_flows, min_hop_path, total_delay, LinkFlows, TrafficMatrix};
use grade_route::{LinkId, RoutingGraph};

fn params() -> impl Strategy<Value = GeneratorParams> {
    (1usize..=4, 1usize..=6, 0.0f64..=1.0, 0usize..=3).prop_map(|(r, pnr, p, inter)| {
        GeneratorParams {
            region_count: r,
            pnr,
            intra_edge_prob: p,
            inter_edges_per_region_pair: inter,
            ..GeneratorParams::default()
        }
    })
}

fn topology() -> impl Strategy<Value = Topology> {
    (params(), any::<u64>()).prop_map(|(p, s)| generate_topology(&p, s).unwrap())
}

/// A topology plus two node indices drawn from it.
fn with_pair() -> impl Strategy<Value = (Topology, usize, usize)> {
    topology().prop_flat_map(|t| {
        let n = t.node_count();
        (Just(t), 0..n, 0..n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_topologies_are_well_formed((p, s) in (params(), any::<u64>())) {
        let t = generate_topology(&p, s).unwrap();
        prop_assert_eq!(t.node_count(), p.region_count * p.pnr);
        for r in 0..p.region_count {
            prop_assert_eq!(t.region_nodes(RegionId(r)).count(), p.pnr);
            // every region is internally connected
            let members: Vec<NodeId> = t.region_nodes(RegionId(r)).collect();
            let keep: Vec<bool> = (0..t.node_count()).map(|i| t.nodes()[i].region == RegionId(r)).collect();
            let g = RoutingGraph::induced(&t, &keep);
            for &m in &members[1..] {
                prop_assert!(g.reachable(members[0], m));
            }
        }
        let mut pairs = std::collections::HashSet::new();
        for l in t.links() {
            prop_assert!(l.u < l.v);
            prop_assert!(l.bandwidth > 0.0 && l.capacity > 0.0);
            prop_assert!(pairs.insert((l.u, l.v)));
        }
        for n in t.nodes() {
            let adj = t.neighbors(n.id).unwrap();
            prop_assert_eq!(t.in_degree(n.id).unwrap(), adj.len());
            prop_assert!(adj.windows(2).all(|w| w[0].0 < w[1].0));
            for &(m, l) in adj {
                prop_assert_eq!(t.link_between(m, n.id), Some(l));
            }
        }
    }

    #[test]
    fn topology_text_round_trips(t in topology()) {
        let text = t.to_text();
        let back = Topology::from_text(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn traffic_text_round_trips(n in 2usize..20, density in 0.0f64..1.0, seed in any::<u64>()) {
        let m = TrafficMatrix::synthetic(n, density, 0.1, 1.0, seed);
        let text = m.to_text();
        let back = TrafficMatrix::from_text(&text, n).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn decoded_paths_are_simple_windowed_walks(
        (t, s, d) in with_pair(),
        xs in proptest::collection::vec(-10.0f64..10.0, 24),
        window in 1usize..10,
    ) {
        let g = RoutingGraph::full(&t);
        let x = &xs[..t.node_count()];
        let before = x.to_vec();
        let p = decode_path(x, &g, NodeId(s), NodeId(d), window);
        prop_assert_eq!(x, &before[..]);
        prop_assert_eq!(p.nodes[0], NodeId(s));
        let mut seen = std::collections::HashSet::new();
        prop_assert!(p.nodes.iter().all(|n| seen.insert(*n)));
        for h in p.nodes.windows(2) {
            prop_assert!(t.link_between(h[0], h[1]).is_some());
            prop_assert!(common::window_ok(h[0].0, h[1].0, s, d, window));
        }
        prop_assert_eq!(p.valid, p.nodes.last() == Some(&NodeId(d)));
        if !p.valid {
            // stuck: every neighbor is used or outside the window
            let last = *p.nodes.last().unwrap();
            for &(m, _) in g.neighbors(last) {
                prop_assert!(seen.contains(&m) || !common::window_ok(last.0, m.0, s, d, window));
            }
        }
        let f = fitness(&p, &g);
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn swarm_best_never_regresses((t, s, d) in with_pair(), seed in any::<u64>(), noise in 0.0f64..0.3) {
        prop_assume!(s != d);
        let g = RoutingGraph::full(&t);
        let cfg = SwarmConfig { particle_count: 8, iterations: 15, perturbation: noise, window: t.pnr(), seed, ..SwarmConfig::default() };
        let out = pso::run(&cfg, &g, NodeId(s), NodeId(d)).unwrap();
        prop_assert_eq!(out.trace.len(), cfg.iterations + 1);
        prop_assert!(out.trace.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*out.trace.last().unwrap(), out.fitness);
        prop_assert!(out.iterations_to_converge <= cfg.iterations);
        if out.iterations_to_converge > 0 {
            let k = out.iterations_to_converge;
            prop_assert!(out.trace[k] > out.trace[k - 1]);
        }
        prop_assert!(out.trace[out.iterations_to_converge..].iter().all(|&f| f == out.fitness));
        if noise == 0.0 {
            prop_assert_eq!(fitness(&out.path, &g), out.fitness);
        }
    }

    #[test]
    fn min_hop_routes_are_shortest_then_smallest((t, s, d) in with_pair()) {
        prop_assume!(s != d && t.node_count() <= 12);
        let m = common::bandwidth_matrix(&t, &vec![true; t.node_count()]);
        let all = common::simple_paths(&m, s, d, &|_, _| true);
        let want = all.iter().min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let got = min_hop_path(&t, NodeId(s), NodeId(d)).map(|p| p.iter().map(|n| n.0).collect::<Vec<_>>());
        prop_assert_eq!(got.as_ref(), want);
    }

    #[test]
    fn flows_conserve_demand(t in topology(), density in 0.0f64..0.5, seed in any::<u64>()) {
        let gamma = TrafficMatrix::synthetic(t.node_count(), density, 0.1, 1.0, seed);
        match compute_flows(&t, &gamma) {
            Ok(flows) => {
                let carried: f64 = flows.0.iter().sum();
                let expected: f64 = gamma
                    .demands()
                    .map(|(j, k, g)| g * (min_hop_path(&t, j, k).unwrap().len() - 1) as f64)
                    .sum();
                prop_assert!((carried - expected).abs() <= 1e-9 * expected.max(1.0));
                prop_assert!(flows.0.iter().all(|&f| f >= 0.0));
            }
            Err(_) => prop_assert!(gamma.demands().any(|(j, k, _)| min_hop_path(&t, j, k).is_none())),
        }
    }

    #[test]
    fn delay_grows_with_load(
        caps in proptest::collection::vec(1.0f64..50.0, 1..6),
        loads in proptest::collection::vec(0.0f64..0.95, 6),
        bump in 0.0f64..1.0,
        which in 0usize..6,
    ) {
        let edges: Vec<(usize, usize, f64)> = caps.iter().enumerate().map(|(i, &c)| (i, i + 1, c)).collect();
        // single-region helper uses bandwidth as capacity
        let t = Topology::from_edges(caps.len() + 1, &edges).unwrap();
        let flows = LinkFlows(caps.iter().zip(&loads).map(|(c, u)| c * u).collect());
        let ids: Vec<LinkId> = (0..caps.len()).map(LinkId).collect();
        let base = total_delay(&t, &flows, 1.0, ids.clone()).unwrap();
        prop_assert_eq!(base == 0.0, flows.0.iter().all(|&f| f == 0.0));

        let i = which % caps.len();
        let mut more = flows.clone();
        more.0[i] += (caps[i] - flows.0[i]) * bump * 0.99;
        prop_assume!(more.0[i] > flows.0[i]);
        let higher = total_delay(&t, &more, 1.0, ids).unwrap();
        prop_assert!(higher > base);
    }

    #[test]
    fn level1_keeps_endpoints_and_closes_links(
        (t, s, d) in with_pair(),
        raw in proptest::collection::vec(-3i8..=3, 24),
    ) {
        prop_assume!(s != d);
        let grades: Vec<Grade> = raw[..t.node_count()].iter().map(|&g| Grade::new(g).unwrap()).collect();
        let sub = level1_select(&t, &grades, NodeId(s), NodeId(d)).unwrap();
        prop_assert!(sub.is_kept(NodeId(s)) && sub.is_kept(NodeId(d)));
        prop_assert!(sub.kept_count() <= t.node_count());
        for l in sub.induced_links() {
            let link = t.link(l);
            prop_assert!(sub.is_kept(link.u) && sub.is_kept(link.v));
        }
        for (n, &g) in raw[..t.node_count()].iter().enumerate() {
            if (0..=2).contains(&g) {
                prop_assert!(sub.is_kept(NodeId(n)));
            }
            if g == -3 && n != s && n != d {
                // dead nodes only return through the per-region top three
                prop_assert!(!sub.is_kept(NodeId(n)) || sub.reason(NodeId(n)).unwrap().as_str() == "top3");
            }
        }
        prop_assert_eq!(sub.connected(), sub.graph().reachable(NodeId(s), NodeId(d)));
    }

    #[test]
    fn kb_text_round_trips(entries in proptest::collection::vec((0usize..6, 0usize..6, any::<bool>(), 0.0f64..=1.0, 0usize..200, any::<u64>()), 0..12)) {
        let mut kb = KnowledgeBase::new();
        for (s, d, graded, f, iters, seed) in entries {
            prop_assume!(s != d);
            kb.record(RouteRecord {
                source: NodeId(s),
                dest: NodeId(d),
                path: vec![NodeId(s), NodeId(d)],
                fitness: f,
                iterations_to_converge: iters,
                graded,
                seed,
            });
        }
        let text = kb.to_text();
        let back = KnowledgeBase::from_text(&text).unwrap();
        prop_assert_eq!(&back, &kb);
        prop_assert_eq!(back.to_text(), text);
    }
}

#[test]
fn grade_scale_is_injective_with_survivor_band() {
    let grades: Vec<i8> = (1..=6)
        .map(|p| priority_to_grade(Priority::new(p).unwrap()).value())
        .collect();
    let mut unique = grades.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(unique.len(), 6);
    assert!(grades[..3].iter().all(|g| (0..=2).contains(g)));
    assert!(grades[4..].iter().all(|&g| g < 0));
}
