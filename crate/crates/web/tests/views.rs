use grade_route_web::{compare_view, graded_view, route_view, Scenario};

const SMALL: Scenario = Scenario {
    regions: 3,
    pnr: 5,
    seed: 7,
};

#[test]
fn graded_view_lays_out_every_node() {
    let v = graded_view(SMALL, 0, 14).unwrap();
    assert_eq!(v.nodes.len(), 15);
    assert!(v
        .nodes
        .iter()
        .all(|n| (0.0..=1.0).contains(&n.x) && (0.0..=1.0).contains(&n.y)));
    assert_eq!(v.kept, v.nodes.iter().filter(|n| n.kept).count());
    assert!(v.nodes[0].kept && v.nodes[14].kept);
    for n in &v.nodes {
        assert_eq!(n.kept, n.reason != "excluded");
    }
    for l in &v.links {
        assert_eq!(l.kept, v.nodes[l.u].kept && v.nodes[l.v].kept);
    }
    let json = serde_json::to_value(&v).unwrap();
    assert!(json["nodes"][0]["reason"].is_string());
}

#[test]
fn route_modes_agree_with_the_oracle_bound() {
    let oracle = route_view(SMALL, 0, 14, "oracle", 0.0).unwrap();
    assert!(oracle.trace.is_empty() && oracle.iterations_to_converge.is_none());
    for mode in ["ungraded", "graded"] {
        let r = route_view(SMALL, 0, 14, mode, 0.0).unwrap();
        assert_eq!(r.trace.len(), 101);
        assert!(r.fitness <= oracle.fitness);
        if r.valid {
            assert_eq!(r.path.first(), Some(&0));
            assert_eq!(r.path.last(), Some(&14));
        }
    }
}

#[test]
fn bad_requests_are_errors() {
    assert!(route_view(SMALL, 0, 14, "fastest", 0.0)
        .unwrap_err()
        .contains("fastest"));
    assert!(graded_view(SMALL, 3, 3).is_err());
    assert!(graded_view(SMALL, 0, 99).is_err());
    assert!(graded_view(
        Scenario {
            regions: 0,
            pnr: 4,
            seed: 1
        },
        0,
        1
    )
    .is_err());
}

#[test]
fn compare_is_deterministic() {
    let a = compare_view(SMALL, 4).unwrap();
    let b = compare_view(SMALL, 4).unwrap();
    assert_eq!(a.rows.len(), 4);
    assert_eq!(a.csv, b.csv);
    assert!(a.csv.starts_with("trial,ungraded_iterations,"));
}
