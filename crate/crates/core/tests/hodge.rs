use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::Instant;

use ncgeom::hodge_discrete::{
    build_circle, build_torus, disjoint_union, ambient_shortcut_demo, theta_ring_basis, CircleGrid, TorusGrid,
};
use ncgeom::states_metric::{connes_distance, connes_distance_restricted, DistanceOptions, PureState, State};
use petgraph::algo::dijkstra;
use petgraph::graph::UnGraph;

fn ev(b: usize) -> State {
    State::Pure(PureState::evaluation(b))
}

#[test]
fn flat_circle_distance_is_arc_length() {
    let n = 128;
    let t = build_circle(&CircleGrid::flat(n)).unwrap();
    let h = TAU / n as f64;
    let mut solver = ncgeom::states_metric::DistanceSolver::new(t.triple(), DistanceOptions::default()).unwrap();
    for k in [1, 17, 40, 64, 100] {
        let d = solver.distance(&ev(0), &ev(k)).unwrap().value.as_f64();
        let arc = (k as f64 * h).min(TAU - k as f64 * h);
        assert!((d - arc).abs() <= 0.02 * arc, "k = {k}: {d} vs {arc}");
    }
}

/// Largest admissible change of a θ-only function across ring i → i+1, read off the
/// cell weights: the commutator couples (θ-edge, head vertex) and (face, φ-edge).
fn ring_step_allowance(grid: &TorusGrid, i: usize) -> f64 {
    let ht = grid.htheta();
    let r_mid = grid.radius((i as f64 + 0.5) * ht);
    let r_head = grid.radius((i + 1) as f64 * ht);
    let edge_vertex = (r_mid / r_head).sqrt() / ht;
    let face_edge = (r_head / r_mid).sqrt() / ht;
    1.0 / edge_vertex.max(face_edge)
}

#[test]
fn ring_restricted_distance_matches_shortest_path() {
    let grid = TorusGrid::new(32, 32, 3.0);
    let torus = build_torus(&grid).unwrap();
    let basis = theta_ring_basis(&grid);
    let start = Instant::now();
    let quarter = grid.ntheta / 4;
    let d = connes_distance_restricted(
        torus.triple(),
        &basis,
        &ev(grid.vertex(0, 0)),
        &ev(grid.vertex(quarter, 0)),
        &DistanceOptions::default(),
    )
    .unwrap()
    .value
    .as_f64();
    let mut g = UnGraph::<(), f64>::new_undirected();
    let nodes: Vec<_> = (0..grid.ntheta).map(|_| g.add_node(())).collect();
    for i in 0..grid.ntheta {
        g.add_edge(nodes[i], nodes[(i + 1) % grid.ntheta], ring_step_allowance(&grid, i));
    }
    let paths = dijkstra(&g, nodes[0], Some(nodes[quarter]), |e| *e.weight());
    let oracle = paths[&nodes[quarter]];
    assert!((d - oracle).abs() <= 1e-6 * oracle, "{d} vs {oracle}");
    assert!((d - FRAC_PI_2).abs() <= 0.05 * FRAC_PI_2, "{d}");
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn non_geodesic_parallel_has_an_ambient_shortcut() {
    let opts = DistanceOptions { eps: 1e-3, max_iter: 400, ..DistanceOptions::default() };
    let start = Instant::now();
    let report = ambient_shortcut_demo(16, 16, 2.0, &opts).unwrap();
    eprintln!("{report:?} in {:?}", start.elapsed());
    assert!((report.intrinsic - 2.0 * std::f64::consts::PI).abs() < 1e-6);
    assert!(report.shortcut);
    assert!(report.ambient_lower <= report.ambient_upper);
}

#[test]
fn component_distances_survive_a_disjoint_union() {
    let a = build_circle(&CircleGrid::flat(12)).unwrap();
    let b = build_circle(&CircleGrid::flat(9)).unwrap();
    let u = disjoint_union(&a, &b).unwrap();
    let opts = DistanceOptions::default();
    for (x, y) in [(0, 5), (2, 7)] {
        let inside = connes_distance(a.triple(), &ev(x), &ev(y), &opts).unwrap().value.as_f64();
        let union = connes_distance(u.triple(), &ev(x), &ev(y), &opts).unwrap().value.as_f64();
        assert!((inside - union).abs() < 1e-6, "{inside} vs {union}");
    }
    let across = connes_distance(u.triple(), &ev(0), &ev(12), &opts).unwrap();
    assert!(!across.value.is_finite());
}
