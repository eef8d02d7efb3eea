mod common;

use nlbounds_core::graph::{build_graph, independence_number, is_vertex_transitive, ExclusivityGraph};
use nlbounds_core::models::local_bound;
use nlbounds_core::scenario::{exclusive, Event, Scenario};
use nlbounds_core::sigma::build_sigma;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn g_sigma(n: usize) -> ExclusivityGraph {
    build_graph(build_sigma(n).unwrap().support()).unwrap()
}

#[test]
fn g_sigma2_is_cubic_with_quartic_complement() {
    let g = g_sigma(2);
    assert_eq!(g.order(), 8);
    assert!((0..8).all(|v| g.degree(v) == 3));
    let c = g.complement();
    assert!((0..8).all(|v| c.degree(v) == 4));
}

#[test]
fn edges_follow_exclusivity() {
    let sigma = build_sigma(3).unwrap();
    let g = build_graph(sigma.support()).unwrap();
    let s = Scenario::single(3).unwrap();
    let events: Vec<Event> = g.labels().iter().map(|t| Event::parse(s, t).unwrap()).collect();
    for u in 0..g.order() {
        for v in 0..g.order() {
            if u != v {
                assert_eq!(g.adjacent(u, v), common::exclusive_oracle(&events[u], &events[v]));
                assert_eq!(g.adjacent(u, v), exclusive(&events[u], &events[v]).unwrap());
            }
        }
    }
}

#[test]
fn alpha_matches_oracle_and_local_bound() {
    for n in 2..=3 {
        let g = g_sigma(n);
        let a = independence_number(&g);
        assert!(a.exact);
        assert_eq!(a.lower, common::alpha_oracle(&g));
        assert_eq!(a.lower as u64, local_bound(n).unwrap().sigma);
        assert!(g.is_independent(&a.witness));
        assert_eq!(a.witness.len(), a.lower);
    }
}

#[test]
fn alpha_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let n = rand::Rng::gen_range(&mut rng, 1..24);
        let g = common::random_graph(&mut rng, n, 0.3);
        let a = independence_number(&g);
        assert_eq!(a.value(), Some(common::alpha_oracle(&g)));
    }
}

#[test]
fn transitivity_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen = [0, 0];
    for _ in 0..150 {
        let n = rand::Rng::gen_range(&mut rng, 2..8);
        let g = common::random_graph(&mut rng, n, 0.5);
        let want = common::transitive_oracle(&g);
        assert_eq!(is_vertex_transitive(&g).unwrap(), want);
        seen[want as usize] += 1;
    }
    for g in [ExclusivityGraph::cycle(7), ExclusivityGraph::complete(5), ExclusivityGraph::empty(4)] {
        assert!(is_vertex_transitive(&g).unwrap());
        assert!(common::transitive_oracle(&g));
    }
    assert!(!is_vertex_transitive(&ExclusivityGraph::path(4)).unwrap());
    assert!(seen[0] > 0);
}

#[test]
fn cube_and_twisted_cube() {
    let cube: Vec<(usize, usize)> = vec![
        (0, 1), (1, 2), (2, 3), (3, 0),
        (4, 5), (5, 6), (6, 7), (7, 4),
        (0, 4), (1, 5), (2, 6), (3, 7),
    ];
    assert!(is_vertex_transitive(&ExclusivityGraph::with_edges(8, &cube).unwrap()).unwrap());
    let g = ExclusivityGraph::with_edges(8, &[
        (0, 1), (1, 2), (2, 3), (3, 0),
        (4, 5), (5, 6), (6, 7), (7, 4),
        (0, 4), (1, 6), (2, 5), (3, 7),
    ])
    .unwrap();
    let want = common::transitive_oracle(&g);
    assert_eq!(is_vertex_transitive(&g).unwrap(), want);
}

#[test]
fn g_sigma_transitive() {
    for n in 2..=3 {
        assert!(is_vertex_transitive(&g_sigma(n)).unwrap());
    }
}

#[test]
fn odd_cycles_alpha() {
    for m in [5, 7, 9, 11] {
        assert_eq!(independence_number(&ExclusivityGraph::cycle(m)).value(), Some(m / 2));
    }
}

#[test]
fn duplicate_events_rejected() {
    let s = Scenario::single(2).unwrap();
    let e = Event::parse(s, "0,0|0,0").unwrap();
    assert!(build_graph(&[e, e]).is_err());
}

#[test]
fn document_round_trip() {
    let g = g_sigma(2);
    assert_eq!(ExclusivityGraph::from_document(&g.document()).unwrap(), g);
    assert!(g.to_dot().contains(" -- "));
}
