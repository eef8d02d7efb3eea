//! Reference implementations used as oracles. Each is deliberately naive.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nlbounds_core::graph::ExclusivityGraph;
use nlbounds_core::scenario::{determined_outcome, Event, MeasurementId};
use nlbounds_core::sigma::{Distribution, SigmaExpression};
use rand::Rng;

/// Measurement → outcome map, including the derived outcome a product
/// event forces in a doubled scenario.
pub fn outcome_map(e: &Event) -> BTreeMap<MeasurementId, u8> {
    let mut m: BTreeMap<_, _> = e.assignments().into_iter().collect();
    if e.scenario().is_doubled() && e.as_product().is_some() {
        for s in 0..2 {
            for v in 0..2 {
                let id = MeasurementId::derived(s, v).unwrap();
                if let Some(b) = determined_outcome(e, id).unwrap() {
                    m.insert(id, b);
                }
            }
        }
    }
    m
}

/// Two events are exclusive when some measurement gets different outcomes.
pub fn exclusive_oracle(a: &Event, b: &Event) -> bool {
    let (ma, mb) = (outcome_map(a), outcome_map(b));
    ma.iter().any(|(k, v)| mb.get(k).is_some_and(|w| w != v))
}

/// `α` by plain include/exclude recursion over a bitmask (at most 64 vertices).
pub fn alpha_oracle(g: &ExclusivityGraph) -> usize {
    let n = g.order();
    assert!(n <= 64);
    let nbr: Vec<u64> = (0..n)
        .map(|u| (0..n).filter(|&v| g.adjacent(u, v)).fold(0u64, |m, v| m | 1 << v))
        .collect();
    fn go(live: u64, nbr: &[u64]) -> usize {
        if live == 0 {
            return 0;
        }
        let v = live.trailing_zeros() as usize;
        let without = go(live & !(1 << v), nbr);
        let with = 1 + go(live & !(1 << v) & !nbr[v], nbr);
        without.max(with)
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    go(full, &nbr)
}

/// Vertex transitivity by trying every permutation (small graphs only).
pub fn transitive_oracle(g: &ExclusivityGraph) -> bool {
    let n = g.order();
    assert!(n <= 8);
    let mut reach = vec![false; n];
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let auto = (0..n).all(|u| (0..n).all(|v| g.adjacent(u, v) == g.adjacent(perm[u], perm[v])));
        if auto {
            reach[perm[0]] = true;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    reach.into_iter().all(|r| r)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> ExclusivityGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    ExclusivityGraph::with_edges(n, &edges).unwrap()
}

pub fn random_distribution(rng: &mut impl Rng, n: usize) -> Distribution<f64> {
    let m = 1usize << n;
    let mut table = Vec::with_capacity(m * m);
    for _ in 0..m {
        let row: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = row.iter().sum();
        table.extend(row.into_iter().map(|v| v / total));
    }
    Distribution::new(n, table).unwrap()
}

/// Hybrid maximum by enumerating every deterministic joint response of both
/// groups for every split.
pub fn hybrid_oracle(sigma: &SigmaExpression) -> u64 {
    let n = sigma.n();
    let full = (1u32 << n) - 1;
    let mut best = 0;
    for group in 1..full {
        let rest = full & !group;
        let gp: Vec<usize> = (0..n).filter(|i| group >> i & 1 == 1).collect();
        let rp: Vec<usize> = (0..n).filter(|i| rest >> i & 1 == 1).collect();
        let gfuns = functions(gp.len());
        let rfuns = functions(rp.len());
        for gf in &gfuns {
            for rf in &rfuns {
                let mut v = 0;
                for x in 0..1u32 << n {
                    let gx = pick(x, &gp);
                    let rx = pick(x, &rp);
                    let b = spread(gf[gx], &gp) | spread(rf[rx], &rp);
                    if sigma.contains(b, x) {
                        v += 1;
                    }
                }
                best = best.max(v);
            }
        }
    }
    best
}

fn functions(k: usize) -> Vec<Vec<u32>> {
    let inputs = 1usize << k;
    let outputs = 1u32 << k;
    let mut all = vec![vec![]];
    for _ in 0..inputs {
        all = all
            .into_iter()
            .flat_map(|f: Vec<u32>| {
                (0..outputs).map(move |o| {
                    let mut g = f.clone();
                    g.push(o);
                    g
                })
            })
            .collect();
    }
    all
}

fn pick(x: u32, parties: &[usize]) -> usize {
    parties.iter().enumerate().fold(0, |w, (k, &i)| w | ((x >> i & 1) as usize) << k)
}

fn spread(b: u32, parties: &[usize]) -> u32 {
    parties.iter().enumerate().fold(0, |w, (k, &i)| w | (b >> k & 1) << i)
}
