//! Exclusivity graphs: construction from events, complement, vertex
//! transitivity via colour refinement with backtracking, and an exact
//! independence number by branch and bound.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{exclusive, Event};

/// Vertex limit for the exact independence number.
pub const MAX_EXACT_ALPHA_VERTICES: usize = 512;

/// Vertex limit for the automorphism search.
pub const MAX_TRANSITIVITY_VERTICES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Simple undirected graph with labelled vertices and dense bit rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusivityGraph {
    labels: Vec<String>,
    rows: Vec<BitSet>,
}

impl ExclusivityGraph {
    pub fn from_edges(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut rows = vec![BitSet::new(n); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            rows[u].insert(v);
            rows[v].insert(u);
        }
        Ok(Self { labels, rows })
    }

    /// Unlabelled graph, vertices named `0..n`.
    pub fn with_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges((0..n).map(|i| i.to_string()).collect(), edges)
    }

    pub fn cycle(m: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..m).map(|i| (i, (i + 1) % m)).collect();
        Self::with_edges(m, &edges).expect("cycle edges are valid for m >= 3")
    }

    pub fn path(m: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..m).map(|i| (i - 1, i)).collect();
        Self::with_edges(m, &edges).expect("path edges are valid")
    }

    pub fn complete(m: usize) -> Self {
        Self::with_edges(m, &[]).expect("no edges").complement()
    }

    pub fn empty(m: usize) -> Self {
        Self::with_edges(m, &[]).expect("no edges")
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.rows[u].contains(v)
    }

    pub fn neighbors(&self, u: usize) -> &BitSet {
        &self.rows[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.rows[u].len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.order() {
            out.extend(self.rows[u].iter().filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(BitSet::len).sum::<usize>() / 2
    }

    pub fn complement(&self) -> Self {
        let n = self.order();
        let rows = (0..n)
            .map(|u| {
                let mut r = BitSet::new(n);
                for v in (0..n).filter(|&v| v != u && !self.adjacent(u, v)) {
                    r.insert(v);
                }
                r
            })
            .collect();
        Self {
            labels: self.labels.clone(),
            rows,
        }
    }

    pub fn without_edge(&self, u: usize, v: usize) -> Self {
        let mut g = self.clone();
        g.rows[u].remove(v);
        g.rows[v].remove(u);
        g
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &u)| set[i + 1..].iter().all(|&v| u != v && !self.adjacent(u, v)))
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph exclusivity {\n");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(s, "  {i} [label=\"{l}\"];");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(s, "  {u} -- {v};");
        }
        s.push_str("}\n");
        s
    }

    pub fn document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.labels.clone(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            alpha: None,
            vertex_transitive: None,
        }
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self> {
        let edges: Vec<(usize, usize)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::from_edges(doc.vertices.clone(), &edges)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_transitive: Option<bool>,
}

/// Exclusivity graph of `events`, vertices sorted by token.
pub fn build_graph(events: &[Event]) -> Result<ExclusivityGraph> {
    let mut sorted: Vec<(String, Event)> = events.iter().map(|e| (e.token(), *e)).collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0].1 == w[1].1) {
        return Err(Error::DuplicateEvent(w[0].0.clone()));
    }
    let n = sorted.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if exclusive(&sorted[i].1, &sorted[j].1)? {
                edges.push((i, j));
            }
        }
    }
    ExclusivityGraph::from_edges(sorted.into_iter().map(|(t, _)| t).collect(), &edges)
}

// ---------------------------------------------------------------------------
// Independence number
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndependenceResult {
    /// Best independent set size found (the exact value when `exact`).
    pub lower: usize,
    /// Clique-cover upper bound; equals `lower` when `exact`.
    pub upper: usize,
    pub exact: bool,
    /// Sorted, verified independent set of size `lower`.
    pub witness: Vec<usize>,
}

impl IndependenceResult {
    pub fn value(&self) -> Option<usize> {
        self.exact.then_some(self.lower)
    }
}

/// Maximum clique search over the complement, with greedy colouring bounds.
struct CliqueSearch<'a> {
    adj: &'a [BitSet],
    best: Vec<usize>,
}

impl CliqueSearch<'_> {
    /// Greedy sequential colouring of `cand` in `order`; returns vertices
    /// sorted by colour with the colour index + 1 of each.
    fn colour_sort(&self, cand: &BitSet, order: &[usize]) -> Vec<(usize, usize)> {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &v in order.iter().filter(|&&v| cand.contains(v)) {
            match classes
                .iter_mut()
                .find(|c| c.iter().all(|&u| !self.adj[v].contains(u)))
            {
                Some(c) => c.push(v),
                None => classes.push(vec![v]),
            }
        }
        classes
            .into_iter()
            .enumerate()
            .flat_map(|(k, c)| c.into_iter().map(move |v| (v, k + 1)))
            .collect()
    }

    fn expand(&mut self, mut cand: BitSet, current: &mut Vec<usize>, order: &[usize]) {
        let coloured = self.colour_sort(&cand, order);
        for &(v, colour) in coloured.iter().rev() {
            if current.len() + colour <= self.best.len() {
                return;
            }
            current.push(v);
            let next = cand.intersection(&self.adj[v]);
            if next.is_empty() {
                if current.len() > self.best.len() {
                    self.best = current.clone();
                }
            } else {
                self.expand(next, current, order);
            }
            current.pop();
            cand.remove(v);
        }
    }
}

fn greedy_independent(g: &ExclusivityGraph, order: &[usize]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for &v in order.iter().rev() {
        if chosen.iter().all(|&u| !g.adjacent(u, v)) {
            chosen.push(v);
        }
    }
    chosen.sort();
    chosen
}

/// Exact `α(G)` for graphs up to [`MAX_EXACT_ALPHA_VERTICES`] vertices;
/// larger graphs get a greedy lower bound and a clique-cover upper bound.
pub fn independence_number(g: &ExclusivityGraph) -> IndependenceResult {
    let n = g.order();
    if n == 0 {
        return IndependenceResult {
            lower: 0,
            upper: 0,
            exact: true,
            witness: Vec::new(),
        };
    }
    let co = g.complement();
    // Branch on high-degree (in the complement) vertices first; ties by index.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(co.degree(v)), v));
    let mut all = BitSet::new(n);
    (0..n).for_each(|v| all.insert(v));
    let mut search = CliqueSearch {
        adj: &co.rows,
        best: Vec::new(),
    };
    let cover = search.colour_sort(&all, &order).last().map_or(0, |&(_, c)| c);
    if n > MAX_EXACT_ALPHA_VERTICES {
        let witness = greedy_independent(g, &order);
        return IndependenceResult {
            lower: witness.len(),
            upper: cover,
            exact: false,
            witness,
        };
    }
    search.expand(all, &mut Vec::new(), &order);
    let mut witness = search.best;
    witness.sort();
    assert!(g.is_independent(&witness), "branch and bound produced a dependent set");
    IndependenceResult {
        lower: witness.len(),
        upper: witness.len(),
        exact: true,
        witness,
    }
}

// ---------------------------------------------------------------------------
// Automorphisms
// ---------------------------------------------------------------------------

/// Refines two colourings of the same graph in lockstep with a shared
/// relabelling, so that equal colours stay comparable across both sides.
/// Returns `false` when the colour histograms diverge.
fn refine_pair(g: &ExclusivityGraph, c1: &mut [u32], c2: &mut [u32]) -> bool {
    let n = g.order();
    let distinct = |c: &[u32]| {
        let mut v = c.to_vec();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    let mut classes = distinct(c1);
    loop {
        let signature = |c: &[u32], v: usize| {
            let mut hist: BTreeMap<u32, u32> = BTreeMap::new();
            for u in g.rows[v].iter() {
                *hist.entry(c[u]).or_default() += 1;
            }
            (c[v], hist.into_iter().collect::<Vec<_>>())
        };
        let s1: Vec<_> = (0..n).map(|v| signature(c1, v)).collect();
        let s2: Vec<_> = (0..n).map(|v| signature(c2, v)).collect();
        let mut ids: BTreeMap<&(u32, Vec<(u32, u32)>), (u32, i64)> = BTreeMap::new();
        for s in &s1 {
            ids.entry(s).or_insert((0, 0)).1 += 1;
        }
        for s in &s2 {
            ids.entry(s).or_insert((0, 0)).1 -= 1;
        }
        if ids.values().any(|&(_, balance)| balance != 0) {
            return false;
        }
        for (k, entry) in ids.values_mut().enumerate() {
            entry.0 = k as u32;
        }
        for v in 0..n {
            c1[v] = ids[&s1[v]].0;
            c2[v] = ids[&s2[v]].0;
        }
        let now = ids.len();
        if now == classes {
            return true;
        }
        classes = now;
    }
}

fn search_isomorphism(g: &ExclusivityGraph, mut c1: Vec<u32>, mut c2: Vec<u32>) -> Option<Vec<usize>> {
    if !refine_pair(g, &mut c1, &mut c2) {
        return None;
    }
    let n = g.order();
    let mut cells: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (v, &c) in c1.iter().enumerate() {
        cells.entry(c).or_default().push(v);
    }
    if cells.len() == n {
        let mut by_colour = vec![0usize; n];
        for (w, &c) in c2.iter().enumerate() {
            by_colour[c as usize] = w;
        }
        let perm: Vec<usize> = c1.iter().map(|&c| by_colour[c as usize]).collect();
        let ok = (0..n).all(|u| g.rows[u].iter().all(|v| g.adjacent(perm[u], perm[v])));
        return ok.then_some(perm);
    }
    let (&colour, cell) = cells
        .iter()
        .filter(|(_, c)| c.len() > 1)
        .min_by_key(|(&k, c)| (c.len(), k))
        .expect("non-discrete partition has a non-singleton cell");
    let u = cell[0];
    let fresh = n as u32;
    for w in (0..n).filter(|&w| c2[w] == colour) {
        let mut d1 = c1.clone();
        let mut d2 = c2.clone();
        d1[u] = fresh;
        d2[w] = fresh;
        if let Some(p) = search_isomorphism(g, d1, d2) {
            return Some(p);
        }
    }
    None
}

/// An automorphism mapping `from` to `to`, if one exists.
pub fn automorphism_mapping(g: &ExclusivityGraph, from: usize, to: usize) -> Option<Vec<usize>> {
    let n = g.order();
    let mut c1 = vec![0u32; n];
    let mut c2 = vec![0u32; n];
    c1[from] = 1;
    c2[to] = 1;
    search_isomorphism(g, c1, c2)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Whether the automorphism group acts transitively on the vertices.
pub fn is_vertex_transitive(g: &ExclusivityGraph) -> Result<bool> {
    let n = g.order();
    if n > MAX_TRANSITIVITY_VERTICES {
        return Err(Error::SizeLimit {
            size: n,
            limit: MAX_TRANSITIVITY_VERTICES,
        });
    }
    if n <= 1 {
        return Ok(true);
    }
    if (1..n).any(|v| g.degree(v) != g.degree(0)) {
        return Ok(false);
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for t in 1..n {
        if find(&mut parent, t) == find(&mut parent, 0) {
            continue;
        }
        match automorphism_mapping(g, 0, t) {
            Some(perm) => {
                for (v, &w) in perm.iter().enumerate() {
                    let (a, b) = (find(&mut parent, v), find(&mut parent, w));
                    parent[a] = b;
                }
            }
            None => return Ok(false),
        }
    }
    Ok(true)
}
