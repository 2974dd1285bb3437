//! Degree-preserving edge-swap sampling of realizations.
//!
//! The chain picks two edges uniformly and proposes the crossed rewiring;
//! inadmissible proposals (duplicate edges, forbidden loops, broken
//! symmetry) leave the state unchanged, so the kernel is symmetric and the
//! stationary distribution is uniform over the reachable realization
//! class. For loop-free digraphs a three-cycle reorientation move is mixed
//! in (default on) to connect orbits the two-edge swap alone cannot reach.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::ratio_to_f64;
use crate::graphical::is_graphical;
use crate::seq::{Balance, BidegreeSequence, GraphVariant, SeqError, Side};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplerError {
    #[error("sequence has no realization under this variant")]
    NotGraphical,
    #[error("ratio estimation needs a ratio-form sequence")]
    NotRatioForm,
    #[error(transparent)]
    Seq(#[from] SeqError),
}

/// Labeled realization: a 0-1 adjacency matrix with cached degree vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDigraph {
    n: usize,
    adjacency: Vec<bool>,
    variant: GraphVariant,
    in_deg: Vec<u64>,
    out_deg: Vec<u64>,
    edges: Vec<(usize, usize)>,
}

impl LabeledDigraph {
    fn empty(n: usize, variant: GraphVariant) -> Self {
        LabeledDigraph {
            n,
            adjacency: vec![false; n * n],
            variant,
            in_deg: vec![0; n],
            out_deg: vec![0; n],
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> GraphVariant {
        self.variant
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u * self.n + v]
    }

    /// Directed edge list; for undirected graphs each edge appears once
    /// with `u <= v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn in_degrees(&self) -> &[u64] {
        &self.in_deg
    }

    pub fn out_degrees(&self) -> &[u64] {
        &self.out_deg
    }

    pub fn degree_sequence(&self) -> BidegreeSequence {
        BidegreeSequence::new(self.in_deg.clone(), self.out_deg.clone())
            .expect("cached degrees are balanced")
    }

    fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(!self.has_edge(u, v));
        self.adjacency[u * self.n + v] = true;
        if self.variant == GraphVariant::UndirectedNoLoops {
            self.adjacency[v * self.n + u] = true;
            let (a, b) = (u.min(v), u.max(v));
            self.edges.push((a, b));
            self.out_deg[u] += 1;
            self.in_deg[u] += 1;
            self.out_deg[v] += 1;
            self.in_deg[v] += 1;
        } else {
            self.edges.push((u, v));
            self.out_deg[u] += 1;
            self.in_deg[v] += 1;
        }
    }

    fn remove_edge_at(&mut self, idx: usize) -> (usize, usize) {
        let (u, v) = self.edges.swap_remove(idx);
        self.adjacency[u * self.n + v] = false;
        if self.variant == GraphVariant::UndirectedNoLoops {
            self.adjacency[v * self.n + u] = false;
            self.out_deg[u] -= 1;
            self.in_deg[u] -= 1;
            self.out_deg[v] -= 1;
            self.in_deg[v] -= 1;
        } else {
            self.out_deg[u] -= 1;
            self.in_deg[v] -= 1;
        }
        (u, v)
    }

    /// Canonical byte encoding of the adjacency matrix (row-major bits).
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; (self.n * self.n).div_ceil(8)];
        for (i, &bit) in self.adjacency.iter().enumerate() {
            if bit {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }
}

/// Greedy realization: repeatedly hand the largest remaining out-degree its
/// edges, targeting the largest remaining in-degrees (largest-first
/// constructions are exact for all three variants). The seed only shuffles
/// tie order among equal-degree targets.
pub fn realize(
    seq: &BidegreeSequence,
    variant: GraphVariant,
    rng_seed: u64,
) -> Result<LabeledDigraph, SamplerError> {
    if !is_graphical(seq, variant)? {
        return Err(SamplerError::NotGraphical);
    }
    let n = seq.len();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut graph = LabeledDigraph::empty(n, variant);
    // Random tie order, stable under the subsequent sorts.
    let mut tiebreak: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        tiebreak.swap(i, rng.gen_range(0..=i));
    }

    match variant {
        GraphVariant::UndirectedNoLoops => {
            let mut residual: Vec<u64> = seq.in_degrees().to_vec();
            loop {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&v| (std::cmp::Reverse(residual[v]), tiebreak[v]));
                let u = order[0];
                if residual[u] == 0 {
                    break;
                }
                let d = residual[u];
                residual[u] = 0;
                let mut placed = 0;
                for &v in order.iter().skip(1) {
                    if placed == d {
                        break;
                    }
                    if residual[v] == 0 {
                        break;
                    }
                    residual[v] -= 1;
                    graph.add_edge(u, v);
                    placed += 1;
                }
                if placed < d {
                    return Err(SamplerError::NotGraphical);
                }
            }
        }
        GraphVariant::DirectedWithLoops | GraphVariant::DirectedNoLoops => {
            let loops_ok = variant == GraphVariant::DirectedWithLoops;
            let mut res_in: Vec<u64> = seq.in_degrees().to_vec();
            let mut res_out: Vec<u64> = seq.out_degrees().to_vec();
            loop {
                let u = (0..n)
                    .max_by_key(|&v| (res_out[v], res_in[v], std::cmp::Reverse(tiebreak[v])))
                    .expect("nonempty");
                if res_out[u] == 0 {
                    break;
                }
                let d = res_out[u];
                res_out[u] = 0;
                let mut targets: Vec<usize> = (0..n)
                    .filter(|&v| res_in[v] > 0 && (loops_ok || v != u))
                    .collect();
                // Ties on residual in-degree prefer nodes that still have
                // out-stubs to place; this keeps the greedy step exact for
                // the loop-free case.
                targets.sort_by_key(|&v| {
                    (
                        std::cmp::Reverse(res_in[v]),
                        std::cmp::Reverse(res_out[v]),
                        tiebreak[v],
                    )
                });
                if (targets.len() as u64) < d {
                    return Err(SamplerError::NotGraphical);
                }
                for &v in targets.iter().take(d as usize) {
                    res_in[v] -= 1;
                    graph.add_edge(u, v);
                }
            }
            if res_in.iter().any(|&x| x > 0) {
                return Err(SamplerError::NotGraphical);
            }
        }
    }
    debug_assert_eq!(graph.in_degrees(), seq.in_degrees());
    debug_assert_eq!(graph.out_degrees(), seq.out_degrees());
    Ok(graph)
}

/// Tuning for the swap chain.
#[derive(Debug, Clone)]
pub struct ChainOptions {
    /// Mix in the directed three-cycle reorientation move, needed to
    /// connect the loop-free digraph realization class in general.
    pub triangle_moves: bool,
    /// Probability of attempting a triangle move per step when enabled.
    pub triangle_prob: f64,
}

impl ChainOptions {
    pub fn for_variant(variant: GraphVariant) -> Self {
        ChainOptions {
            triangle_moves: variant == GraphVariant::DirectedNoLoops,
            triangle_prob: 0.2,
        }
    }
}

/// One lazy chain step: propose a degree-preserving rewiring and apply it
/// if admissible, otherwise leave the graph unchanged. Degrees are
/// preserved exactly in either case.
pub fn switch_step(graph: &mut LabeledDigraph, rng: &mut impl Rng) {
    switch_step_with(graph, rng, &ChainOptions::for_variant(graph.variant()));
}

pub fn switch_step_with(graph: &mut LabeledDigraph, rng: &mut impl Rng, opts: &ChainOptions) {
    if opts.triangle_moves && rng.gen_bool(opts.triangle_prob) {
        triangle_step(graph, rng);
        return;
    }
    let m = graph.edges().len();
    if m < 2 {
        return;
    }
    let i = rng.gen_range(0..m);
    let j = rng.gen_range(0..m);
    if i == j {
        return;
    }
    let (u, v) = graph.edges()[i];
    let (x, y) = graph.edges()[j];
    match graph.variant() {
        GraphVariant::UndirectedNoLoops => {
            // Two rewirings of {u,v},{x,y}; pick one uniformly.
            let ((a, b), (c, d)) = if rng.gen_bool(0.5) {
                ((u, x), (v, y))
            } else {
                ((u, y), (v, x))
            };
            if a == b || c == d {
                return;
            }
            if graph.has_edge(a, b) || graph.has_edge(c, d) {
                return;
            }
            let (hi, lo) = (i.max(j), i.min(j));
            graph.remove_edge_at(hi);
            graph.remove_edge_at(lo);
            graph.add_edge(a, b);
            graph.add_edge(c, d);
        }
        GraphVariant::DirectedWithLoops | GraphVariant::DirectedNoLoops => {
            // u->v, x->y become u->y, x->v.
            if u == x || v == y {
                return;
            }
            if graph.variant() == GraphVariant::DirectedNoLoops && (u == y || x == v) {
                return;
            }
            if graph.has_edge(u, y) || graph.has_edge(x, v) {
                return;
            }
            let (hi, lo) = (i.max(j), i.min(j));
            graph.remove_edge_at(hi);
            graph.remove_edge_at(lo);
            graph.add_edge(u, y);
            graph.add_edge(x, v);
        }
    }
}

/// Reverses a directed three-cycle chosen uniformly at random, a self-inverse
/// move that preserves degrees and keeps the kernel symmetric.
fn triangle_step(graph: &mut LabeledDigraph, rng: &mut impl Rng) {
    let n = graph.node_count();
    if n < 3 {
        return;
    }
    let u = rng.gen_range(0..n);
    let v = rng.gen_range(0..n);
    let w = rng.gen_range(0..n);
    if u == v || v == w || u == w {
        return;
    }
    if !(graph.has_edge(u, v) && graph.has_edge(v, w) && graph.has_edge(w, u)) {
        return;
    }
    if graph.has_edge(v, u) || graph.has_edge(w, v) || graph.has_edge(u, w) {
        return;
    }
    let mut remove = |a: usize, b: usize| {
        let idx = graph
            .edges()
            .iter()
            .position(|&e| e == (a, b))
            .expect("edge present");
        graph.remove_edge_at(idx);
    };
    remove(u, v);
    remove(v, w);
    remove(w, u);
    graph.add_edge(v, u);
    graph.add_edge(w, v);
    graph.add_edge(u, w);
}

/// Draws `n_samples` realizations from the lazy switch chain after
/// `burn_in` steps, keeping every `thin`-th state. Deterministic for a
/// fixed seed.
pub fn sample_uniform(
    seq: &BidegreeSequence,
    variant: GraphVariant,
    burn_in: u64,
    thin: u64,
    n_samples: usize,
    rng_seed: u64,
) -> Result<Vec<LabeledDigraph>, SamplerError> {
    let mut graph = realize(seq, variant, rng_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed.wrapping_add(1));
    let opts = ChainOptions::for_variant(variant);
    for _ in 0..burn_in {
        switch_step_with(&mut graph, &mut rng, &opts);
    }
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        for _ in 0..thin.max(1) {
            switch_step_with(&mut graph, &mut rng, &opts);
        }
        out.push(graph.clone());
    }
    Ok(out)
}

/// Histogram of a common-neighbor count over sampled realizations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborHistogram {
    pub counts: BTreeMap<u64, u64>,
    pub samples: u64,
}

impl NeighborHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Number of common out-neighbors (or in-neighbors) of `i` and `j` in one
/// realization.
pub fn common_neighbors(graph: &LabeledDigraph, i: usize, j: usize, direction: Side) -> u64 {
    let n = graph.node_count();
    (0..n)
        .filter(|&v| match direction {
            Side::Out => graph.has_edge(i, v) && graph.has_edge(j, v),
            Side::In => graph.has_edge(v, i) && graph.has_edge(v, j),
        })
        .count() as u64
}

/// Histogram of the common-neighbor count of a fixed node pair over a
/// sample of realizations.
pub fn common_neighbor_stats(
    samples: &[LabeledDigraph],
    i: usize,
    j: usize,
    direction: Side,
) -> NeighborHistogram {
    let mut counts = BTreeMap::new();
    for g in samples {
        *counts
            .entry(common_neighbors(g, i, j, direction))
            .or_insert(0) += 1;
    }
    NeighborHistogram {
        counts,
        samples: samples.len() as u64,
    }
}

/// Empirical unit-decrement ratio estimate with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRatio {
    pub estimate: f64,
    pub std_error: f64,
    /// Samples classified to the numerator and denominator sequences.
    pub hits_i: u64,
    pub hits_j: u64,
    pub samples: u64,
}

/// Estimates the exact count ratio `count(d - e_i) / count(d - e_j)` of a
/// ratio-form sequence by sampling a balanced parent: an auxiliary node
/// with a single stub on the light side is appended, and every sampled
/// realization is classified by which node the auxiliary stub attaches to.
/// The ratio of attachment frequencies estimates the count ratio; the
/// standard error comes from the conditional binomial via the delta
/// method.
pub fn estimate_ratio_empirical(
    seq: &BidegreeSequence,
    i: usize,
    j: usize,
    samples: usize,
    rng_seed: u64,
) -> Result<EmpiricalRatio, SamplerError> {
    // Orient so the heavy side is the in-side; the auxiliary node then
    // carries one unit of out-degree and its single edge targets the node
    // whose in-degree is notionally decremented.
    let working = match seq.balance() {
        Balance::InHeavy => seq.clone(),
        Balance::OutHeavy => {
            BidegreeSequence::new(seq.out_degrees().to_vec(), seq.in_degrees().to_vec())
                .expect("transpose keeps sums")
        }
        Balance::Balanced => return Err(SamplerError::NotRatioForm),
    };
    let n = working.len();
    if i >= n || j >= n {
        return Err(SeqError::IndexOutOfRange(i.max(j), n).into());
    }
    let mut in_deg = working.in_degrees().to_vec();
    let mut out_deg = working.out_degrees().to_vec();
    in_deg.push(0);
    out_deg.push(1);
    let parent = BidegreeSequence::new(in_deg, out_deg).expect("parent is balanced");
    let aux = n;

    let burn_in = (parent.edge_total() * 20).max(200);
    let graphs = sample_uniform(
        &parent,
        GraphVariant::DirectedWithLoops,
        burn_in,
        3,
        samples,
        rng_seed,
    )?;
    let mut hits_i = 0u64;
    let mut hits_j = 0u64;
    for g in &graphs {
        if g.has_edge(aux, i) {
            hits_i += 1;
        } else if g.has_edge(aux, j) {
            hits_j += 1;
        }
    }
    let relevant = hits_i + hits_j;
    let (estimate, std_error) = if hits_j == 0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let p = hits_i as f64 / relevant as f64;
        let est = hits_i as f64 / hits_j as f64;
        // d/dp [p/(1-p)] = 1/(1-p)^2
        let se = (p * (1.0 - p) / relevant as f64).sqrt() / ((1.0 - p) * (1.0 - p));
        (est, se)
    };
    Ok(EmpiricalRatio {
        estimate,
        std_error,
        hits_i,
        hits_j,
        samples: samples as u64,
    })
}

/// f64 view of an exact ratio, for comparisons in reports.
pub fn exact_ratio_f64(seq: &BidegreeSequence, i: usize, j: usize) -> Option<f64> {
    crate::exact::ratio_exact(seq, i, j)
        .ok()
        .map(|r| ratio_to_f64(&r))
}
