//! Graphicality tests: does at least one realization exist?
//!
//! Gale-Ryser decides the loop-allowing directed case (a square 0-1 matrix
//! with prescribed margins is a bipartite realization), Fulkerson-Chen-Anstee
//! the loop-free directed case, and Erdos-Gallai the undirected case.

use crate::seq::{BidegreeSequence, GraphVariant, SeqError};

/// True iff `seq` has at least one realization under `variant`.
///
/// Sequences whose degree sums differ have no realization and report false.
pub fn is_graphical(seq: &BidegreeSequence, variant: GraphVariant) -> Result<bool, SeqError> {
    if variant == GraphVariant::UndirectedNoLoops && seq.in_degrees() != seq.out_degrees() {
        return Err(SeqError::UnsupportedVariant);
    }
    if seq.in_sum() != seq.out_sum() {
        return Ok(false);
    }
    Ok(match variant {
        GraphVariant::DirectedWithLoops => gale_ryser(seq.in_degrees(), seq.out_degrees()),
        GraphVariant::DirectedNoLoops => fulkerson_chen_anstee(seq.in_degrees(), seq.out_degrees()),
        GraphVariant::UndirectedNoLoops => erdos_gallai(seq.in_degrees()),
    })
}

/// Gale-Ryser: a 0-1 matrix with row sums `rows` and column sums `cols`
/// (both of length n) exists iff the sums agree and every prefix of the
/// sorted column sums is dominated by `sum_i min(rows_i, k)`.
fn gale_ryser(cols: &[u64], rows: &[u64]) -> bool {
    let n = rows.len() as u64;
    if rows.iter().chain(cols.iter()).any(|&d| d > n) {
        return false;
    }
    let mut cols_sorted = cols.to_vec();
    cols_sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut lhs = 0u64;
    for (k, &c) in cols_sorted.iter().enumerate() {
        let k1 = k as u64 + 1;
        lhs += c;
        let rhs: u64 = rows.iter().map(|&r| r.min(k1)).sum();
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// Fulkerson-Chen-Anstee for loop-free digraphs, with node pairs sorted
/// lexicographically by decreasing (in-degree, out-degree).
fn fulkerson_chen_anstee(in_deg: &[u64], out_deg: &[u64]) -> bool {
    let n = in_deg.len();
    if n == 0 {
        return true;
    }
    // A node can reach at most n-1 distinct others.
    let max_other = n as u64 - 1;
    if in_deg.iter().chain(out_deg.iter()).any(|&d| d > max_other) {
        return false;
    }
    let mut pairs: Vec<(u64, u64)> = in_deg
        .iter()
        .copied()
        .zip(out_deg.iter().copied())
        .collect();
    pairs.sort_unstable_by(|a, b| b.cmp(a));
    let mut lhs = 0u64;
    for k in 0..n {
        lhs += pairs[k].0;
        let k1 = k as u64 + 1;
        let head: u64 = pairs[..=k].iter().map(|p| p.1.min(k1 - 1)).sum();
        let tail: u64 = pairs[k + 1..].iter().map(|p| p.1.min(k1)).sum();
        if lhs > head + tail {
            return false;
        }
    }
    true
}

/// Erdos-Gallai for simple undirected graphs.
fn erdos_gallai(deg: &[u64]) -> bool {
    let total: u64 = deg.iter().sum();
    if !total.is_multiple_of(2) {
        return false;
    }
    let n = deg.len();
    if deg.iter().any(|&d| d >= n as u64 && d > 0) {
        return false;
    }
    let mut d = deg.to_vec();
    d.sort_unstable_by(|a, b| b.cmp(a));
    let mut lhs = 0u64;
    for k in 0..n {
        lhs += d[k];
        let k1 = (k + 1) as u64;
        let tail: u64 = d[k + 1..].iter().map(|&x| x.min(k1)).sum();
        if lhs > k1 * (k1 - 1) + tail {
            return false;
        }
    }
    true
}
