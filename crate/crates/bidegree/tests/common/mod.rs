//! Shared brute-force oracles for the integration suites. Everything here
//! enumerates matrices or tuples directly and stays independent of the
//! library's counting paths.

#![allow(dead_code)]

use bidegree::exact::BigCount;
use bidegree::seq::{BidegreeSequence, GraphVariant};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All 0-1 adjacency matrices realizing the margins, as row-major bool
/// vectors. Exhaustive row-by-row enumeration with residual pruning.
pub fn enumerate_realizations(
    in_deg: &[u64],
    out_deg: &[u64],
    variant: GraphVariant,
) -> Vec<Vec<bool>> {
    let n = in_deg.len();
    let mut out = Vec::new();
    match variant {
        GraphVariant::DirectedWithLoops | GraphVariant::DirectedNoLoops => {
            let forbid_diag = variant == GraphVariant::DirectedNoLoops;
            let mut matrix = vec![false; n * n];
            let mut residual = in_deg.to_vec();
            enumerate_rows(
                0,
                n,
                out_deg,
                &mut residual,
                forbid_diag,
                &mut matrix,
                &mut out,
            );
        }
        GraphVariant::UndirectedNoLoops => {
            let mut matrix = vec![false; n * n];
            let mut residual = in_deg.to_vec();
            enumerate_sym(0, n, &mut residual, &mut matrix, &mut out);
        }
    }
    out
}

fn enumerate_rows(
    row: usize,
    n: usize,
    out_deg: &[u64],
    residual: &mut Vec<u64>,
    forbid_diag: bool,
    matrix: &mut Vec<bool>,
    out: &mut Vec<Vec<bool>>,
) {
    if row == n {
        if residual.iter().all(|&r| r == 0) {
            out.push(matrix.clone());
        }
        return;
    }
    // Remaining rows (including this one) can still supply this many to
    // each column.
    let rows_left = (n - row) as u64;
    if residual.iter().any(|&r| r > rows_left) {
        return;
    }
    let mut cols = Vec::new();
    pick_columns(
        row,
        0,
        n,
        out_deg[row] as usize,
        forbid_diag,
        residual,
        &mut cols,
        matrix,
        out,
        out_deg,
    );
}

#[allow(clippy::too_many_arguments)]
fn pick_columns(
    row: usize,
    start: usize,
    n: usize,
    need: usize,
    forbid_diag: bool,
    residual: &mut Vec<u64>,
    chosen: &mut Vec<usize>,
    matrix: &mut Vec<bool>,
    out: &mut Vec<Vec<bool>>,
    out_deg: &[u64],
) {
    if need == 0 {
        enumerate_rows(row + 1, n, out_deg, residual, forbid_diag, matrix, out);
        return;
    }
    if n - start < need {
        return;
    }
    for col in start..n {
        if forbid_diag && col == row {
            continue;
        }
        if residual[col] == 0 {
            continue;
        }
        residual[col] -= 1;
        matrix[row * n + col] = true;
        chosen.push(col);
        pick_columns(
            row,
            col + 1,
            n,
            need - 1,
            forbid_diag,
            residual,
            chosen,
            matrix,
            out,
            out_deg,
        );
        chosen.pop();
        matrix[row * n + col] = false;
        residual[col] += 1;
    }
}

fn enumerate_sym(
    v: usize,
    n: usize,
    residual: &mut Vec<u64>,
    matrix: &mut Vec<bool>,
    out: &mut Vec<Vec<bool>>,
) {
    if v == n {
        if residual.iter().all(|&r| r == 0) {
            out.push(matrix.clone());
        }
        return;
    }
    let need = residual[v] as usize;
    residual[v] = 0;
    let mut partners = Vec::new();
    pick_partners(v, v + 1, n, need, residual, &mut partners, matrix, out);
    residual[v] = need as u64;
}

#[allow(clippy::too_many_arguments)]
fn pick_partners(
    v: usize,
    start: usize,
    n: usize,
    need: usize,
    residual: &mut Vec<u64>,
    partners: &mut Vec<usize>,
    matrix: &mut Vec<bool>,
    out: &mut Vec<Vec<bool>>,
) {
    if need == 0 {
        enumerate_sym(v + 1, n, residual, matrix, out);
        return;
    }
    if n - start < need {
        return;
    }
    for w in start..n {
        if residual[w] == 0 {
            continue;
        }
        residual[w] -= 1;
        matrix[v * n + w] = true;
        matrix[w * n + v] = true;
        partners.push(w);
        pick_partners(v, w + 1, n, need - 1, residual, partners, matrix, out);
        partners.pop();
        matrix[v * n + w] = false;
        matrix[w * n + v] = false;
        residual[w] += 1;
    }
}

pub fn brute_count(seq: &BidegreeSequence, variant: GraphVariant) -> BigCount {
    BigCount::from(enumerate_realizations(seq.in_degrees(), seq.out_degrees(), variant).len())
}

/// Random balanced sequence: N nodes, entries capped, degree sums equal.
pub fn random_balanced(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_degree: u64,
    max_total: u64,
) -> BidegreeSequence {
    loop {
        let out_deg: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=max_degree)).collect();
        let total: u64 = out_deg.iter().sum();
        if total > max_total {
            continue;
        }
        // Scatter the same total over the in side.
        let mut in_deg = vec![0u64; n];
        let mut left = total;
        let mut guard = 0;
        while left > 0 {
            let idx = rng.gen_range(0..n);
            if in_deg[idx] < max_degree.min(n as u64) {
                in_deg[idx] += 1;
                left -= 1;
            }
            guard += 1;
            if guard > 10_000 {
                break;
            }
        }
        if left > 0 {
            continue;
        }
        return BidegreeSequence::new(in_deg, out_deg).expect("balanced by construction");
    }
}

/// Random ratio-form sequence (in-degree sum one above the out-degree sum)
/// with strictly positive degrees at the first two nodes.
pub fn random_ratio_form(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_degree: u64,
    max_total: u64,
) -> BidegreeSequence {
    loop {
        let balanced = random_balanced(rng, n, max_degree, max_total);
        let idx = rng.gen_range(0..n);
        if balanced.in_degrees()[idx] >= max_degree.min(n as u64) {
            continue;
        }
        let seq = balanced
            .increment(idx, bidegree::seq::Side::In)
            .expect("in range");
        if seq.in_degrees()[0] > 0 && seq.in_degrees()[1] > 0 {
            return seq;
        }
    }
}

/// Chi-square upper critical values at significance 0.01.
pub fn chi_square_crit_01(df: usize) -> f64 {
    match df {
        1 => 6.6349,
        2 => 9.2103,
        3 => 11.3449,
        4 => 13.2767,
        5 => 15.0863,
        6 => 16.8119,
        7 => 18.4753,
        8 => 20.0902,
        _ => panic!("no tabulated value for df={df}"),
    }
}

pub fn chi_square_stat(observed: &[u64], expected_each: f64) -> f64 {
    observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected_each;
            d * d / expected_each
        })
        .sum()
}

/// Brute-force value of a pattern-constrained tuple sum; the independent
/// oracle for the symbolic expansions.
pub fn brute_pattern_sum(
    pattern: &bidegree::patterns::EqualityPattern,
    f: &[BigInt],
    g: Option<&[BigInt]>,
    r: usize,
) -> BigInt {
    let n = f.len();
    if pattern.prefix_extent() > r {
        return BigInt::zero();
    }
    let g_table = g.unwrap_or(f);
    let block_of = |i: usize| pattern.blocks().iter().position(|b| b.contains(&i));
    let mut total = BigInt::zero();
    let mut x = vec![0usize; r];
    'outer: loop {
        let ok = (|| {
            for b in pattern.blocks() {
                for w in b.windows(2) {
                    if x[w[0] - 1] != x[w[1] - 1] {
                        return false;
                    }
                }
            }
            for i in pattern.distinct_from()..=r {
                for j in i + 1..=r {
                    if block_of(i).is_some() && block_of(i) == block_of(j) {
                        continue;
                    }
                    if x[i - 1] == x[j - 1] {
                        return false;
                    }
                }
            }
            true
        })();
        if ok {
            let mut prod = BigInt::one();
            for (idx, &v) in x.iter().enumerate() {
                let table = if g.is_some() && idx == 0 { g_table } else { f };
                prod *= &table[v];
            }
            total += prod;
        }
        for slot in x.iter_mut() {
            *slot += 1;
            if *slot < n {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    total
}

/// Sum over all fully pairwise-distinct tuples.
pub fn brute_distinct_sum(f: &[BigInt], r: usize) -> BigInt {
    brute_pattern_sum(
        &bidegree::patterns::EqualityPattern::free(1, false),
        f,
        None,
        r,
    )
}

/// Sum over tuples with the leading pair equal and everything else
/// pairwise distinct, with g on the pair.
pub fn brute_seeded_sum(f: &[BigInt], g: &[BigInt], r: usize) -> BigInt {
    let seed =
        bidegree::patterns::EqualityPattern::new(vec![vec![1, 2]], 1, true).expect("valid seed");
    brute_pattern_sum(&seed, f, Some(g), r)
}
