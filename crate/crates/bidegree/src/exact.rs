//! Exact realization counts.
//!
//! The workhorse is a memoized dynamic program over residual margins: rows
//! are placed one at a time and columns are tracked only as a histogram of
//! residual sums, which collapses the exponentially many column orderings.
//! Loop-free directed counting peels one node at a time, tracking that
//! node's own column as a distinguished class until its row is placed.
//! Undirected counting uses a pairing recursion on the sorted residual
//! degree multiset.
//!
//! On top of the counters sit the closed forms for special shapes, the
//! two-node partition expansion, the normalized common-neighbor profile,
//! and exact unit-decrement count ratios.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::seq::{Balance, BidegreeSequence, GraphVariant, SeqError, Side};

/// Arbitrary-precision nonnegative realization count.
pub type BigCount = BigUint;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("state space exceeds the configured budget ({0})")]
    TooLarge(String),
    #[error("exact counts need equal degree sums")]
    NotBalanced,
    #[error("operation needs a ratio-form sequence (degree sums one apart)")]
    NotRatioForm,
    #[error("sequence does not match the closed-form shape")]
    ShapeMismatch,
    #[error("sequence does not match the all-ones base shape")]
    BadShape,
    #[error("no realization has zero common neighbors (empty base family)")]
    EmptyX0,
    #[error("denominator count is zero")]
    DenominatorZero,
    #[error("variant requires equal in- and out-degree vectors")]
    UnsupportedVariant,
    #[error(transparent)]
    Seq(#[from] SeqError),
}

/// Budget knobs for the exact counters.
#[derive(Debug, Clone)]
pub struct ExactLimits {
    /// Maximum number of (nonzero) nodes a count may involve.
    pub max_nodes: usize,
    /// Cap on memo-table entries across all variants.
    pub max_memo_entries: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            max_nodes: 24,
            max_memo_entries: 4_000_000,
        }
    }
}

type LoopsKey = (Vec<u64>, Vec<(u64, u64)>);
type NoLoopsKey = (Vec<(u64, u64, u64)>, Vec<(u64, u64)>);
type UndirectedKey = Vec<(u64, u64)>;

/// Reusable counting context. The memo tables are keyed on canonical
/// residual states, so repeated counts of related sequences (partition
/// residuals, telescoping steps) share work.
pub struct ExactCtx {
    limits: ExactLimits,
    memo_loops: HashMap<LoopsKey, BigUint>,
    memo_noloops: HashMap<NoLoopsKey, BigUint>,
    memo_undirected: HashMap<UndirectedKey, BigUint>,
}

impl Default for ExactCtx {
    fn default() -> Self {
        ExactCtx::new(ExactLimits::default())
    }
}

impl ExactCtx {
    pub fn new(limits: ExactLimits) -> Self {
        ExactCtx {
            limits,
            memo_loops: HashMap::new(),
            memo_noloops: HashMap::new(),
            memo_undirected: HashMap::new(),
        }
    }

    fn memo_len(&self) -> usize {
        self.memo_loops.len() + self.memo_noloops.len() + self.memo_undirected.len()
    }

    fn check_budget(&self) -> Result<(), ExactError> {
        if self.memo_len() > self.limits.max_memo_entries {
            return Err(ExactError::TooLarge(format!(
                "memo table exceeded {} entries",
                self.limits.max_memo_entries
            )));
        }
        Ok(())
    }

    /// Exact number of realizations of `seq` under `variant`.
    pub fn count(
        &mut self,
        seq: &BidegreeSequence,
        variant: GraphVariant,
    ) -> Result<BigCount, ExactError> {
        if variant == GraphVariant::UndirectedNoLoops && seq.in_degrees() != seq.out_degrees() {
            return Err(ExactError::UnsupportedVariant);
        }
        if seq.in_sum() != seq.out_sum() {
            return Err(ExactError::NotBalanced);
        }
        match variant {
            GraphVariant::DirectedWithLoops => {
                let rows: Vec<u64> = seq
                    .out_degrees()
                    .iter()
                    .copied()
                    .filter(|&d| d > 0)
                    .collect();
                let cols: Vec<u64> = seq
                    .in_degrees()
                    .iter()
                    .copied()
                    .filter(|&d| d > 0)
                    .collect();
                if rows.len().max(cols.len()) > self.limits.max_nodes {
                    return Err(ExactError::TooLarge(format!(
                        "{} nonzero nodes exceeds limit {}",
                        rows.len().max(cols.len()),
                        self.limits.max_nodes
                    )));
                }
                // A column can receive at most one entry per row.
                if cols.iter().any(|&c| c > seq.len() as u64)
                    || rows.iter().any(|&r| r > seq.len() as u64)
                {
                    return Ok(BigUint::zero());
                }
                let mut rows_sorted = rows;
                rows_sorted.sort_unstable_by(|a, b| b.cmp(a));
                self.count_loops(rows_sorted, to_hist(&cols))
            }
            GraphVariant::DirectedNoLoops => {
                let live: Vec<(u64, u64)> = seq
                    .in_degrees()
                    .iter()
                    .zip(seq.out_degrees())
                    .map(|(&a, &b)| (a, b))
                    .filter(|&(a, b)| a > 0 || b > 0)
                    .collect();
                if live.len() > self.limits.max_nodes {
                    return Err(ExactError::TooLarge(format!(
                        "{} nonzero nodes exceeds limit {}",
                        live.len(),
                        self.limits.max_nodes
                    )));
                }
                let n = seq.len() as u64;
                if live.iter().any(|&(a, b)| a >= n || b >= n) && n >= 1 {
                    return Ok(BigUint::zero());
                }
                self.count_noloops(to_live_classes(&live), Vec::new())
            }
            GraphVariant::UndirectedNoLoops => {
                let deg: Vec<u64> = seq
                    .in_degrees()
                    .iter()
                    .copied()
                    .filter(|&d| d > 0)
                    .collect();
                if deg.len() > self.limits.max_nodes {
                    return Err(ExactError::TooLarge(format!(
                        "{} nonzero nodes exceeds limit {}",
                        deg.len(),
                        self.limits.max_nodes
                    )));
                }
                if deg.iter().any(|&d| d > seq.len() as u64 - 1) {
                    return Ok(BigUint::zero());
                }
                if deg.iter().sum::<u64>() % 2 == 1 {
                    return Ok(BigUint::zero());
                }
                self.count_undirected(to_hist(&deg))
            }
        }
    }

    /// Rows placed largest-first into a histogram of column residuals.
    fn count_loops(
        &mut self,
        rows: Vec<u64>,
        cols: Vec<(u64, u64)>,
    ) -> Result<BigUint, ExactError> {
        if rows.is_empty() {
            return Ok(if cols.is_empty() {
                BigUint::one()
            } else {
                BigUint::zero()
            });
        }
        // Each remaining row contributes at most one entry per column.
        if cols.first().is_some_and(|&(v, _)| v > rows.len() as u64) {
            return Ok(BigUint::zero());
        }
        let slots: u64 = cols.iter().map(|&(_, n)| n).sum();
        if rows[0] > slots {
            return Ok(BigUint::zero());
        }
        let key = (rows.clone(), cols.clone());
        if let Some(v) = self.memo_loops.get(&key) {
            return Ok(v.clone());
        }
        self.check_budget()?;
        let rest = rows[1..].to_vec();
        let mut total = BigUint::zero();
        for (weight, next_cols) in distribute_over_hist(&cols, rows[0]) {
            let sub = self.count_loops(rest.clone(), next_cols)?;
            total += sub * BigUint::from(weight);
        }
        self.memo_loops.insert(key, total.clone());
        Ok(total)
    }

    /// Peels one live node at a time: places its full out-row into the other
    /// columns, then retires its own column (which that row may not touch).
    fn count_noloops(
        &mut self,
        live: Vec<(u64, u64, u64)>,
        retired: Vec<(u64, u64)>,
    ) -> Result<BigUint, ExactError> {
        let live_total: u64 = live.iter().map(|&(_, _, n)| n).sum();
        if live.is_empty() {
            return Ok(if retired.is_empty() {
                BigUint::one()
            } else {
                BigUint::zero()
            });
        }
        if retired.iter().any(|&(v, _)| v > live_total) {
            return Ok(BigUint::zero());
        }
        if live.iter().any(|&(c, _, _)| c > live_total - 1) {
            return Ok(BigUint::zero());
        }
        let key = (live.clone(), retired.clone());
        if let Some(v) = self.memo_noloops.get(&key) {
            return Ok(v.clone());
        }
        self.check_budget()?;

        // Canonical pick: one node from the first class (max (b, c) order).
        let (c0, b0, n0) = live[0];
        let mut rest_live = live.clone();
        if n0 == 1 {
            rest_live.remove(0);
        } else {
            rest_live[0].2 -= 1;
        }

        // Pools the placed row may hit: retired columns and other live
        // nodes' columns, all with residual >= 1.
        let mut pools: Vec<(PoolRef, u64, u64)> = Vec::new();
        for &(v, n) in &retired {
            pools.push((PoolRef::Retired, v, n));
        }
        for (idx, &(c, _, n)) in rest_live.iter().enumerate() {
            if c >= 1 {
                pools.push((PoolRef::Live(idx), c, n));
            }
        }

        let mut picks = vec![0u64; pools.len()];
        let mut total = BigUint::zero();
        enumerate_pool_picks(&pools, 0, b0, &mut picks, &mut |picks| {
            let mut weight = BigUint::one();
            let mut new_retired: BTreeMap<u64, u64> = BTreeMap::new();
            for &(v, n) in &retired {
                *new_retired.entry(v).or_insert(0) += n;
            }
            let mut new_live: BTreeMap<(u64, u64), u64> = BTreeMap::new();
            for &(c, b, n) in &rest_live {
                *new_live.entry((c, b)).or_insert(0) += n;
            }
            for (pool, &k) in pools.iter().zip(picks.iter()) {
                if k == 0 {
                    continue;
                }
                let (pool_ref, v, n) = *pool;
                weight *= binomial_big(n, k);
                match pool_ref {
                    PoolRef::Retired => {
                        sub_count(&mut new_retired, v, k);
                        if v > 1 {
                            *new_retired.entry(v - 1).or_insert(0) += k;
                        }
                    }
                    PoolRef::Live(idx) => {
                        let (c, b, _) = rest_live[idx];
                        debug_assert_eq!(c, v);
                        sub_count_pair(&mut new_live, (c, b), k);
                        *new_live.entry((c - 1, b)).or_insert(0) += k;
                    }
                }
            }
            // The peeled node's own column becomes an ordinary retired one.
            if c0 >= 1 {
                *new_retired.entry(c0).or_insert(0) += 1;
            }
            let live_vec = live_classes_from_map(&new_live);
            let retired_vec = hist_from_map(&new_retired);
            match self.count_noloops(live_vec, retired_vec) {
                Ok(sub) => {
                    total += sub * weight;
                    Ok(())
                }
                Err(e) => Err(e),
            }
        })?;
        self.memo_noloops.insert(key, total.clone());
        Ok(total)
    }

    /// Pairing recursion: connect one node of maximal residual degree to a
    /// sub-multiset of the others.
    fn count_undirected(&mut self, classes: Vec<(u64, u64)>) -> Result<BigUint, ExactError> {
        if classes.is_empty() {
            return Ok(BigUint::one());
        }
        let total_nodes: u64 = classes.iter().map(|&(_, n)| n).sum();
        if classes[0].0 > total_nodes - 1 {
            return Ok(BigUint::zero());
        }
        let key = classes.clone();
        if let Some(v) = self.memo_undirected.get(&key) {
            return Ok(v.clone());
        }
        self.check_budget()?;

        let d0 = classes[0].0;
        let mut rest = classes.clone();
        if rest[0].1 == 1 {
            rest.remove(0);
        } else {
            rest[0].1 -= 1;
        }

        let mut total = BigUint::zero();
        for (weight, next) in distribute_over_hist(&rest, d0) {
            let sub = self.count_undirected(next)?;
            total += sub * BigUint::from(weight);
        }
        self.memo_undirected.insert(key, total.clone());
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy)]
enum PoolRef {
    Retired,
    Live(usize),
}

fn sub_count(map: &mut BTreeMap<u64, u64>, key: u64, k: u64) {
    let e = map.get_mut(&key).expect("class present");
    debug_assert!(*e >= k);
    *e -= k;
    if *e == 0 {
        map.remove(&key);
    }
}

fn sub_count_pair(map: &mut BTreeMap<(u64, u64), u64>, key: (u64, u64), k: u64) {
    let e = map.get_mut(&key).expect("class present");
    debug_assert!(*e >= k);
    *e -= k;
    if *e == 0 {
        map.remove(&key);
    }
}

fn to_hist(values: &[u64]) -> Vec<(u64, u64)> {
    let mut map: BTreeMap<u64, u64> = BTreeMap::new();
    for &v in values {
        if v > 0 {
            *map.entry(v).or_insert(0) += 1;
        }
    }
    hist_from_map(&map)
}

fn hist_from_map(map: &BTreeMap<u64, u64>) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = map
        .iter()
        .filter(|&(&v, &n)| v > 0 && n > 0)
        .map(|(&v, &n)| (v, n))
        .collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn to_live_classes(pairs: &[(u64, u64)]) -> Vec<(u64, u64, u64)> {
    let mut map: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for &(a, b) in pairs {
        *map.entry((a, b)).or_insert(0) += 1;
    }
    live_classes_from_map(&map)
}

/// Classes sorted so the canonical peel target (max out-degree, then max
/// residual in-degree) comes first.
fn live_classes_from_map(map: &BTreeMap<(u64, u64), u64>) -> Vec<(u64, u64, u64)> {
    let mut out: Vec<(u64, u64, u64)> = map
        .iter()
        .filter(|&(_, &n)| n > 0)
        .map(|(&(c, b), &n)| (c, b, n))
        .collect();
    out.sort_unstable_by_key(|&(c, b, _)| (std::cmp::Reverse(b), std::cmp::Reverse(c)));
    out
}

/// All ways to place `r` ones into histogram classes (at most one per
/// member), with the multiplicity weight and the resulting histogram.
fn distribute_over_hist(classes: &[(u64, u64)], r: u64) -> Vec<(u128, Vec<(u64, u64)>)> {
    let mut out = Vec::new();
    let mut picks = vec![0u64; classes.len()];
    fn rec(
        classes: &[(u64, u64)],
        idx: usize,
        remaining: u64,
        picks: &mut Vec<u64>,
        out: &mut Vec<(u128, Vec<(u64, u64)>)>,
    ) {
        if idx == classes.len() {
            if remaining == 0 {
                let mut weight: u128 = 1;
                let mut map: BTreeMap<u64, u64> = BTreeMap::new();
                for (&(v, n), &k) in classes.iter().zip(picks.iter()) {
                    weight *= binomial_u128(n, k);
                    if n > k {
                        *map.entry(v).or_insert(0) += n - k;
                    }
                    if k > 0 && v > 1 {
                        *map.entry(v - 1).or_insert(0) += k;
                    }
                }
                out.push((weight, hist_from_map(&map)));
            }
            return;
        }
        let (_, n) = classes[idx];
        let max_here = n.min(remaining);
        // Feasibility: later classes must be able to absorb the rest.
        let later: u64 = classes[idx + 1..].iter().map(|&(_, n)| n).sum();
        for k in 0..=max_here {
            if remaining - k > later {
                continue;
            }
            picks[idx] = k;
            rec(classes, idx + 1, remaining - k, picks, out);
        }
        picks[idx] = 0;
    }
    rec(classes, 0, r, &mut picks, &mut out);
    out
}

fn enumerate_pool_picks<E>(
    pools: &[(PoolRef, u64, u64)],
    idx: usize,
    remaining: u64,
    picks: &mut Vec<u64>,
    f: &mut impl FnMut(&[u64]) -> Result<(), E>,
) -> Result<(), E> {
    if idx == pools.len() {
        if remaining == 0 {
            f(picks)?;
        }
        return Ok(());
    }
    let (_, _, n) = pools[idx];
    let later: u64 = pools[idx + 1..].iter().map(|&(_, _, n)| n).sum();
    for k in 0..=n.min(remaining) {
        if remaining - k > later {
            continue;
        }
        picks[idx] = k;
        enumerate_pool_picks(pools, idx + 1, remaining - k, picks, f)?;
    }
    picks[idx] = 0;
    Ok(())
}

pub fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        result = result * (n - k + i) as u128 / i as u128;
    }
    result
}

pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut result = BigUint::one();
    for i in 1..=k {
        result = result * BigUint::from(n - k + i) / BigUint::from(i);
    }
    result
}

pub fn factorial_big(n: u64) -> BigUint {
    let mut result = BigUint::one();
    for i in 2..=n {
        result *= BigUint::from(i);
    }
    result
}

/// `(sum parts)! / prod parts!` as an exact product of binomials.
fn multinomial_big(parts: impl IntoIterator<Item = u64>) -> BigUint {
    let mut result = BigUint::one();
    let mut total = 0u64;
    for p in parts {
        total += p;
        result *= binomial_big(total, p);
    }
    result
}

/// Exact realization count with default limits.
pub fn count_exact(seq: &BidegreeSequence, variant: GraphVariant) -> Result<BigCount, ExactError> {
    ExactCtx::default().count(seq, variant)
}

/// Closed-form count for the star-like shape: one degree vector has k
/// nonzero entries, the other consists of q copies of k, then ones and
/// zeros. Returns `(S - qk)! / prod_i (a_i - q)!`, or zero when the
/// smallest nonzero entry is below q. The transposed shape is also
/// accepted.
pub fn count_closed_special(seq: &BidegreeSequence) -> Result<BigCount, ExactError> {
    if seq.in_sum() != seq.out_sum() {
        return Err(ExactError::ShapeMismatch);
    }
    if let Some(c) = try_star_shape(seq.in_degrees(), seq.out_degrees()) {
        return Ok(c);
    }
    if let Some(c) = try_star_shape(seq.out_degrees(), seq.in_degrees()) {
        return Ok(c);
    }
    Err(ExactError::ShapeMismatch)
}

fn try_star_shape(a: &[u64], b: &[u64]) -> Option<BigUint> {
    let s: u64 = a.iter().sum();
    if s == 0 {
        return Some(BigUint::one());
    }
    let nonzero: Vec<u64> = a.iter().copied().filter(|&x| x > 0).collect();
    let k = nonzero.len() as u64;
    let mut q = 0u64;
    let mut ones = 0u64;
    for &x in b {
        if x == 0 {
            continue;
        } else if k >= 2 && x == k {
            q += 1;
        } else if x == 1 {
            ones += 1;
        } else {
            return None;
        }
    }
    if q * k + ones != s {
        return None;
    }
    let p = *nonzero.iter().min().expect("nonzero entries exist");
    if p < q {
        return Some(BigUint::zero());
    }
    Some(multinomial_big(nonzero.iter().map(|&x| x - q)))
}

/// Base count for telescoping: out-degrees all zero or one.
///
/// Directed: `S! / prod a_i!` ways to hand the S unit out-stubs to the
/// in-degree demands. Undirected (all degrees zero or one): the number of
/// perfect matchings on the S stub nodes, `S!/(2^{S/2} (S/2)!)`, which is
/// zero when S is odd.
pub fn count_all_ones_base(
    seq: &BidegreeSequence,
    variant: GraphVariant,
) -> Result<BigCount, ExactError> {
    match variant {
        GraphVariant::DirectedWithLoops | GraphVariant::DirectedNoLoops => {
            if seq.in_sum() != seq.out_sum() {
                return Err(ExactError::BadShape);
            }
            if seq.out_degrees().iter().any(|&x| x > 1) {
                return Err(ExactError::BadShape);
            }
            if variant == GraphVariant::DirectedNoLoops {
                // The simple product formula is only loop-free when no node
                // both supplies and demands an edge.
                let overlap = seq
                    .in_degrees()
                    .iter()
                    .zip(seq.out_degrees())
                    .any(|(&a, &b)| a > 0 && b > 0);
                if overlap {
                    return Err(ExactError::BadShape);
                }
            }
            Ok(multinomial_big(seq.in_degrees().iter().copied()))
        }
        GraphVariant::UndirectedNoLoops => {
            if seq.in_degrees() != seq.out_degrees() {
                return Err(ExactError::UnsupportedVariant);
            }
            if seq.in_degrees().iter().any(|&x| x > 1) {
                return Err(ExactError::BadShape);
            }
            Ok(undirected_matching_count(seq.in_sum()))
        }
    }
}

/// Perfect matchings of `s` labeled stubs: `(s-1)!! = s!/(2^{s/2} (s/2)!)`,
/// zero for odd `s`.
pub fn undirected_matching_count(s: u64) -> BigCount {
    if s % 2 == 1 {
        return BigUint::zero();
    }
    let mut result = BigUint::one();
    let mut odd = 1u64;
    while odd < s {
        result *= BigUint::from(odd);
        odd += 2;
    }
    result
}

/// One term of the two-node partition expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTerm {
    /// Number of nodes that send an edge to both chosen nodes.
    pub shared_sources: u64,
    /// Ways to realize the two extracted columns given the overlap.
    pub binom: BigCount,
    /// Total count over the residual family with this overlap.
    pub residual_count: BigCount,
    /// `binom * residual_count`.
    pub contribution: BigCount,
}

/// Expands the realization count of a balanced sequence over the number of
/// common in-edge sources of nodes `i` and `j` (loop-allowing directed
/// counting): extracting the two columns leaves, for each overlap `k`, a
/// binomial times the count of a residual family. The contributions sum to
/// the exact count. When `a_j > a_i` the roles are swapped.
pub fn partition_expand(
    seq: &BidegreeSequence,
    i: usize,
    j: usize,
) -> Result<Vec<PartitionTerm>, ExactError> {
    partition_expand_with(&mut ExactCtx::default(), seq, i, j)
}

pub fn partition_expand_with(
    ctx: &mut ExactCtx,
    seq: &BidegreeSequence,
    i: usize,
    j: usize,
) -> Result<Vec<PartitionTerm>, ExactError> {
    if !seq.is_balanced() {
        return Err(ExactError::NotBalanced);
    }
    let n = seq.len();
    if i >= n || j >= n || i == j {
        return Err(SeqError::IndexOutOfRange(i.max(j), n).into());
    }
    let (hi, lo) = if seq.in_degrees()[i] >= seq.in_degrees()[j] {
        (i, j)
    } else {
        (j, i)
    };
    let a_hi = seq.in_degrees()[hi];
    let a_lo = seq.in_degrees()[lo];
    let pair_total = a_hi + a_lo;

    let mut base_in = seq.in_degrees().to_vec();
    base_in[hi] = 0;
    base_in[lo] = 0;

    let mut terms = Vec::with_capacity(a_lo as usize + 1);
    for k in 0..=a_lo {
        let residual_count =
            residual_family_count(ctx, &base_in, seq.out_degrees(), k, pair_total - 2 * k)?;
        let binom = binomial_big(pair_total - 2 * k, a_lo - k);
        let contribution = binom.clone() * residual_count.clone();
        terms.push(PartitionTerm {
            shared_sources: k,
            binom,
            residual_count,
            contribution,
        });
    }
    Ok(terms)
}

/// Sum of exact counts over all residual sequences with `twos` nodes losing
/// two out-stubs and `ones` nodes losing one.
fn residual_family_count(
    ctx: &mut ExactCtx,
    base_in: &[u64],
    out: &[u64],
    twos: u64,
    ones: u64,
) -> Result<BigCount, ExactError> {
    let two_candidates: Vec<usize> = (0..out.len()).filter(|&idx| out[idx] >= 2).collect();
    let mut total = BigUint::zero();
    for_each_combination(&two_candidates, twos as usize, &mut |two_set| {
        let mut reduced = out.to_vec();
        for &idx in two_set {
            reduced[idx] -= 2;
        }
        let one_candidates: Vec<usize> = (0..out.len())
            .filter(|idx| out[*idx] >= 1 && !two_set.contains(idx))
            .collect();
        for_each_combination(&one_candidates, ones as usize, &mut |one_set| {
            let mut residual_out = reduced.clone();
            for &idx in one_set {
                residual_out[idx] -= 1;
            }
            let residual = BidegreeSequence::new(base_in.to_vec(), residual_out)
                .expect("residual sums match by construction");
            let c = ctx.count(&residual, GraphVariant::DirectedWithLoops)?;
            total += c;
            Ok::<(), ExactError>(())
        })
    })?;
    Ok(total)
}

fn for_each_combination<E>(
    items: &[usize],
    k: usize,
    f: &mut impl FnMut(&[usize]) -> Result<(), E>,
) -> Result<(), E> {
    fn rec<E>(
        items: &[usize],
        k: usize,
        start: usize,
        acc: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]) -> Result<(), E>,
    ) -> Result<(), E> {
        if acc.len() == k {
            return f(acc);
        }
        let needed = k - acc.len();
        for idx in start..items.len() {
            if items.len() - idx < needed {
                break;
            }
            acc.push(items[idx]);
            rec(items, k, idx + 1, acc, f)?;
            acc.pop();
        }
        Ok(())
    }
    if k > items.len() {
        return Ok(());
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f)
}

/// Normalized residual-family ratios for a ratio-form sequence: entry `k`
/// is the count of realizations in which `k` sources feed both chosen
/// nodes, divided by the zero-overlap count and the falling factorial
/// `(a_i + a_j - 1)(a_i + a_j - 2) ... (a_i + a_j - 2k)`.
///
/// Entry 0 is always exactly 1; indices past the returned length are to be
/// read as 1 by convention. Works on the heavy side of the sequence; an
/// out-heavy sequence is transposed first.
pub fn common_neighbor_ratios(
    seq: &BidegreeSequence,
    i: usize,
    j: usize,
) -> Result<Vec<BigRational>, ExactError> {
    common_neighbor_ratios_with(&mut ExactCtx::default(), seq, i, j)
}

pub fn common_neighbor_ratios_with(
    ctx: &mut ExactCtx,
    seq: &BidegreeSequence,
    i: usize,
    j: usize,
) -> Result<Vec<BigRational>, ExactError> {
    let working = match seq.balance() {
        Balance::InHeavy => seq.clone(),
        Balance::OutHeavy => {
            BidegreeSequence::new(seq.out_degrees().to_vec(), seq.in_degrees().to_vec())
                .expect("transpose keeps sums")
        }
        Balance::Balanced => return Err(ExactError::NotRatioForm),
    };
    let n = working.len();
    if i >= n || j >= n || i == j {
        return Err(SeqError::IndexOutOfRange(i.max(j), n).into());
    }
    let a_i = working.in_degrees()[i];
    let a_j = working.in_degrees()[j];
    let pair_total = a_i + a_j;
    if pair_total == 0 {
        return Err(ExactError::EmptyX0);
    }
    let mut base_in = working.in_degrees().to_vec();
    base_in[i] = 0;
    base_in[j] = 0;
    let reduce_total = pair_total - 1;

    let k_max = (reduce_total / 2) as usize;
    let x0 = residual_family_count(ctx, &base_in, working.out_degrees(), 0, reduce_total)?;
    if x0.is_zero() {
        return Err(ExactError::EmptyX0);
    }
    let mut ratios = Vec::with_capacity(k_max + 1);
    ratios.push(BigRational::one());
    for k in 1..=k_max as u64 {
        let xk = residual_family_count(
            ctx,
            &base_in,
            working.out_degrees(),
            k,
            reduce_total - 2 * k,
        )?;
        let mut denom = x0.clone();
        for l in 0..2 * k {
            denom *= BigUint::from(reduce_total - l);
        }
        ratios.push(BigRational::new(BigInt::from(xk), BigInt::from(denom)));
    }
    Ok(ratios)
}

/// Reassembles the exact unit-decrement count ratio from a common-neighbor
/// profile: both the numerator and denominator are series in the profile
/// entries with falling-factorial coefficients, and entries beyond the
/// profile count as 1 (those terms carry vanishing coefficients).
pub fn ratio_from_common_neighbor_profile(
    ratios: &[BigRational],
    a_i: u64,
    a_j: u64,
) -> Result<BigRational, ExactError> {
    if a_i == 0 || a_j == 0 {
        return Err(ExactError::DenominatorZero);
    }
    let eta = |k: usize| -> BigRational { ratios.get(k).cloned().unwrap_or_else(BigRational::one) };
    // prod_{l=0}^{k-1} (x - l)
    let fall_from_zero = |x: u64, k: usize| -> BigInt {
        (0..k).fold(BigInt::one(), |acc, l| {
            acc * (BigInt::from(x) - BigInt::from(l))
        })
    };
    // prod_{l=1}^{k} (x - l)
    let fall_from_one = |x: u64, k: usize| -> BigInt {
        (1..=k).fold(BigInt::one(), |acc, l| {
            acc * (BigInt::from(x) - BigInt::from(l))
        })
    };
    let cutoff = a_i.max(a_j) as usize + 1;
    let mut num = BigRational::zero();
    let mut den = BigRational::zero();
    for k in 0..=cutoff {
        let num_coeff = fall_from_zero(a_j, k) * fall_from_one(a_i, k);
        if !num_coeff.is_zero() {
            num += BigRational::from(num_coeff) * eta(k);
        }
        let den_coeff = fall_from_one(a_j, k) * fall_from_zero(a_i, k);
        if !den_coeff.is_zero() {
            den += BigRational::from(den_coeff) * eta(k);
        }
    }
    if den.is_zero() {
        return Err(ExactError::DenominatorZero);
    }
    Ok(BigRational::new(BigInt::from(a_i), BigInt::from(a_j)) * num / den)
}

/// Exact ratio of the two unit-decrement counts of a ratio-form sequence,
/// `count(d with node i decremented) / count(d with node j decremented)`.
/// The decrement side is the heavy side of the sequence.
pub fn ratio_exact(seq: &BidegreeSequence, i: usize, j: usize) -> Result<BigRational, ExactError> {
    ratio_exact_with(&mut ExactCtx::default(), seq, i, j)
}

pub fn ratio_exact_with(
    ctx: &mut ExactCtx,
    seq: &BidegreeSequence,
    i: usize,
    j: usize,
) -> Result<BigRational, ExactError> {
    let side = match seq.balance() {
        Balance::InHeavy => Side::In,
        Balance::OutHeavy => Side::Out,
        Balance::Balanced => return Err(ExactError::NotRatioForm),
    };
    let di = seq.decrement(i, side)?;
    let dj = seq.decrement(j, side)?;
    let num = ctx.count(&di, GraphVariant::DirectedWithLoops)?;
    let den = ctx.count(&dj, GraphVariant::DirectedWithLoops)?;
    if den.is_zero() {
        return Err(ExactError::DenominatorZero);
    }
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// Convenience: exact ratio as f64 (for reports; may lose precision).
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
