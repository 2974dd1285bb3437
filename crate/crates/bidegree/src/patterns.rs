//! Equality-pattern algebra: exact symbolic decomposition of sums over
//! distinctness-constrained index tuples.
//!
//! A sum `sum_{x_1 != ... != x_r} prod f(x_m)` is rewritten into a
//! combination of pattern sums in which the first `2k` indices are freed:
//! each pattern forces disjoint blocks of indices equal and keeps a suffix
//! `{s..r}` pairwise distinct. Rewrites are exact identities, so evaluating
//! every term of an exact-mode expansion reproduces the source sum for any
//! concrete table; truncated mode drops the boundary-weight terms, leaving
//! coefficient polynomials in `r` that can be compared symbolically.
//!
//! The three rewrites, applied until every term is in retained shape:
//!
//! * free the leading suffix index: `S{s..r} = S{s+1..r} - (r-s) * S'`
//!   where `S'` merges `x_s` into `x_{s+1}`;
//! * free a block `{s..s+t}` straddling the suffix head:
//!   `S{s..r} = S{s+t+1..r} - (r-s-t) * S''` where `S''` extends the block
//!   by `x_{s+t+1}`;
//! * pull the suffix head back down when freeing overshot:
//!   `S{s..r} = S{s-1..r} + (r-s+1) * S'''` where `S'''` merges `x_{s-1}`
//!   into `x_s`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact::factorial_big;
use crate::poly::Poly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("expansion depth k must be at least 1, got {0}")]
    BadK(usize),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
}

/// Index constraint on tuples `(x_1, ..., x_r)`: the listed blocks are
/// forced equal, and the indices `{distinct_from..r}` are pairwise distinct
/// except within a single block that may straddle the boundary (such a
/// block must start exactly at `distinct_from` and be consecutive).
///
/// Indices are 1-based; `r` stays symbolic. `seeded` marks patterns from
/// the weighted expansion, whose index 1 carries the `g` factor and is
/// pinned by canonicalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EqualityPattern {
    blocks: Vec<Vec<usize>>,
    distinct_from: usize,
    seeded: bool,
}

impl EqualityPattern {
    pub fn new(
        blocks: Vec<Vec<usize>>,
        distinct_from: usize,
        seeded: bool,
    ) -> Result<Self, PatternError> {
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        let mut seen = std::collections::BTreeSet::new();
        for b in &blocks {
            if b.len() < 2 {
                return Err(PatternError::InvalidPattern(
                    "blocks need at least two indices".into(),
                ));
            }
            for &i in b {
                if i == 0 {
                    return Err(PatternError::InvalidPattern("indices are 1-based".into()));
                }
                if !seen.insert(i) {
                    return Err(PatternError::InvalidPattern(format!(
                        "index {i} appears in two blocks"
                    )));
                }
            }
        }
        if distinct_from == 0 {
            return Err(PatternError::InvalidPattern(
                "distinct_from is 1-based".into(),
            ));
        }
        let mut straddles = 0;
        for b in &blocks {
            let hi = *b.last().expect("nonempty");
            if hi >= distinct_from {
                straddles += 1;
                let lo = b[0];
                let consecutive = b.windows(2).all(|w| w[1] == w[0] + 1);
                if lo != distinct_from || !consecutive {
                    return Err(PatternError::InvalidPattern(format!(
                        "block {b:?} crosses the distinct suffix without starting at it"
                    )));
                }
            }
        }
        if straddles > 1 {
            return Err(PatternError::InvalidPattern(
                "at most one block may straddle the suffix".into(),
            ));
        }
        Ok(EqualityPattern {
            blocks,
            distinct_from,
            seeded,
        })
    }

    fn new_unchecked(mut blocks: Vec<Vec<usize>>, distinct_from: usize, seeded: bool) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        EqualityPattern {
            blocks,
            distinct_from,
            seeded,
        }
    }

    pub fn free(distinct_from: usize, seeded: bool) -> Self {
        EqualityPattern {
            blocks: Vec::new(),
            distinct_from,
            seeded,
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Start of the pairwise-distinct suffix.
    pub fn distinct_from(&self) -> usize {
        self.distinct_from
    }

    pub fn seeded(&self) -> bool {
        self.seeded
    }

    /// Total equality weight `sum (|A| - 1)`.
    pub fn weight(&self) -> usize {
        self.blocks.iter().map(|b| b.len() - 1).sum()
    }

    /// Index into `blocks` of the block straddling the suffix, if any.
    pub fn straddle(&self) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| *b.last().expect("nonempty") >= self.distinct_from)
    }

    /// Largest concrete index the pattern references.
    pub fn prefix_extent(&self) -> usize {
        let block_max = self
            .blocks
            .iter()
            .map(|b| *b.last().expect("nonempty"))
            .max();
        block_max.unwrap_or(0).max(self.distinct_from - 1)
    }

    /// Indices below the suffix that sit in no block.
    pub fn free_indices(&self) -> Vec<usize> {
        (1..self.distinct_from)
            .filter(|i| !self.blocks.iter().any(|b| b.contains(i)))
            .collect()
    }

    /// Relabels prefix indices into the canonical layout: blocks first
    /// (the g-carrying block leading when seeded, then larger blocks
    /// first), free indices next, and the straddling block at the suffix
    /// head. Two patterns denote the same sum iff their canonical forms
    /// are equal.
    pub fn canonicalize(&self) -> EqualityPattern {
        let straddle_pos = self.straddle();
        let mut prefix_blocks: Vec<&Vec<usize>> = self
            .blocks
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != straddle_pos)
            .map(|(_, b)| b)
            .collect();
        let seed_free = self.seeded && !self.blocks.iter().any(|b| b.contains(&1));
        prefix_blocks.sort_by_key(|b| {
            let is_seed = self.seeded && b.contains(&1);
            (!is_seed, std::cmp::Reverse(b.len()))
        });

        let free_count =
            (self.distinct_from - 1) - prefix_blocks.iter().map(|b| b.len()).sum::<usize>();
        let mut new_blocks = Vec::with_capacity(self.blocks.len());
        let mut pos = if seed_free { 2 } else { 1 };
        for b in prefix_blocks {
            new_blocks.push((pos..pos + b.len()).collect::<Vec<usize>>());
            pos += b.len();
        }
        pos += free_count - if seed_free { 1 } else { 0 };
        let distinct_from = pos;
        if let Some(sp) = straddle_pos {
            let len = self.blocks[sp].len();
            new_blocks.push((pos..pos + len).collect());
        }
        EqualityPattern::new_unchecked(new_blocks, distinct_from, self.seeded)
    }
}

impl fmt::Display for EqualityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            write!(f, "(no blocks)")?;
        }
        for b in &self.blocks {
            let inner: Vec<String> = b.iter().map(|i| i.to_string()).collect();
            write!(f, "{{{}}}", inner.join(","))?;
        }
        let frees = self.free_indices();
        if !frees.is_empty() {
            let list: Vec<String> = frees.iter().map(|i| i.to_string()).collect();
            write!(f, " free {}", list.join(","))?;
        }
        write!(f, " distinct {}..r", self.distinct_from)
    }
}

/// One term of an expansion: an integer-coefficient polynomial in `r`
/// against a canonical pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTerm {
    pub coefficient: Poly,
    pub pattern: EqualityPattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionMode {
    /// Keep every term, including boundary-weight terms whose suffix
    /// constraints survive; evaluation reproduces the source sum exactly.
    Exact,
    /// Drop boundary-weight terms, keeping the clean prefix patterns and
    /// their coefficient table.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternExpansion {
    /// Terms sorted by canonical pattern; coefficients merged.
    pub terms: Vec<PatternTerm>,
    /// Number of freed leading indices (`2k`).
    pub free_prefix: usize,
    /// The requested depth `k`.
    pub truncation_weight: usize,
    pub mode: ExpansionMode,
}

impl PatternExpansion {
    /// The coefficient attached to the canonical pattern with the given
    /// blocks (over fully freed prefix), if present.
    pub fn coefficient_for(&self, blocks: &[Vec<usize>]) -> Option<&Poly> {
        self.terms
            .iter()
            .find(|t| t.pattern.blocks() == blocks && t.pattern.straddle().is_none())
            .map(|t| &t.coefficient)
    }
}

/// Expansion of `sum_{x_1 != ... != x_r} prod_m f(x_m)` freeing the first
/// `2k` indices.
pub fn expand_distinct(k: usize, mode: ExpansionMode) -> Result<PatternExpansion, PatternError> {
    if k == 0 {
        return Err(PatternError::BadK(k));
    }
    let seed = EqualityPattern::free(1, false);
    Ok(run_expansion(seed, k, k, mode))
}

/// Expansion of `sum_{x_1 = x_2 != ... != x_r} g(x_1) prod_m f(x_m)`: the
/// seed block `{1,2}` carries the `g` weight, and boundary weight shifts up
/// by one to account for it.
pub fn expand_with_initial_equality(
    k: usize,
    mode: ExpansionMode,
) -> Result<PatternExpansion, PatternError> {
    if k == 0 {
        return Err(PatternError::BadK(k));
    }
    let seed = EqualityPattern::new_unchecked(vec![vec![1, 2]], 1, true);
    Ok(run_expansion(seed, k, k + 1, mode))
}

fn run_expansion(
    seed: EqualityPattern,
    k: usize,
    boundary_weight: usize,
    mode: ExpansionMode,
) -> PatternExpansion {
    let target = 2 * k + 1;
    let mut retained: BTreeMap<EqualityPattern, Poly> = BTreeMap::new();
    let mut worklist: Vec<(Poly, EqualityPattern)> = vec![(Poly::constant(1), seed)];

    while let Some((coeff, pat)) = worklist.pop() {
        let w = pat.weight();
        if w >= boundary_weight {
            *retained
                .entry(pat.canonicalize())
                .or_insert_with(Poly::zero) += coeff;
            continue;
        }
        let s = pat.distinct_from();
        if let Some(bi) = pat.straddle() {
            // Free the straddling block {s..s+t} from the suffix.
            let t = pat.blocks()[bi].len() - 1;
            let freed =
                EqualityPattern::new_unchecked(pat.blocks().to_vec(), s + t + 1, pat.seeded());
            worklist.push((coeff.clone(), freed));
            let mut extended = pat.blocks().to_vec();
            extended[bi].push(s + t + 1);
            let merged = EqualityPattern::new_unchecked(extended, s, pat.seeded());
            let factor = -Poly::r_plus(-((s + t) as i128));
            worklist.push((coeff * factor, merged));
        } else if s == target {
            *retained
                .entry(pat.canonicalize())
                .or_insert_with(Poly::zero) += coeff;
        } else if s < target {
            // Free x_s from the suffix.
            let freed = EqualityPattern::new_unchecked(pat.blocks().to_vec(), s + 1, pat.seeded());
            worklist.push((coeff.clone(), freed));
            let mut merged_blocks = pat.blocks().to_vec();
            merged_blocks.push(vec![s, s + 1]);
            let merged = EqualityPattern::new_unchecked(merged_blocks, s, pat.seeded());
            let factor = -Poly::r_plus(-(s as i128));
            worklist.push((coeff * factor, merged));
        } else {
            // Overshot the target: pull the suffix head back down. The
            // canonical relabel guarantees index s-1 is free.
            let pat = pat.canonicalize();
            let s = pat.distinct_from();
            debug_assert!(pat.free_indices().contains(&(s - 1)));
            let pulled = EqualityPattern::new_unchecked(pat.blocks().to_vec(), s - 1, pat.seeded());
            worklist.push((coeff.clone(), pulled));
            let mut merged_blocks = pat.blocks().to_vec();
            merged_blocks.push(vec![s - 1, s]);
            let merged = EqualityPattern::new_unchecked(merged_blocks, s - 1, pat.seeded());
            let factor = Poly::r_plus(1 - s as i128);
            worklist.push((coeff * factor, merged));
        }
    }

    let terms: Vec<PatternTerm> = retained
        .into_iter()
        .filter(|(pat, coeff)| {
            if coeff.is_zero() {
                return false;
            }
            match mode {
                ExpansionMode::Exact => true,
                ExpansionMode::Truncated => pat.weight() < boundary_weight,
            }
        })
        .map(|(pattern, coefficient)| PatternTerm {
            coefficient,
            pattern,
        })
        .collect();
    PatternExpansion {
        terms,
        free_prefix: 2 * k,
        truncation_weight: k,
        mode,
    }
}

/// Exact value of the pattern-constrained sum over tuples in
/// `{1..N}^r` (N the table length): blocks contribute power sums, free
/// indices plain sums, and the distinct suffix an inclusion-free
/// elementary-symmetric evaluation. When `g` is supplied it replaces `f`
/// at index 1.
///
/// Patterns referencing indices beyond `r` evaluate to zero (their
/// coefficients vanish at such `r` in any expansion).
pub fn evaluate_pattern(
    pattern: &EqualityPattern,
    f: &[BigInt],
    g: Option<&[BigInt]>,
    r: usize,
) -> BigInt {
    if pattern.prefix_extent() > r {
        return BigInt::zero();
    }
    let n = f.len();
    let g_table = g.unwrap_or(f);
    let weighted = |idx_one: bool, v: usize, m: usize| -> BigInt {
        // Product weight of one block member set of size m at value v.
        if idx_one {
            g_table[v].clone() * f[v].pow((m - 1) as u32)
        } else {
            f[v].pow(m as u32)
        }
    };

    let s = pattern.distinct_from();
    let straddle_pos = pattern.straddle();
    let mut product = BigInt::one();

    for (bi, block) in pattern.blocks().iter().enumerate() {
        if Some(bi) == straddle_pos {
            continue;
        }
        let has_one = g.is_some() && block.contains(&1);
        let mut sum = BigInt::zero();
        for v in 0..n {
            sum += weighted(has_one, v, block.len());
        }
        product *= sum;
    }
    for idx in pattern.free_indices() {
        let mut sum = BigInt::zero();
        let table = if g.is_some() && idx == 1 { g_table } else { f };
        for v in table {
            sum += v;
        }
        product *= sum;
    }

    // Distinct suffix: an optional straddling block value, an optional
    // g-weighted singleton (index 1 inside the suffix), and plain singles.
    let mut specials: Vec<Vec<BigInt>> = Vec::new();
    let mut singles = r + 1 - s;
    if let Some(sp) = straddle_pos {
        let block = &pattern.blocks()[sp];
        singles -= block.len();
        let has_one = g.is_some() && block.contains(&1);
        specials.push((0..n).map(|v| weighted(has_one, v, block.len())).collect());
    }
    if g.is_some() && 1 >= s && !pattern.blocks().iter().any(|b| b.contains(&1)) {
        // Index 1 is a suffix singleton carrying g.
        debug_assert!(singles >= 1);
        singles -= 1;
        specials.push(g_table.to_vec());
    }
    product * distinct_sum(&specials, singles, f)
}

/// Sum over assignments of the special slots plus `singles` plain slots to
/// pairwise-distinct table indices, of the product of slot weights.
fn distinct_sum(specials: &[Vec<BigInt>], singles: usize, f: &[BigInt]) -> BigInt {
    let n = f.len();
    fn rec(specials: &[Vec<BigInt>], used: &mut Vec<bool>, singles: usize, f: &[BigInt]) -> BigInt {
        match specials.split_first() {
            None => {
                // Ordered distinct tuples of the remaining singles:
                // singles! * e_singles over the unused values.
                let remaining: Vec<&BigInt> = f
                    .iter()
                    .zip(used.iter())
                    .filter(|&(_, &u)| !u)
                    .map(|(v, _)| v)
                    .collect();
                if singles > remaining.len() {
                    return BigInt::zero();
                }
                let mut elem = vec![BigInt::zero(); singles + 1];
                elem[0] = BigInt::one();
                for v in remaining {
                    for j in (1..=singles).rev() {
                        let add = elem[j - 1].clone() * v;
                        elem[j] += add;
                    }
                }
                BigInt::from(factorial_big(singles as u64)) * &elem[singles]
            }
            Some((w, rest)) => {
                let mut total = BigInt::zero();
                for v in 0..f.len() {
                    if used[v] || w[v].is_zero() {
                        continue;
                    }
                    used[v] = true;
                    total += &w[v] * rec(rest, used, singles, f);
                    used[v] = false;
                }
                total
            }
        }
    }
    let mut used = vec![false; n];
    rec(specials, &mut used, singles, f)
}

/// Evaluates a whole expansion at concrete `r` over the table `f` (and `g`
/// for weighted expansions).
pub fn evaluate_expansion(
    expansion: &PatternExpansion,
    f: &[BigInt],
    g: Option<&[BigInt]>,
    r: usize,
) -> BigInt {
    let mut total = BigInt::zero();
    for term in &expansion.terms {
        let c = term.coefficient.eval(r as i128);
        if c == 0 {
            continue;
        }
        total += BigInt::from(c) * evaluate_pattern(&term.pattern, f, g, r);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(vals: &[i64]) -> Vec<BigInt> {
        vals.iter().map(|&v| BigInt::from(v)).collect()
    }

    /// Brute-force oracle: enumerate all tuples and test the constraints
    /// directly.
    fn brute_pattern_sum(
        pattern: &EqualityPattern,
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
            // Odometer increment.
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

    fn brute_distinct(f: &[BigInt], r: usize) -> BigInt {
        brute_pattern_sum(&EqualityPattern::free(1, false), f, None, r)
    }

    fn brute_weighted(f: &[BigInt], g: &[BigInt], r: usize) -> BigInt {
        let seed = EqualityPattern::new(vec![vec![1, 2]], 1, true).unwrap();
        brute_pattern_sum(&seed, f, Some(g), r)
    }

    #[test]
    fn base_expansion_terms() {
        let e = expand_distinct(1, ExpansionMode::Exact).unwrap();
        assert_eq!(e.terms.len(), 3);
        // Free term, the head merge -(r-1), and the second merge -(r-2).
        assert_eq!(e.coefficient_for(&[]).unwrap(), &Poly::constant(1));
        let pair_terms: Vec<&PatternTerm> =
            e.terms.iter().filter(|t| t.pattern.weight() == 1).collect();
        assert_eq!(pair_terms.len(), 2);
        let coeffs: Vec<String> = pair_terms
            .iter()
            .map(|t| t.coefficient.to_string())
            .collect();
        assert!(coeffs.contains(&"-(r-1)".to_string()), "{coeffs:?}");
        assert!(coeffs.contains(&"-(r-2)".to_string()), "{coeffs:?}");
    }

    #[test]
    fn truncated_depth_two_coefficients() {
        let e = expand_distinct(2, ExpansionMode::Truncated).unwrap();
        assert_eq!(e.terms.len(), 2);
        assert_eq!(e.coefficient_for(&[]).unwrap(), &Poly::constant(1));
        // -(4r-10) on the single-pair pattern.
        assert_eq!(
            e.coefficient_for(&[vec![1, 2]]).unwrap(),
            &Poly::from_coeffs(vec![10, -4])
        );
    }

    #[test]
    fn truncated_depth_three_coefficients() {
        let e = expand_distinct(3, ExpansionMode::Truncated).unwrap();
        assert_eq!(e.coefficient_for(&[]).unwrap(), &Poly::constant(1));
        assert_eq!(
            e.coefficient_for(&[vec![1, 2]]).unwrap(),
            &Poly::from_coeffs(vec![21, -6])
        );
        // Forced by the exact rewrite identities (verified against brute
        // force); every path through the construction sums to this.
        assert_eq!(
            e.coefficient_for(&[vec![1, 2], vec![3, 4]]).unwrap(),
            &Poly::from_coeffs(vec![63, -57, 9])
        );
        assert_eq!(
            e.coefficient_for(&[vec![1, 2, 3]]).unwrap(),
            &Poly::from_coeffs(vec![112, -48, 6])
        );
        assert_eq!(e.terms.len(), 4);
    }

    #[test]
    fn weighted_depth_two_coefficients() {
        let e = expand_with_initial_equality(2, ExpansionMode::Truncated).unwrap();
        assert_eq!(e.terms.len(), 3);
        assert_eq!(
            e.coefficient_for(&[vec![1, 2]]).unwrap(),
            &Poly::constant(1)
        );
        assert_eq!(
            e.coefficient_for(&[vec![1, 2, 3]]).unwrap(),
            &Poly::from_coeffs(vec![2, -1])
        );
        assert_eq!(
            e.coefficient_for(&[vec![1, 2], vec![3, 4]]).unwrap(),
            &Poly::from_coeffs(vec![7, -2])
        );
    }

    #[test]
    fn weighted_depth_three_coefficients() {
        let e = expand_with_initial_equality(3, ExpansionMode::Truncated).unwrap();
        let expect: Vec<(&[&[usize]], Vec<i128>)> = vec![
            (&[&[1, 2]], vec![1]),
            (&[&[1, 2, 3]], vec![2, -1]),
            (&[&[1, 2], &[3, 4]], vec![18, -4]),
            (&[&[1, 2, 3, 4]], vec![6, -5, 1]),
            (&[&[1, 2, 3], &[4, 5]], vec![30, -21, 3]),
            (&[&[1, 2], &[3, 4, 5]], vec![104, -40, 4]),
            (&[&[1, 2], &[3, 4], &[5, 6]], vec![15, -14, 2]),
        ];
        assert_eq!(e.terms.len(), expect.len());
        for (blocks, coeffs) in expect {
            let blocks: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
            let got = e
                .coefficient_for(&blocks)
                .unwrap_or_else(|| panic!("missing pattern {blocks:?}"));
            assert_eq!(got, &Poly::from_coeffs(coeffs), "blocks {blocks:?}");
        }
    }

    #[test]
    fn exact_mode_reproduces_brute_force() {
        let f = big(&[1, 2, 3, 1, 4]);
        for k in 1..=2 {
            let e = expand_distinct(k, ExpansionMode::Exact).unwrap();
            for r in 2 * k..=5 {
                let got = evaluate_expansion(&e, &f, None, r);
                let want = brute_distinct(&f, r);
                assert_eq!(got, want, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn weighted_exact_mode_reproduces_brute_force() {
        let f = big(&[2, 1, 3, 2]);
        let g = big(&[1, 1, 2, 0]);
        for k in 1..=2 {
            let e = expand_with_initial_equality(k, ExpansionMode::Exact).unwrap();
            for r in (2 * k).max(2)..=5 {
                let got = evaluate_expansion(&e, &f, Some(&g), r);
                let want = brute_weighted(&f, &g, r);
                assert_eq!(got, want, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn weighted_with_g_equal_f_matches_plain_seeded_sum() {
        // Degenerate g = f: the weighted source sum is just the seeded
        // constrained sum with plain weights.
        let f = big(&[1, 3, 2, 2, 1]);
        let e = expand_with_initial_equality(2, ExpansionMode::Exact).unwrap();
        for r in 4..=6 {
            let got = evaluate_expansion(&e, &f, Some(&f), r);
            let want = brute_weighted(&f, &f, r);
            assert_eq!(got, want, "r={r}");
        }
    }

    #[test]
    fn canonicalize_examples() {
        let p = EqualityPattern::new(vec![vec![3, 4]], 5, false).unwrap();
        let c = p.canonicalize();
        assert_eq!(c.blocks(), &[vec![1, 2]]);
        assert_eq!(c.distinct_from(), 5);
        assert_eq!(c.free_indices(), vec![3, 4]);

        let p = EqualityPattern::new(vec![vec![1, 2], vec![4, 5]], 6, false).unwrap();
        let c = p.canonicalize();
        assert_eq!(c.blocks(), &[vec![1, 2], vec![3, 4]]);

        // Idempotence.
        assert_eq!(c.canonicalize(), c);
    }

    #[test]
    fn canonicalize_is_relabeling_invariant() {
        // Same structure under different labels has one canonical form.
        let p1 = EqualityPattern::new(vec![vec![1, 3], vec![2, 4]], 5, false).unwrap();
        let p2 = EqualityPattern::new(vec![vec![2, 3], vec![1, 4]], 5, false).unwrap();
        assert_eq!(p1.canonicalize(), p2.canonicalize());
    }

    #[test]
    fn pattern_validation() {
        assert!(EqualityPattern::new(vec![vec![1, 2], vec![2, 3]], 4, false).is_err());
        assert!(EqualityPattern::new(vec![vec![3]], 4, false).is_err());
        // Block crossing the suffix without starting at it.
        assert!(EqualityPattern::new(vec![vec![2, 3]], 3, false).is_err());
        // Straddling block starting at the suffix head is fine.
        assert!(EqualityPattern::new(vec![vec![3, 4]], 3, false).is_ok());
    }

    #[test]
    fn evaluate_pattern_examples() {
        let f = big(&[1, 2, 3]);
        // x1 = x2, nothing else: sum f^2 = 14.
        let p = EqualityPattern::new(vec![vec![1, 2]], 3, false).unwrap();
        assert_eq!(evaluate_pattern(&p, &f, None, 2), BigInt::from(14));
        // x1 != x2: (sum f)^2 - sum f^2 = 36 - 14 = 22.
        let p = EqualityPattern::free(1, false);
        assert_eq!(evaluate_pattern(&p, &f, None, 2), BigInt::from(22));
    }

    #[test]
    fn evaluate_matches_brute_on_straddle_patterns() {
        let f = big(&[2, 1, 3, 1]);
        let g = big(&[1, 0, 2, 2]);
        let patterns = vec![
            EqualityPattern::new(vec![vec![3, 4]], 3, false).unwrap(),
            EqualityPattern::new(vec![vec![1, 2], vec![3, 4, 5]], 3, false).unwrap(),
            EqualityPattern::new(vec![vec![1, 2]], 1, true).unwrap(),
            EqualityPattern::new(vec![vec![1, 2, 3]], 1, true).unwrap(),
        ];
        for p in patterns {
            for r in p.prefix_extent()..=5 {
                let g_opt = if p.seeded() { Some(&g[..]) } else { None };
                assert_eq!(
                    evaluate_pattern(&p, &f, g_opt, r),
                    brute_pattern_sum(&p, &f, g_opt, r),
                    "pattern {p} r={r}"
                );
            }
        }
    }

    #[test]
    fn truncated_weight_bookkeeping() {
        let e = expand_distinct(3, ExpansionMode::Truncated).unwrap();
        for t in &e.terms {
            assert!(t.pattern.weight() < 3);
            assert_eq!(t.pattern.distinct_from(), 7);
            assert!(t.pattern.straddle().is_none());
        }
        let e = expand_with_initial_equality(2, ExpansionMode::Truncated).unwrap();
        for t in &e.terms {
            assert!(t.pattern.weight() < 3);
            assert_eq!(t.pattern.distinct_from(), 5);
        }
    }

    #[test]
    fn bad_k_rejected() {
        assert!(matches!(
            expand_distinct(0, ExpansionMode::Exact),
            Err(PatternError::BadK(0))
        ));
        assert!(matches!(
            expand_with_initial_equality(0, ExpansionMode::Exact),
            Err(PatternError::BadK(0))
        ));
    }
}
