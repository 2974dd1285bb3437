//! Bidegree sequences: validation, balance tags, moments, sequence
//! surgeries, and the sparsity diagnostic.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqError {
    #[error("in- and out-degree vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("negative degree {value} at index {index}")]
    NegativeDegree { index: usize, value: i64 },
    #[error("degree sums differ by more than one (sum(a)={0}, sum(b)={1})")]
    SumMismatch(u64, u64),
    #[error("cannot decrement zero degree at node {0}")]
    ZeroDegree(usize),
    #[error("sequence too degenerate for the diagnostic (edge total {0} < 2)")]
    DegenerateSequence(u64),
    #[error("variant requires equal in- and out-degree vectors")]
    UnsupportedVariant,
    #[error("node index {0} out of range for length {1}")]
    IndexOutOfRange(usize, usize),
}

/// Which of the two degree vectors an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    In,
    Out,
}

impl Side {
    pub fn flipped(self) -> Side {
        match self {
            Side::In => Side::Out,
            Side::Out => Side::In,
        }
    }
}

/// Graph class a sequence is realized in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphVariant {
    /// Square 0-1 matrices, diagonal unconstrained (single self-loops allowed).
    DirectedWithLoops,
    /// Square 0-1 matrices with zero diagonal.
    DirectedNoLoops,
    /// Symmetric 0-1 matrices with zero diagonal; requires `a == b`.
    UndirectedNoLoops,
}

/// Relation between the two degree sums.
///
/// Balanced sequences can be realized; ratio-form sequences (sums one
/// apart) are the natural domain of the unit-decrement count ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Balance {
    Balanced,
    /// `sum(a) = sum(b) + 1`: decrements act on the in-degree side.
    InHeavy,
    /// `sum(b) = sum(a) + 1`: decrements act on the out-degree side.
    OutHeavy,
}

/// Paired in-/out-degree vectors of equal length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BidegreeSequence {
    in_degrees: Vec<u64>,
    out_degrees: Vec<u64>,
}

/// Validates raw integer vectors into a sequence.
///
/// Accepts balanced sequences and ratio-form sequences whose sums differ by
/// exactly one; anything further apart is rejected.
pub fn validate(raw_in: &[i64], raw_out: &[i64]) -> Result<BidegreeSequence, SeqError> {
    if raw_in.len() != raw_out.len() {
        return Err(SeqError::LengthMismatch(raw_in.len(), raw_out.len()));
    }
    for vec in [raw_in, raw_out] {
        for (index, &value) in vec.iter().enumerate() {
            if value < 0 {
                return Err(SeqError::NegativeDegree { index, value });
            }
        }
    }
    let in_degrees: Vec<u64> = raw_in.iter().map(|&v| v as u64).collect();
    let out_degrees: Vec<u64> = raw_out.iter().map(|&v| v as u64).collect();
    let sa: u64 = in_degrees.iter().sum();
    let sb: u64 = out_degrees.iter().sum();
    if sa.abs_diff(sb) > 1 {
        return Err(SeqError::SumMismatch(sa, sb));
    }
    Ok(BidegreeSequence {
        in_degrees,
        out_degrees,
    })
}

impl BidegreeSequence {
    /// Builds a sequence from unsigned vectors, with the same sum checks as
    /// [`validate`].
    pub fn new(in_degrees: Vec<u64>, out_degrees: Vec<u64>) -> Result<Self, SeqError> {
        if in_degrees.len() != out_degrees.len() {
            return Err(SeqError::LengthMismatch(
                in_degrees.len(),
                out_degrees.len(),
            ));
        }
        let sa: u64 = in_degrees.iter().sum();
        let sb: u64 = out_degrees.iter().sum();
        if sa.abs_diff(sb) > 1 {
            return Err(SeqError::SumMismatch(sa, sb));
        }
        Ok(BidegreeSequence {
            in_degrees,
            out_degrees,
        })
    }

    /// Single degree vector duplicated onto both sides (undirected input).
    pub fn undirected(degrees: Vec<u64>) -> Self {
        BidegreeSequence {
            in_degrees: degrees.clone(),
            out_degrees: degrees,
        }
    }

    pub fn len(&self) -> usize {
        self.in_degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_degrees.is_empty()
    }

    pub fn in_degrees(&self) -> &[u64] {
        &self.in_degrees
    }

    pub fn out_degrees(&self) -> &[u64] {
        &self.out_degrees
    }

    pub fn degrees(&self, side: Side) -> &[u64] {
        match side {
            Side::In => &self.in_degrees,
            Side::Out => &self.out_degrees,
        }
    }

    /// Edge total `S`. For ratio-form sequences this is the larger sum,
    /// matching the convention that `S = sum(a)` when the in-side is heavy.
    pub fn edge_total(&self) -> u64 {
        self.in_sum().max(self.out_sum())
    }

    pub fn in_sum(&self) -> u64 {
        self.in_degrees.iter().sum()
    }

    pub fn out_sum(&self) -> u64 {
        self.out_degrees.iter().sum()
    }

    pub fn balance(&self) -> Balance {
        let sa = self.in_sum();
        let sb = self.out_sum();
        if sa == sb {
            Balance::Balanced
        } else if sa == sb + 1 {
            Balance::InHeavy
        } else {
            debug_assert_eq!(sb, sa + 1);
            Balance::OutHeavy
        }
    }

    pub fn is_balanced(&self) -> bool {
        self.balance() == Balance::Balanced
    }

    pub fn max_degree(&self) -> u64 {
        self.in_degrees
            .iter()
            .chain(self.out_degrees.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// The sequence with one unit removed from the chosen side at `node`.
    pub fn decrement(&self, node: usize, side: Side) -> Result<Self, SeqError> {
        if node >= self.len() {
            return Err(SeqError::IndexOutOfRange(node, self.len()));
        }
        let mut out = self.clone();
        let v = match side {
            Side::In => &mut out.in_degrees[node],
            Side::Out => &mut out.out_degrees[node],
        };
        if *v == 0 {
            return Err(SeqError::ZeroDegree(node));
        }
        *v -= 1;
        Ok(out)
    }

    /// Inverse of [`BidegreeSequence::decrement`].
    pub fn increment(&self, node: usize, side: Side) -> Result<Self, SeqError> {
        if node >= self.len() {
            return Err(SeqError::IndexOutOfRange(node, self.len()));
        }
        let mut out = self.clone();
        match side {
            Side::In => out.in_degrees[node] += 1,
            Side::Out => out.out_degrees[node] += 1,
        }
        Ok(out)
    }

    /// Appends zero-degree nodes until the sequence has length `len`.
    pub fn pad_to(&self, len: usize) -> Self {
        let mut out = self.clone();
        out.in_degrees.resize(len.max(self.len()), 0);
        out.out_degrees.resize(len.max(self.len()), 0);
        out
    }

    /// Replaces the out-degree vector, keeping the in-degrees.
    pub fn with_out_degrees(&self, out_degrees: Vec<u64>) -> Result<Self, SeqError> {
        BidegreeSequence::new(self.in_degrees.clone(), out_degrees)
    }

    pub fn moments(&self, max_order: usize) -> MomentProfile {
        moments(self, max_order)
    }

    pub fn sparsity_diagnostic(&self) -> Result<SparsityDiagnostic, SeqError> {
        sparsity_diagnostic(self)
    }
}

/// Power sums of the degree vectors: `alpha[k] = sum_i a_i^k` and
/// `beta[k] = sum_i b_i^k` for `1 <= k <= max_order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentProfile {
    alpha: Vec<u128>,
    beta: Vec<u128>,
    max_order: usize,
}

pub fn moments(seq: &BidegreeSequence, max_order: usize) -> MomentProfile {
    assert!(max_order >= 1, "moment order must be at least 1");
    let power_sums = |v: &[u64]| -> Vec<u128> {
        let mut sums = vec![0u128; max_order + 1];
        sums[0] = v.len() as u128;
        for &d in v {
            let mut p = 1u128;
            for sum in sums.iter_mut().skip(1) {
                p *= d as u128;
                *sum += p;
            }
        }
        sums
    };
    MomentProfile {
        alpha: power_sums(seq.in_degrees()),
        beta: power_sums(seq.out_degrees()),
        max_order,
    }
}

impl MomentProfile {
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `sum_i a_i^k`; order 0 gives the sequence length.
    pub fn alpha(&self, k: usize) -> u128 {
        self.alpha[k]
    }

    /// `sum_i b_i^k`; order 0 gives the sequence length.
    pub fn beta(&self, k: usize) -> u128 {
        self.beta[k]
    }

    /// Profile with the in- and out-degree roles exchanged.
    pub fn swapped(&self) -> MomentProfile {
        MomentProfile {
            alpha: self.beta.clone(),
            beta: self.alpha.clone(),
            max_order: self.max_order,
        }
    }
}

/// Where a concrete sequence sits relative to the sparse regime the
/// asymptotic formulas assume.
///
/// `effective_tau = 1/2 - log(d_max)/log(S)` and `condition_a1` is the
/// larger of the two top-degree partial sums obtained by sorting each
/// vector in non-increasing order. Reported only; no estimator consumes it.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityDiagnostic {
    pub d_max: u64,
    pub edge_total: u64,
    pub effective_tau: f64,
    pub condition_a1: u64,
    pub in_regime: bool,
}

pub fn sparsity_diagnostic(seq: &BidegreeSequence) -> Result<SparsityDiagnostic, SeqError> {
    let s = seq.edge_total();
    if s < 2 {
        return Err(SeqError::DegenerateSequence(s));
    }
    let d_max = seq.max_degree();
    let effective_tau = 0.5 - (d_max as f64).ln() / (s as f64).ln();

    let mut a_sorted = seq.in_degrees().to_vec();
    let mut b_sorted = seq.out_degrees().to_vec();
    a_sorted.sort_unstable_by(|x, y| y.cmp(x));
    b_sorted.sort_unstable_by(|x, y| y.cmp(x));
    let top_sum = |v: &[u64], k: u64| -> u64 { v.iter().take(k as usize).sum() };
    let condition_a1 = top_sum(&b_sorted, a_sorted[0]).max(top_sum(&a_sorted, b_sorted[0]));

    Ok(SparsityDiagnostic {
        d_max,
        edge_total: s,
        effective_tau,
        condition_a1,
        in_regime: effective_tau > 0.0,
    })
}
