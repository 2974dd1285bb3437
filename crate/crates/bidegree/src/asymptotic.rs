//! Moment-based asymptotic estimators.
//!
//! Unit-decrement count ratios admit moment expansions of increasing order:
//! order 1 is the bare degree ratio, order 2 multiplies by
//! `exp((x_i - x_j) * eps)` with `eps = (beta_2 - beta_1)/beta_1^2`, and
//! orders 3 and 4 add quadratic and cubic degree differences with
//! higher-moment coefficients. Count estimates chain these ratios along a
//! schedule of unit out-degree switches starting from the all-ones base
//! count `S!/prod a_i!`, accumulating in natural-log space.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::{count_all_ones_base, ratio_exact_with, BigCount, ExactCtx, ExactError};
use crate::graphical::is_graphical;
use crate::seq::{Balance, BidegreeSequence, GraphVariant, MomentProfile, SeqError, Side};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AsymptoticError {
    #[error("count estimates need equal degree sums")]
    NotBalanced,
    #[error("order must be between 1 and 4, got {0}")]
    BadOrder(u8),
    #[error("degree at node {0} is zero on the ratio side")]
    ZeroDegreeAt(usize),
    #[error("ratio estimates need a ratio-form sequence on the chosen side")]
    NotRatioForm,
    #[error("moment profile of order {got} insufficient, need {needed}")]
    InsufficientMoments { needed: usize, got: usize },
    #[error("sequence has no realization")]
    NotGraphical,
    #[error("degree sums are zero")]
    Degenerate,
    #[error("exact telescoping is limited to {0}")]
    TooLarge(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

/// Moment order needed to evaluate every correction, including the degree-9
/// expectation sums of the fourth-order terms.
pub const FULL_CORRECTION_ORDER: usize = 9;

/// Correction coefficients for the ratio estimators, in the orientation
/// where the in-degree side carries the unit decrements and the out-degree
/// moments `beta` drive the corrections. For the opposite orientation pass
/// a swapped profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTerms {
    /// Order-2 exponent coefficient `(beta_2 - beta_1)/beta_1^2`.
    pub epsilon: f64,
    /// Order-3 linear coefficient.
    pub epsilon1: f64,
    /// Order-3 quadratic coefficient.
    pub epsilon2: f64,
    /// Order-4 linear coefficient (expectation form).
    pub epsilon1_order4: f64,
    /// Order-4 quadratic coefficient (expectation form).
    pub epsilon2_order4: f64,
    /// Order-4 cubic coefficient.
    pub epsilon3: f64,
    /// Auxiliary moment ratios feeding the order-4 expectation weights.
    pub eta1: f64,
    pub eta2: f64,
}

fn ratq(n: u128) -> BigRational {
    BigRational::from(BigInt::from(n))
}

fn ratio_int(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Evaluates every correction coefficient from a moment profile, exactly in
/// rational arithmetic with one final float conversion.
pub fn correction_terms(profile: &MomentProfile) -> Result<CorrectionTerms, AsymptoticError> {
    if profile.max_order() < FULL_CORRECTION_ORDER {
        return Err(AsymptoticError::InsufficientMoments {
            needed: FULL_CORRECTION_ORDER,
            got: profile.max_order(),
        });
    }
    if profile.alpha(1) == 0 || profile.beta(1) == 0 {
        return Err(AsymptoticError::Degenerate);
    }
    let a = |k: usize| ratq(profile.alpha(k));
    let b = |k: usize| ratq(profile.beta(k));

    let epsilon = (b(2) - b(1)) / (b(1) * b(1));

    // Order 3: mixed moment ratios with the opposite side entering through
    // alpha_2 / alpha_1^2.
    let mix = a(2) / (a(1) * a(1));
    let eps1_num = b(2) + ratio_int(2, 1) * b(3) * mix.clone();
    let eps1_den = b(1) + b(2) * mix;
    let epsilon1 = eps1_num / (eps1_den.clone() * eps1_den);
    let b1p4 = b(1) * b(1) * b(1) * b(1);
    let diff = b(2) - b(1);
    let epsilon2 = diff.clone() * diff / (ratio_int(2, 1) * b1p4.clone())
        + (b(3) * b(1) - ratio_int(2, 1) * b(2) * b(2)) / b1p4;

    // Order 4 auxiliaries (roles of the two sides exchanged in the inner
    // ratios).
    let mix_b = b(2) / (a(1) * a(1));
    let eta1_num = a(2) + ratio_int(2, 1) * a(3) * mix_b.clone();
    let eta1_den = a(1) + a(2) * mix_b;
    let eta1 = eta1_num / (eta1_den.clone() * eta1_den);
    let a1p4 = a(1) * a(1) * a(1) * a(1);
    let adiff = a(2) - a(1);
    let eta2 = adiff.clone() * adiff / (ratio_int(2, 1) * a1p4.clone())
        + (a(3) * a(1) - ratio_int(2, 1) * a(2) * a(2)) / a1p4;

    // Expectation weights: f(x) = x + x^2 eta1 + x^3 (eta1^2/2 - eta2),
    // summed over the out-degree entries via the beta power sums.
    let cubic = eta1.clone() * eta1.clone() / ratio_int(2, 1) - eta2.clone();
    let f_poly = vec![BigRational::zero(), BigRational::one(), eta1.clone(), cubic];
    let f_prev = poly_shift_down(&f_poly);
    let expect =
        |p: &[BigRational]| -> BigRational { p.iter().enumerate().map(|(k, c)| c * b(k)).sum() };
    let e_f = expect(&f_poly);
    if e_f.is_zero() {
        return Err(AsymptoticError::Degenerate);
    }
    let e_ff = expect(&poly_mul(&f_poly, &f_prev));
    let e_f2 = expect(&poly_mul(&f_poly, &f_poly));
    let e_f2f = expect(&poly_mul(&poly_mul(&f_poly, &f_poly), &f_prev));
    let e_f_sq = e_f.clone() * e_f.clone();
    let e_f_p4 = e_f_sq.clone() * e_f_sq.clone();

    let epsilon1_order4 = e_ff.clone() / e_f_sq
        + (e_ff.clone() * e_ff.clone() - ratio_int(5, 1) * e_f2.clone() * e_ff.clone()
            + ratio_int(3, 1) * e_f2f.clone() * e_f.clone())
            / e_f_p4.clone();
    let epsilon2_order4 = (ratio_int(-2, 1) * e_f2 * e_ff.clone()
        + e_ff.clone() * e_ff / ratio_int(2, 1)
        + e_f2f * e_f)
        / e_f_p4;

    let b1p6 = b(1) * b(1) * b(1) * b(1) * b(1) * b(1);
    let epsilon3 = (ratio_int(-107, 3) * b(2) * b(2) * b(2)
        - ratio_int(11, 2) * b(1) * b(2) * b(3)
        + b(2) * b(4))
        / b1p6;

    Ok(CorrectionTerms {
        epsilon: rat_to_f64(&epsilon),
        epsilon1: rat_to_f64(&epsilon1),
        epsilon2: rat_to_f64(&epsilon2),
        epsilon1_order4: rat_to_f64(&epsilon1_order4),
        epsilon2_order4: rat_to_f64(&epsilon2_order4),
        epsilon3: rat_to_f64(&epsilon3),
        eta1: rat_to_f64(&eta1),
        eta2: rat_to_f64(&eta2),
    })
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn poly_mul(p: &[BigRational], q: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// p(x) -> p(x - 1), coefficient-wise via binomial expansion.
fn poly_shift_down(p: &[BigRational]) -> Vec<BigRational> {
    let n = p.len();
    let mut out = vec![BigRational::zero(); n];
    for (k, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        // (x-1)^k = sum_m C(k,m) x^m (-1)^{k-m}
        for (m, slot) in out.iter_mut().enumerate().take(k + 1) {
            let mut coeff = BigRational::from(BigInt::from(crate::exact::binomial_u128(
                k as u64, m as u64,
            )));
            if (k - m) % 2 == 1 {
                coeff = -coeff;
            }
            *slot += c * coeff;
        }
    }
    out
}

/// Natural log of a ratio estimate of the given order.
///
/// The sequence must be ratio-form on `side` (that side's sum one above the
/// other); corrections are driven by the opposite side's moments. Orders:
/// 1 = bare degree ratio, 2 = second-moment exponent, 3 = linear+quadratic
/// exponent, 4 = expectation-weighted linear+quadratic plus cubic.
pub fn ratio_estimate_log(
    seq: &BidegreeSequence,
    i: usize,
    j: usize,
    order: u8,
    side: Side,
) -> Result<f64, AsymptoticError> {
    if !(1..=4).contains(&order) {
        return Err(AsymptoticError::BadOrder(order));
    }
    let n = seq.len();
    if i >= n || j >= n {
        return Err(SeqError::IndexOutOfRange(i.max(j), n).into());
    }
    match (seq.balance(), side) {
        (Balance::InHeavy, Side::In) | (Balance::OutHeavy, Side::Out) => {}
        _ => return Err(AsymptoticError::NotRatioForm),
    }
    let degs = seq.degrees(side);
    let (x_i, x_j) = (degs[i], degs[j]);
    if x_i == 0 {
        return Err(AsymptoticError::ZeroDegreeAt(i));
    }
    if x_j == 0 {
        return Err(AsymptoticError::ZeroDegreeAt(j));
    }
    let base = (x_i as f64).ln() - (x_j as f64).ln();
    if order == 1 {
        return Ok(base);
    }
    let profile = seq.moments(FULL_CORRECTION_ORDER);
    let oriented = match side {
        Side::In => profile,
        Side::Out => profile.swapped(),
    };
    let terms = correction_terms(&oriented)?;
    let d1 = x_i as f64 - x_j as f64;
    let d2 = (x_i as f64).powi(2) - (x_j as f64).powi(2);
    let d3 = (x_i as f64).powi(3) - (x_j as f64).powi(3);
    let exponent = match order {
        2 => d1 * terms.epsilon,
        3 => d1 * terms.epsilon1 - d2 * terms.epsilon2,
        4 => d1 * terms.epsilon1_order4 - d2 * terms.epsilon2_order4 + d3 * terms.epsilon3,
        _ => unreachable!(),
    };
    Ok(base + exponent)
}

/// Ratio estimate of the given order; see [`ratio_estimate_log`].
pub fn ratio_estimate(
    seq: &BidegreeSequence,
    i: usize,
    j: usize,
    order: u8,
    side: Side,
) -> Result<f64, AsymptoticError> {
    let log = ratio_estimate_log(seq, i, j, order, side)?;
    if order == 1 {
        // The bare degree ratio, exactly.
        let degs = seq.degrees(side);
        return Ok(degs[i] as f64 / degs[j] as f64);
    }
    Ok(log.exp())
}

/// A count estimate carried in natural-log space.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEstimate {
    /// Natural log of the estimated realization count.
    pub log_value: f64,
    /// Ratio order used by the telescoping steps (1 for the closed form).
    pub order: u8,
    /// Whether the input sequence is graphical; estimates are still
    /// produced for non-graphical inputs since the formulas only read
    /// moments.
    pub graphical: bool,
    /// Degree side used by each telescoping step (empty for closed forms).
    pub side_conventions: Vec<Side>,
}

impl LogEstimate {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Closed-form count estimate
/// `S!/(prod a_i! b_i!) * exp(-(alpha_2-alpha_1)(beta_2-beta_1)/(2 S^2))`.
pub fn count_estimate_closed(seq: &BidegreeSequence) -> Result<LogEstimate, AsymptoticError> {
    if !seq.is_balanced() {
        return Err(AsymptoticError::NotBalanced);
    }
    let graphical = is_graphical(seq, GraphVariant::DirectedWithLoops)?;
    let s = seq.edge_total();
    let mut log_value = ln_factorial(s);
    for &d in seq.in_degrees().iter().chain(seq.out_degrees()) {
        log_value -= ln_factorial(d);
    }
    if s > 0 {
        let m = seq.moments(2);
        let num = (m.alpha(2) - m.alpha(1)) as f64 * (m.beta(2) - m.beta(1)) as f64;
        log_value -= num / (2.0 * (s as f64) * (s as f64));
    }
    Ok(LogEstimate {
        log_value,
        order: 1,
        graphical,
        side_conventions: Vec::new(),
    })
}

/// One unit out-degree switch: move a unit stub from `donor` to `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SwitchMove {
    donor: usize,
    target: usize,
}

/// Schedule that raises each node's out-degree from its base value to the
/// target, processing targets in input order and consuming donor stubs from
/// the highest index down.
fn switch_schedule(target_out: &[u64], edge_total: u64) -> Vec<SwitchMove> {
    let s = edge_total as usize;
    let mut donors: Vec<usize> = (0..s).filter(|&n| target_out[n] == 0).collect();
    // Consumed from the back: highest index first.
    let mut moves = Vec::new();
    for (n, &b) in target_out.iter().enumerate() {
        if b == 0 {
            continue;
        }
        let have = if n < s { 1 } else { 0 };
        for _ in have..b {
            let donor = donors.pop().expect("stub conservation");
            moves.push(SwitchMove { donor, target: n });
        }
    }
    moves
}

/// Count estimate built by telescoping ratio estimates of the given order
/// from the all-ones base `S!/prod a_i!`.
///
/// The sequence is padded with zero-degree nodes to `max(N, S)`, the base
/// places one unit out-stub on each of the first S nodes, and each switch
/// moves one stub to its target node. Every step evaluates the ratio
/// estimate on the intermediate parent sequence, whose in-degree moments
/// coincide with the target's throughout.
pub fn telescope_count(seq: &BidegreeSequence, order: u8) -> Result<LogEstimate, AsymptoticError> {
    if !(1..=4).contains(&order) {
        return Err(AsymptoticError::BadOrder(order));
    }
    if !seq.is_balanced() {
        return Err(AsymptoticError::NotBalanced);
    }
    let graphical = is_graphical(seq, GraphVariant::DirectedWithLoops)?;
    let s = seq.edge_total();
    let padded = seq.pad_to(seq.len().max(s as usize));

    let mut log_value = ln_factorial(s);
    for &d in padded.in_degrees() {
        log_value -= ln_factorial(d);
    }

    let mut current: Vec<u64> = (0..padded.len())
        .map(|n| if (n as u64) < s { 1 } else { 0 })
        .collect();
    let moves = switch_schedule(padded.out_degrees(), s);
    let mut side_conventions = Vec::with_capacity(moves.len());
    for mv in &moves {
        let mut parent_out = current.clone();
        parent_out[mv.target] += 1;
        let parent = padded.with_out_degrees(parent_out)?;
        log_value += ratio_estimate_log(&parent, mv.donor, mv.target, order, Side::Out)?;
        side_conventions.push(Side::Out);
        current[mv.target] += 1;
        current[mv.donor] -= 1;
    }
    debug_assert_eq!(current, padded.out_degrees());
    Ok(LogEstimate {
        log_value,
        order,
        graphical,
        side_conventions,
    })
}

/// Telescoping with exact count ratios at every step; equals the exact
/// count whenever the sequence is graphical. Desk scale only.
pub fn telescope_exact(seq: &BidegreeSequence) -> Result<BigCount, AsymptoticError> {
    if !seq.is_balanced() {
        return Err(AsymptoticError::NotBalanced);
    }
    let s = seq.edge_total();
    if seq.len() > 6 || s > 10 {
        return Err(AsymptoticError::TooLarge(format!(
            "N <= 6 and S <= 10 (got N={}, S={})",
            seq.len(),
            s
        )));
    }
    if !is_graphical(seq, GraphVariant::DirectedWithLoops)? {
        return Err(AsymptoticError::NotGraphical);
    }
    let padded = seq.pad_to(seq.len().max(s as usize));
    let base_out: Vec<u64> = (0..padded.len())
        .map(|n| if (n as u64) < s { 1 } else { 0 })
        .collect();
    let base_seq = padded.with_out_degrees(base_out.clone())?;
    let base = count_all_ones_base(&base_seq, GraphVariant::DirectedWithLoops)?;

    let mut ctx = ExactCtx::default();
    let mut product = BigRational::from(BigInt::from(base));
    let mut current = base_out;
    for mv in switch_schedule(padded.out_degrees(), s) {
        let mut parent_out = current.clone();
        parent_out[mv.target] += 1;
        let parent = padded.with_out_degrees(parent_out)?;
        product *= ratio_exact_with(&mut ctx, &parent, mv.donor, mv.target)?;
        current[mv.target] += 1;
        current[mv.donor] -= 1;
    }
    debug_assert_eq!(current, padded.out_degrees());
    debug_assert!(product.is_integer());
    let int = product.to_integer();
    debug_assert!(!int.is_negative());
    Ok(BigUint::try_from(int).expect("telescoped count is a nonnegative integer"))
}

const LN_FACT_TABLE_LEN: usize = 1 << 16;

/// ln(n!) via a cumulative table, with a Stirling-series tail for large n.
pub fn ln_factorial(n: u64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; LN_FACT_TABLE_LEN];
        for k in 2..LN_FACT_TABLE_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    if (n as usize) < LN_FACT_TABLE_LEN {
        return table[n as usize];
    }
    let x = n as f64;
    let x2 = x * x;
    (x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}
