//! Counting, estimating, and sampling directed graphs with a fixed bidegree
//! sequence.
//!
//! A bidegree sequence pairs an in-degree vector `a` with an out-degree
//! vector `b`; a realization is a labeled 0-1 matrix whose column sums are
//! `a` and whose row sums are `b` (single self-loops allowed unless the
//! variant forbids them). The crate provides:
//!
//! * [`seq`] — the sequence data model: validation, moments, graphicality,
//!   sequence surgeries.
//! * [`exact`] — exact realization counts via dynamic programming over
//!   residual margins, closed forms for special shapes, the two-node
//!   partition expansion, and exact count ratios.
//! * [`asymptotic`] — moment-based ratio estimators of orders 1 through 4
//!   and log-space count estimators built by telescoping unit switches from
//!   an all-ones base sequence.
//! * [`patterns`] — exact symbolic decomposition of sums over
//!   distinctness-constrained index tuples into equality patterns with
//!   polynomial coefficients.
//! * [`sampler`] — a degree-preserving edge-swap chain for near-uniform
//!   sampling of realizations, with common-neighbor statistics and an
//!   empirical ratio estimator.

pub mod asymptotic;
pub mod exact;
pub mod graphical;
pub mod patterns;
pub mod poly;
pub mod sampler;
pub mod seq;

pub use exact::BigCount;
pub use seq::{Balance, BidegreeSequence, GraphVariant, MomentProfile, Side, SparsityDiagnostic};
