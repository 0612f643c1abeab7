//! Numerical tolerances shared across the crate.
//!
//! Every threshold used by a validity check lives here so that reports and
//! tests agree on what "within tolerance" means.

/// Maximum admissible deviation of a density operator's trace from one.
pub const TRACE_TOL: f64 = 1e-10;

/// Maximum entry of `A - A†` for an operator to count as Hermitian.
pub const HERM_TOL: f64 = 1e-10;

/// Eigenvalues in `[-EIG_FLOOR, 0)` are treated as zero.
pub const EIG_FLOOR: f64 = 1e-9;

/// Outcomes with probability at or below this cannot be conditioned on.
pub const PROB_FLOOR: f64 = 1e-12;

/// Largest completeness defect a discretized family may report on its
/// certified subspace.
pub const COMPLETENESS_TOL: f64 = 1e-4;

/// Phase-space quadrature tolerance for Wigner overlaps.
pub const QUAD_TOL: f64 = 1e-6;

/// Probabilities may dip below zero by at most this much.
pub const NEGATIVE_PROB_TOL: f64 = 1e-12;

/// Boundary magnitude above which a Wigner grid is said not to cover a state.
pub const WIGNER_EDGE_TOL: f64 = 1e-8;

/// Default number of retained Fock levels.
pub const DEFAULT_DIM: usize = 40;

/// Default admissible probability mass above the truncation.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;
