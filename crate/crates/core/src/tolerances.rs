//! Numerical tolerances shared by the library, the CLI and the test suites.
//!
//! Inputs are exact algebraic identities evaluated in double precision, so
//! residuals of order 1e-15 are expected. The thresholds below leave a few
//! orders of headroom above that noise.

/// Residual allowed on exact bracket and projection identities.
pub const BRACKET: f64 = 1e-12;

/// Relative residual above which a matrix is rejected as lying outside the algebra.
pub const ALGEBRA_MEMBERSHIP: f64 = 1e-9;

/// Two Jacobi eigenvalues closer than this are counted as one with multiplicity.
pub const SPECTRUM_GROUPING: f64 = 1e-9;

/// Off-subspace norm allowed when testing containment `(I - VV^T) w`.
pub const CONTAINMENT: f64 = 1e-9;

/// Matching tolerance used while detecting Fano triples.
pub const FANO: f64 = 1e-10;

/// Denominators of sectional curvature below this mean the vectors are dependent.
pub const SECTIONAL_DENOMINATOR: f64 = 1e-12;

/// Curvature tensors are memoized as dense arrays up to this dimension of p.
pub const MEMO_MAX_DIM: usize = 16;

/// Search: squared residual at which a plane counts as invariant.
pub const OBJECTIVE: f64 = 1e-18;

/// Search: tolerance when matching hit invariants against catalog metadata.
pub const CLASSIFY: f64 = 1e-6;

/// Search: two planes whose largest principal angle is below this are duplicates.
pub const DEDUP_ANGLE: f64 = 1e-4;

/// Central finite difference step for gradient checks.
pub const FD_STEP: f64 = 1e-6;

/// Relative agreement required between analytic and finite-difference gradients.
pub const GRADIENT_REL: f64 = 1e-5;
