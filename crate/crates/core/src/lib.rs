//! Split covariance intersection (split CI) fusion core.
//!
//! Two estimates whose errors carry both a possibly-correlated component and a
//! known-independent component are described by split covariances `Pd + Pi`.
//! Fusing them requires choosing a scalar weight `w ∈ [0, 1]` that minimizes
//! the determinant of the fused covariance
//!
//! ```text
//! P1(w) = P1d/w + P1i
//! P2(w) = P2d/(1-w) + P2i
//! P(w)  = (P1(w)^-1 + P2(w)^-1)^-1
//! ```
//!
//! That scalar problem is convex, which this crate both exploits and checks:
//!
//! - [`symmat`]: dense symmetric-matrix kernels (PSD tests, Cholesky
//!   log-determinants, SPD solves, seeded random PSD generation).
//! - [`objective`]: evaluation of the `w`-parameterized family together with
//!   analytic first and second derivatives of `ln det P(w)` in two
//!   algebraically equivalent forms, plus the nonnegative curvature lower
//!   bound that certifies convexity.
//! - [`proofcheck`]: numerical residual checks for every matrix identity and
//!   trace inequality the convexity argument rests on.
//! - [`optimizer`]: derivative-sign bisection for the weight, with boundary
//!   and flat-case handling, and a brute-force grid oracle.
//! - [`fusion`]: application of the optimized weight to fuse two split
//!   estimates into a fused split estimate.
//! - [`corpus`]: seeded generation of random test inputs shared by the
//!   verification suites.

pub mod corpus;
pub mod error;
pub mod fusion;
pub mod objective;
pub mod optimizer;
pub mod proofcheck;
pub mod rng;
pub mod symmat;

pub use error::SplitCiError;
pub use fusion::{split_ci_fuse, FusionResult, SplitEstimate};
pub use objective::{SplitPair, WEvaluation};
pub use optimizer::{grid_scan, minimize_w, OptimizeOptions, OptimizeResult, OptimizeStatus};
pub use symmat::SymMatrix;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, SplitCiError>;
