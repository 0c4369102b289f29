//! Split CI fusion: apply the optimized weight to combine two split
//! estimates into a fused split estimate.
//!
//! With `w` from the optimizer and `P1 = cov_d1/w + cov_i1`,
//! `P2 = cov_d2/(1-w) + cov_i2`, `P = (P1^-1 + P2^-1)^-1`:
//!
//! ```text
//! x   = P (P1^-1 x1 + P2^-1 x2)
//! Pd  = P (P1^-1 (cov_d1/w) P1^-1 + P2^-1 (cov_d2/(1-w)) P2^-1) P
//! Pi  = P - Pd
//! ```
//!
//! The output split is reconstructed from `Pd`; computing `Pi` as the
//! difference pushes all rounding into one place so the two parts sum to the
//! reported fused covariance exactly.

use nalgebra::DVector;

use crate::error::SplitCiError;
use crate::objective::SplitPair;
use crate::optimizer::{minimize_w, OptimizeOptions, OptimizeResult};
use crate::symmat::SymMatrix;
use crate::Result;

/// Relative eigenvalue threshold below which rounding-level negatives in the
/// fused dependent part are clipped to zero.
pub const OUTPUT_PSD_TOL: f64 = 1e-9;

/// Mean vector plus split covariance: `cov_d` bounds error components with
/// unknown cross-correlation, `cov_i` covers error known to be independent.
#[derive(Debug, Clone)]
pub struct SplitEstimate {
    x: DVector<f64>,
    cov_d: SymMatrix,
    cov_i: SymMatrix,
}

impl SplitEstimate {
    pub fn new(x: DVector<f64>, cov_d: SymMatrix, cov_i: SymMatrix) -> Result<Self> {
        if cov_d.dim() != x.len() || cov_i.dim() != x.len() {
            return Err(SplitCiError::DimensionMismatch(format!(
                "mean has length {}, covariance parts are {}x{} and {}x{}",
                x.len(),
                cov_d.dim(),
                cov_d.dim(),
                cov_i.dim(),
                cov_i.dim()
            )));
        }
        if !cov_d.is_psd(1e-9) {
            return Err(SplitCiError::NotPsd("cov_d".into()));
        }
        if !cov_i.is_psd(1e-9) {
            return Err(SplitCiError::NotPsd("cov_i".into()));
        }
        (&cov_d + &cov_i).cholesky("cov_d + cov_i")?;
        Ok(Self { x, cov_d, cov_i })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn cov_d(&self) -> &SymMatrix {
        &self.cov_d
    }

    pub fn cov_i(&self) -> &SymMatrix {
        &self.cov_i
    }

    /// Total covariance `cov_d + cov_i`.
    pub fn total(&self) -> SymMatrix {
        &self.cov_d + &self.cov_i
    }
}

/// Outcome of [`split_ci_fuse`].
#[derive(Debug, Clone)]
pub struct FusionResult {
    pub fused: SplitEstimate,
    /// The optimized weight actually applied.
    pub w: f64,
    pub optimize: OptimizeResult,
    /// Rounding-level negative eigenvalues clipped from the fused dependent
    /// part.
    pub clipped_eigenvalues: usize,
}

/// Fuse two split estimates with the determinant-minimizing weight.
pub fn split_ci_fuse(
    e1: &SplitEstimate,
    e2: &SplitEstimate,
    opts: &OptimizeOptions,
) -> Result<FusionResult> {
    if e1.dim() != e2.dim() {
        return Err(SplitCiError::DimensionMismatch(format!(
            "estimates have dimensions {} and {}",
            e1.dim(),
            e2.dim()
        )));
    }
    let pair = SplitPair::new(
        e1.cov_d.clone(),
        e1.cov_i.clone(),
        e2.cov_d.clone(),
        e2.cov_i.clone(),
    )?;
    let optimize = minimize_w(&pair, opts)?;
    let w = optimize.w_star;
    let v = 1.0 - w;

    let dep1 = e1.cov_d.scale(1.0 / w);
    let dep2 = e2.cov_d.scale(1.0 / v);
    let p1 = &dep1 + &e1.cov_i;
    let p2 = &dep2 + &e2.cov_i;
    let p_sum = &p1 + &p2;

    // P1^-1 and P2^-1 each feed both the mean and the dependent part, so
    // they are formed once; the sum only backs one solve.
    let p1_inv = p1.spd_inverse_ctx("P1(w)")?;
    let p2_inv = p2.spd_inverse_ctx("P2(w)")?;
    let p = SymMatrix::from_matrix_unchecked(
        p1.matrix() * p_sum.spd_solve_ctx(p2.matrix(), "P1(w) + P2(w)")?,
    );

    let info_mean = p1_inv.matrix() * &e1.x + p2_inv.matrix() * &e2.x;
    let x = p.matrix() * info_mean;

    let core = p1_inv.matrix() * dep1.matrix() * p1_inv.matrix()
        + p2_inv.matrix() * dep2.matrix() * p2_inv.matrix();
    let cov_d_raw = SymMatrix::from_matrix_unchecked(p.matrix() * core * p.matrix());

    let (cov_d, clipped_eigenvalues) =
        if cov_d_raw.min_eigenvalue() < -OUTPUT_PSD_TOL * (1.0 + cov_d_raw.max_abs()) {
            // Outside rounding tolerance: genuine numerical failure.
            return Err(SplitCiError::NotPositiveDefinite(
                "fused dependent part".into(),
            ));
        } else if cov_d_raw.min_eigenvalue() < 0.0 {
            cov_d_raw.clamp_eigenvalues(0.0, f64::INFINITY)
        } else {
            (cov_d_raw, 0)
        };
    let cov_i = &p - &cov_d;

    let fused = SplitEstimate::new(x, cov_d, cov_i)?;
    Ok(FusionResult {
        fused,
        w,
        optimize,
        clipped_eigenvalues,
    })
}
