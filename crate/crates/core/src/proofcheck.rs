//! Numerical verification of the matrix identities and trace inequalities
//! underlying the convexity of the weight optimization.
//!
//! Each operation returns residuals (or signed slack) so property suites can
//! assert them against documented tolerances on arbitrary and randomized
//! inputs. Nothing here proves anything; it checks, numerically, on demand.

use nalgebra::DMatrix;

use crate::error::SplitCiError;
use crate::rng::SplitMix64;
use crate::symmat::{trace_of_product, SymMatrix};
use crate::Result;

/// Residual of Jacobi's formula `d/dw ln det M(w) = tr{M^-1 dM/dw}` for a
/// black-box matrix family: absolute difference between the central finite
/// difference (step `h`) of the log-determinant and the analytic trace term.
pub fn jacobi_residual<F, G>(family: F, family_rate: G, w: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> SymMatrix,
    G: Fn(f64) -> SymMatrix,
{
    assert!(h > 0.0, "step must be positive");
    let m = family(w);
    let rate = family_rate(w);
    let solved = m.spd_solve_ctx(rate.matrix(), "family(w)")?;
    let analytic = solved.trace();
    let fd = (family(w + h).chol_logdet_ctx("family(w + h)")?
        - family(w - h).chol_logdet_ctx("family(w - h)")?)
        / (2.0 * h);
    Ok((fd - analytic).abs())
}

/// `tr{M1 M2}` for PSD operands, which is nonnegative up to rounding.
/// Preconditions are checked (tolerance `1e-9`); a failure signals a broken
/// test harness rather than a math failure.
pub fn psd_product_trace(m1: &SymMatrix, m2: &SymMatrix) -> Result<f64> {
    if !m1.is_psd(1e-9) {
        return Err(SplitCiError::NotPsd("first operand".into()));
    }
    if !m2.is_psd(1e-9) {
        return Err(SplitCiError::NotPsd("second operand".into()));
    }
    m1.trace_product(m2)
}

/// Outcome of [`loewner_trace_gap`].
#[derive(Debug, Clone, Copy)]
pub struct TraceGapCheck {
    /// `tr{2X^-1 Z - 2Y^-1 Z - X^-1 Z X^-1 Z + Y^-1 Z Y^-1 Z}`
    pub lhs: f64,
    /// `tr{(X^-1 - Y^-1) Z (X^-1 - Y^-1) Z}`
    pub rhs: f64,
    /// `lhs - rhs`, nonnegative up to rounding under the preconditions.
    pub gap: f64,
    /// Distance from the gap to its closed form
    /// `2 tr{(Z - Z X^-1 Z)(X^-1 - Y^-1)}`, an algebraic identity.
    pub identity_residual: f64,
}

/// For symmetric `X, Y, Z` with `0 < X ≤ Y` and `0 ≤ Z ≤ X` (Loewner order),
/// the trace inequality `lhs ≥ rhs` holds; returns the gap and the residual
/// of its closed form.
///
/// The closed form is evaluated in the arrangement `Z - Z X^-1 Z`, which is
/// well defined even when `Z` is singular (the hypotheses allow `Z ⪰ 0`).
pub fn loewner_trace_gap(x: &SymMatrix, y: &SymMatrix, z: &SymMatrix) -> Result<TraceGapCheck> {
    if x.cholesky("X").is_err() {
        return Err(SplitCiError::PreconditionViolated(
            "X is not positive definite".into(),
        ));
    }
    if !(y - x).is_psd(1e-9) {
        return Err(SplitCiError::PreconditionViolated(
            "Y - X is not positive semidefinite".into(),
        ));
    }
    if !z.is_psd(1e-9) {
        return Err(SplitCiError::PreconditionViolated(
            "Z is not positive semidefinite".into(),
        ));
    }
    if !(x - z).is_psd(1e-9) {
        return Err(SplitCiError::PreconditionViolated(
            "X - Z is not positive semidefinite".into(),
        ));
    }

    let x_inv = x.spd_inverse_ctx("X")?;
    let y_inv = y.spd_inverse_ctx("Y")?;
    let xz = x_inv.matrix() * z.matrix();
    let yz = y_inv.matrix() * z.matrix();
    let lhs = 2.0 * xz.trace() - 2.0 * yz.trace() - trace_of_product(&xz, &xz)
        + trace_of_product(&yz, &yz);

    let inv_diff = &x_inv - &y_inv;
    let dz = inv_diff.matrix() * z.matrix();
    let rhs = trace_of_product(&dz, &dz);
    let gap = lhs - rhs;

    let shrunk = z.matrix() - z.matrix() * x_inv.matrix() * z.matrix();
    let closed = 2.0 * trace_of_product(&shrunk, inv_diff.matrix());
    Ok(TraceGapCheck {
        lhs,
        rhs,
        gap,
        identity_residual: (gap - closed).abs(),
    })
}

/// Residuals of the three inverse-of-a-sum identities that rewrite
/// `P3 = P1 + P2` through `B3 = P1^-1 + P2^-1`:
///
/// 1. `P3^-1 = P2^-1 B3^-1 P1^-1`
/// 2. `P1^-1 - P3^-1 = P1^-1 B3^-1 P1^-1`
/// 3. `P2^-1 - P3^-1 = P2^-1 B3^-1 P2^-1`
///
/// Each residual is the max-abs entry of the difference.
pub fn sum_inverse_residuals(p1: &SymMatrix, p2: &SymMatrix) -> Result<(f64, f64, f64)> {
    let p1_inv = p1.spd_inverse_ctx("P1")?;
    let p2_inv = p2.spd_inverse_ctx("P2")?;
    let p3_inv = (p1 + p2).spd_inverse_ctx("P1 + P2")?;
    let b3_inv = (&p1_inv + &p2_inv).spd_inverse_ctx("P1^-1 + P2^-1")?;

    let r1 = (p3_inv.matrix() - p2_inv.matrix() * b3_inv.matrix() * p1_inv.matrix())
        .abs()
        .max();
    let r2 = ((p1_inv.matrix() - p3_inv.matrix())
        - p1_inv.matrix() * b3_inv.matrix() * p1_inv.matrix())
    .abs()
    .max();
    let r3 = ((p2_inv.matrix() - p3_inv.matrix())
        - p2_inv.matrix() * b3_inv.matrix() * p2_inv.matrix())
    .abs()
    .max();
    Ok((r1, r2, r3))
}

/// Trace invariance under cyclic rotation: the largest deviation
/// `|tr{rotated product} - tr{original product}|` over all rotations of the
/// chain. The chain must multiply to a square matrix.
pub fn cyclic_trace_residual(chain: &[DMatrix<f64>]) -> Result<f64> {
    if chain.len() < 2 {
        return Err(SplitCiError::DimensionMismatch(
            "chain must contain at least 2 matrices".into(),
        ));
    }
    for i in 0..chain.len() {
        let next = &chain[(i + 1) % chain.len()];
        if chain[i].ncols() != next.nrows() {
            return Err(SplitCiError::DimensionMismatch(format!(
                "chain link {i} has {} columns, link {} has {} rows",
                chain[i].ncols(),
                (i + 1) % chain.len(),
                next.nrows()
            )));
        }
    }

    let trace_of_rotation = |start: usize| -> f64 {
        let mut prod = chain[start].clone();
        for k in 1..chain.len() {
            prod *= &chain[(start + k) % chain.len()];
        }
        prod.trace()
    };

    let reference = trace_of_rotation(0);
    let mut worst = 0.0_f64;
    for start in 1..chain.len() {
        worst = worst.max((trace_of_rotation(start) - reference).abs());
    }
    Ok(worst)
}

/// Seeded triple `(X, Y, Z)` with `X ≻ 0`, `X ⪯ Y`, `0 ⪯ Z ⪯ X` exactly by
/// construction: `X` is a jittered random Gram matrix, `Y = X + PSD`, and
/// `Z = X^(1/2) W X^(1/2)` for a random PSD contraction `W` (eigenvalues
/// clipped into `[0, 1]`). Rejection sampling on the orderings almost never
/// succeeds in higher dimensions; this construction sidesteps it.
pub fn loewner_ordered_triple(n: usize, seed: u64) -> (SymMatrix, SymMatrix, SymMatrix) {
    let mut seeds = SplitMix64::new(seed);
    let x = &SymMatrix::random_psd(n, n, 1.0, seeds.next_seed()).expect("valid rank")
        + &SymMatrix::identity(n).scale(0.1);
    let y = &x + &SymMatrix::random_psd(n, n, 1.0, seeds.next_seed()).expect("valid rank");
    let (contraction, _) = SymMatrix::random_psd(n, n, 1.0, seeds.next_seed())
        .expect("valid rank")
        .clamp_eigenvalues(0.0, 1.0);
    let root = x.symmetric_sqrt();
    let z = SymMatrix::from_matrix_unchecked(root.matrix() * contraction.matrix() * root.matrix());
    (x, y, z)
}
