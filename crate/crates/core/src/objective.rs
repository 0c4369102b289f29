//! The `w`-parameterized fused-covariance family and its log-determinant
//! derivatives.
//!
//! For a [`SplitPair`] `(P1d, P1i, P2d, P2i)` and `w ∈ (0, 1)`:
//!
//! ```text
//! P1(w) = P1d/w + P1i          P2(w) = P2d/(1-w) + P2i
//! P(w)  = (P1(w)^-1 + P2(w)^-1)^-1
//! ```
//!
//! `ln det P(w)` splits as `ln det P1 + ln det P2 - ln det (P1 + P2)`, which
//! is how every quantity here is evaluated. The second derivative is exposed
//! in two algebraically equal forms (a direct three-term trace expression and
//! a decomposed `T1/T2/T3` combination) plus a nonnegative lower bound
//! `tr{B3^-1 C B3^-1 C}` with `B3 = P1^-1 + P2^-1` and `C = dB3/dw`; together
//! these certify convexity numerically.
//!
//! All operations require `w` strictly inside `(0, 1)`. The endpoints are
//! defined only as limits, which general singular dependent parts do not
//! reduce to a closed form; callers that need boundary behavior clamp to
//! `[δ, 1-δ]` (see [`crate::optimizer`]).

use crate::error::SplitCiError;
use crate::symmat::{trace_of_product, SymMatrix};
use crate::Result;

/// The quadruple defining the `w`-parameterized covariance family.
///
/// All four members are PSD (tolerance `1e-9`), and both part sums
/// `P1d + P1i` and `P2d + P2i` are positive definite, which guarantees
/// `P1(w)` and `P2(w)` are positive definite for every `w ∈ (0, 1)`
/// (`P1d/w ⪰ P1d` for `w ≤ 1`, so `P1(w) ⪰ P1d + P1i ≻ 0`).
#[derive(Debug, Clone)]
pub struct SplitPair {
    p1d: SymMatrix,
    p1i: SymMatrix,
    p2d: SymMatrix,
    p2i: SymMatrix,
}

/// PSD tolerance applied to the four members at construction.
pub const PSD_TOL: f64 = 1e-9;

impl SplitPair {
    pub fn new(p1d: SymMatrix, p1i: SymMatrix, p2d: SymMatrix, p2i: SymMatrix) -> Result<Self> {
        let n = p1d.dim();
        for (name, m) in [("P1i", &p1i), ("P2d", &p2d), ("P2i", &p2i)] {
            if m.dim() != n {
                return Err(SplitCiError::DimensionMismatch(format!(
                    "{name} is {mk}x{mk}, P1d is {n}x{n}",
                    mk = m.dim()
                )));
            }
        }
        for (name, m) in [("P1d", &p1d), ("P1i", &p1i), ("P2d", &p2d), ("P2i", &p2i)] {
            if !m.is_psd(PSD_TOL) {
                return Err(SplitCiError::NotPsd(name.to_string()));
            }
        }
        (&p1d + &p1i).cholesky("P1d + P1i")?;
        (&p2d + &p2i).cholesky("P2d + P2i")?;
        Ok(Self { p1d, p1i, p2d, p2i })
    }

    pub fn dim(&self) -> usize {
        self.p1d.dim()
    }

    pub fn p1d(&self) -> &SymMatrix {
        &self.p1d
    }

    pub fn p1i(&self) -> &SymMatrix {
        &self.p1i
    }

    pub fn p2d(&self) -> &SymMatrix {
        &self.p2d
    }

    pub fn p2i(&self) -> &SymMatrix {
        &self.p2i
    }

    /// The pair with sources 1 and 2 exchanged; maps `w` to `1 - w`.
    pub fn swapped(&self) -> SplitPair {
        SplitPair {
            p1d: self.p2d.clone(),
            p1i: self.p2i.clone(),
            p2d: self.p1d.clone(),
            p2i: self.p1i.clone(),
        }
    }

    /// All four members scaled by `c > 0` (shifts `ln det P` by `n ln c`,
    /// leaving the argmin unchanged).
    pub fn scaled(&self, c: f64) -> SplitPair {
        assert!(c > 0.0, "scale factor must be positive");
        SplitPair {
            p1d: self.p1d.scale(c),
            p1i: self.p1i.scale(c),
            p2d: self.p2d.scale(c),
            p2i: self.p2i.scale(c),
        }
    }

    /// `P1(w)`, `P2(w)` and `P(w)`.
    ///
    /// `P(w)` is assembled as `P1 (P1+P2)^-1 P2` (symmetrized), which equals
    /// `(P1^-1 + P2^-1)^-1` but needs one factorization of the
    /// better-conditioned sum instead of two nested inversions.
    pub fn eval_family(&self, w: f64) -> Result<FamilyEval> {
        let parts = self.family_parts(w);
        let x = parts
            .p_sum
            .spd_solve_ctx(parts.p2.matrix(), "P1(w) + P2(w)")?;
        let p = SymMatrix::from_matrix_unchecked(parts.p1.matrix() * x);
        Ok(FamilyEval {
            p1: parts.p1,
            p2: parts.p2,
            p,
        })
    }

    /// `ln det P(w)` as `ln det P1 + ln det P2 - ln det (P1 + P2)`.
    pub fn logdet_objective(&self, w: f64) -> Result<f64> {
        let parts = self.family_parts(w);
        Ok(
            parts.p1.chol_logdet_ctx("P1(w)")? + parts.p2.chol_logdet_ctx("P2(w)")?
                - parts.p_sum.chol_logdet_ctx("P1(w) + P2(w)")?,
        )
    }

    /// Analytic first derivative of `ln det P(w)`:
    /// `tr{P1^-1 dP1} + tr{P2^-1 dP2} - tr{(P1+P2)^-1 (dP1 + dP2)}` with
    /// `dP1 = -D1/w`, `dP2 = D2/(1-w)`, `D1 = P1d/w`, `D2 = P2d/(1-w)`.
    pub fn d1_logdet(&self, w: f64) -> Result<f64> {
        let parts = self.family_parts(w);
        let inv = parts.factor()?;
        Ok(parts.first_derivative(&inv))
    }

    /// Analytic second derivative of `ln det P(w)` in the direct three-term
    /// form (`P1` term plus `P2` term minus `(P1+P2)` term).
    pub fn d2_logdet_direct(&self, w: f64) -> Result<f64> {
        let parts = self.family_parts(w);
        let inv = parts.factor()?;
        Ok(parts.second_derivative_direct(&inv))
    }

    /// Second derivative in the decomposed form
    /// `T1/w^2 + T2/(1-w)^2 - 2 T3/(w(1-w))`, returning the terms as well.
    pub fn d2_logdet_decomposed(&self, w: f64) -> Result<CurvatureTerms> {
        let parts = self.family_parts(w);
        let inv = parts.factor()?;
        Ok(parts.second_derivative_decomposed(&inv))
    }

    /// Nonnegative curvature lower bound `tr{B3^-1 C B3^-1 C}` where
    /// `B3 = P1^-1 + P2^-1` and `C = dB3/dw`.
    pub fn convexity_lower_bound(&self, w: f64) -> Result<f64> {
        let parts = self.family_parts(w);
        let inv = parts.factor()?;
        Ok(parts.lower_bound(&inv)?.value)
    }

    /// Full diagnostic record at one `w`; factors `P1`, `P2` and their sum
    /// once and reuses the explicit inverses across every term.
    pub fn evaluate(&self, w: f64) -> Result<WEvaluation> {
        let parts = self.family_parts(w);
        let inv = parts.factor()?;

        let logdet_p = inv.logdet_p1 + inv.logdet_p2 - inv.logdet_p_sum;
        let p = SymMatrix::from_matrix_unchecked(
            parts.p1.matrix() * inv.p_sum_inv.matrix() * parts.p2.matrix(),
        );
        let d1 = parts.first_derivative(&inv);
        let d2_direct = parts.second_derivative_direct(&inv);
        let terms = parts.second_derivative_decomposed(&inv);
        let bound = parts.lower_bound(&inv)?;

        Ok(WEvaluation {
            w,
            det_p: logdet_p.exp(),
            logdet_p,
            d1,
            d2_direct,
            d2_decomposed: terms.d2,
            t1: terms.t1,
            t2: terms.t2,
            t3: terms.t3,
            lower_bound: bound.value,
            p1: parts.p1,
            p2: parts.p2,
            p_sum: parts.p_sum,
            p,
            precision_sum: bound.precision_sum,
            precision_sum_rate: bound.precision_sum_rate,
            dep1: parts.dep1,
            dep2: parts.dep2,
        })
    }

    /// Central finite difference of [`Self::logdet_objective`].
    pub fn d1_fd(&self, w: f64, h: f64) -> Result<f64> {
        assert!(
            h > 0.0 && w - h > 0.0 && w + h < 1.0,
            "stencil leaves (0,1)"
        );
        Ok((self.logdet_objective(w + h)? - self.logdet_objective(w - h)?) / (2.0 * h))
    }

    /// Central second finite difference of [`Self::logdet_objective`].
    pub fn d2_fd(&self, w: f64, h: f64) -> Result<f64> {
        assert!(
            h > 0.0 && w - h > 0.0 && w + h < 1.0,
            "stencil leaves (0,1)"
        );
        Ok(
            (self.logdet_objective(w + h)? - 2.0 * self.logdet_objective(w)?
                + self.logdet_objective(w - h)?)
                / (h * h),
        )
    }

    /// Central second finite difference of `det P(w)` itself.
    ///
    /// A wide stencil is sound here: for a twice continuously differentiable
    /// function the second difference equals the second derivative somewhere
    /// inside the stencil, so a nonnegativity check needs no small `h`, and
    /// larger `h` keeps cancellation noise far below the tolerance.
    pub fn det_d2_fd(&self, w: f64, h: f64) -> Result<f64> {
        assert!(
            h > 0.0 && w - h > 0.0 && w + h < 1.0,
            "stencil leaves (0,1)"
        );
        Ok(
            (self.logdet_objective(w + h)?.exp() - 2.0 * self.logdet_objective(w)?.exp()
                + self.logdet_objective(w - h)?.exp())
                / (h * h),
        )
    }

    pub(crate) fn family_parts(&self, w: f64) -> FamilyParts {
        assert!(
            w > 0.0 && w < 1.0,
            "w must lie in the open interval (0,1), got {w}"
        );
        let dep1 = self.p1d.scale(1.0 / w);
        let dep2 = self.p2d.scale(1.0 / (1.0 - w));
        let p1 = &dep1 + &self.p1i;
        let p2 = &dep2 + &self.p2i;
        let p_sum = &p1 + &p2;
        FamilyParts {
            w,
            dep1,
            dep2,
            p1,
            p2,
            p_sum,
        }
    }
}

/// Step used by default for first-derivative finite differences.
pub fn default_first_step(w: f64) -> f64 {
    1e-6 * w.min(1.0 - w)
}

/// Step used by default for second-derivative finite differences of the
/// log-determinant.
pub fn default_second_step(w: f64) -> f64 {
    1e-5 * w.min(1.0 - w)
}

/// Output of [`SplitPair::eval_family`].
#[derive(Debug, Clone)]
pub struct FamilyEval {
    pub p1: SymMatrix,
    pub p2: SymMatrix,
    pub p: SymMatrix,
}

/// Decomposed second derivative: `d2 = T1/w^2 + T2/(1-w)^2 - 2T3/(w(1-w))`.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureTerms {
    pub d2: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

/// Everything the derivative formulas need at one `w`, before factoring.
pub(crate) struct FamilyParts {
    pub w: f64,
    /// `P1d / w`
    pub dep1: SymMatrix,
    /// `P2d / (1-w)`
    pub dep2: SymMatrix,
    pub p1: SymMatrix,
    pub p2: SymMatrix,
    pub p_sum: SymMatrix,
}

/// Explicit inverses and log-determinants of `P1`, `P2`, `P1+P2`; each
/// inverse appears in three to six trace terms per evaluation, so forming
/// them once beats re-solving.
pub(crate) struct FamilyFactors {
    pub p1_inv: SymMatrix,
    pub p2_inv: SymMatrix,
    pub p_sum_inv: SymMatrix,
    pub logdet_p1: f64,
    pub logdet_p2: f64,
    pub logdet_p_sum: f64,
}

struct LowerBound {
    value: f64,
    precision_sum: SymMatrix,
    precision_sum_rate: SymMatrix,
}

impl FamilyParts {
    pub fn factor(&self) -> Result<FamilyFactors> {
        let (logdet_p1, p1_inv) = self.p1.chol_logdet_and_inverse("P1(w)")?;
        let (logdet_p2, p2_inv) = self.p2.chol_logdet_and_inverse("P2(w)")?;
        let (logdet_p_sum, p_sum_inv) = self.p_sum.chol_logdet_and_inverse("P1(w) + P2(w)")?;
        Ok(FamilyFactors {
            p1_inv,
            p2_inv,
            p_sum_inv,
            logdet_p1,
            logdet_p2,
            logdet_p_sum,
        })
    }

    fn first_derivative(&self, inv: &FamilyFactors) -> f64 {
        let w = self.w;
        let s1 = inv.p1_inv.trace_product(&self.dep1).expect("same dim");
        let s2 = inv.p2_inv.trace_product(&self.dep2).expect("same dim");
        let s3_dep1 = inv.p_sum_inv.trace_product(&self.dep1).expect("same dim");
        let s3_dep2 = inv.p_sum_inv.trace_product(&self.dep2).expect("same dim");
        -s1 / w + s2 / (1.0 - w) - (s3_dep2 / (1.0 - w) - s3_dep1 / w)
    }

    fn second_derivative_direct(&self, inv: &FamilyFactors) -> f64 {
        let w = self.w;
        let v = 1.0 - w;
        let a1 = inv.p1_inv.matrix() * self.dep1.matrix();
        let a2 = inv.p2_inv.matrix() * self.dep2.matrix();

        // tr{-P1^-1 dP1 P1^-1 dP1 + P1^-1 d2P1} with dP1 = -D1/w, d2P1 = 2D1/w^2
        let term_p1 = (2.0 * a1.trace() - trace_of_product(&a1, &a1)) / (w * w);
        let term_p2 = (2.0 * a2.trace() - trace_of_product(&a2, &a2)) / (v * v);

        // Sum rates: d(P1+P2)/dw = D2/(1-w) - D1/w, d2 = 2D1/w^2 + 2D2/(1-w)^2.
        let rate = &self.dep2.scale(1.0 / v) - &self.dep1.scale(1.0 / w);
        let curv = &self.dep1.scale(2.0 / (w * w)) + &self.dep2.scale(2.0 / (v * v));
        let e = inv.p_sum_inv.matrix() * rate.matrix();
        let term_sum =
            -trace_of_product(&e, &e) + inv.p_sum_inv.trace_product(&curv).expect("same dim");

        term_p1 + term_p2 - term_sum
    }

    fn second_derivative_decomposed(&self, inv: &FamilyFactors) -> CurvatureTerms {
        let w = self.w;
        let v = 1.0 - w;
        let a1 = inv.p1_inv.matrix() * self.dep1.matrix();
        let a2 = inv.p2_inv.matrix() * self.dep2.matrix();
        let b1 = inv.p_sum_inv.matrix() * self.dep1.matrix();
        let b2 = inv.p_sum_inv.matrix() * self.dep2.matrix();

        let t1 = 2.0 * a1.trace() - 2.0 * b1.trace() - trace_of_product(&a1, &a1)
            + trace_of_product(&b1, &b1);
        let t2 = 2.0 * a2.trace() - 2.0 * b2.trace() - trace_of_product(&a2, &a2)
            + trace_of_product(&b2, &b2);
        let t3 = trace_of_product(&b1, &b2);
        let d2 = t1 / (w * w) + t2 / (v * v) - 2.0 * t3 / (w * v);
        CurvatureTerms { d2, t1, t2, t3 }
    }

    fn lower_bound(&self, inv: &FamilyFactors) -> Result<LowerBound> {
        let w = self.w;
        let v = 1.0 - w;
        let precision_sum = &inv.p1_inv + &inv.p2_inv;
        // C = P1^-1 (D1/w) P1^-1 - P2^-1 (D2/(1-w)) P2^-1 = d/dw (P1^-1 + P2^-1)
        let lhs = inv.p1_inv.matrix() * (self.dep1.matrix() / w) * inv.p1_inv.matrix();
        let rhs = inv.p2_inv.matrix() * (self.dep2.matrix() / v) * inv.p2_inv.matrix();
        let precision_sum_rate = SymMatrix::from_matrix_unchecked(lhs - rhs);
        let b3_inv = precision_sum.spd_inverse_ctx("P1(w)^-1 + P2(w)^-1")?;
        let e = b3_inv.matrix() * precision_sum_rate.matrix();
        Ok(LowerBound {
            value: trace_of_product(&e, &e),
            precision_sum,
            precision_sum_rate,
        })
    }
}

/// Full diagnostic record of one objective evaluation.
#[derive(Debug, Clone)]
pub struct WEvaluation {
    pub w: f64,
    pub p1: SymMatrix,
    pub p2: SymMatrix,
    /// `P1 + P2`
    pub p_sum: SymMatrix,
    pub p: SymMatrix,
    pub det_p: f64,
    pub logdet_p: f64,
    pub d1: f64,
    pub d2_direct: f64,
    pub d2_decomposed: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// `tr{B3^-1 C B3^-1 C} ≥ 0`
    pub lower_bound: f64,
    /// `B3 = P1^-1 + P2^-1`
    pub precision_sum: SymMatrix,
    /// `C = dB3/dw`
    pub precision_sum_rate: SymMatrix,
    /// `P1d / w`
    pub dep1: SymMatrix,
    /// `P2d / (1-w)`
    pub dep2: SymMatrix,
}
