//! The randomized verification suite behind `splitci verify`.
//!
//! Each check runs `trials` seeded trials (dimensions cycled from `--dims`),
//! normalizes its residual so that `pass ⇔ worst_residual ≤ tolerance`, and
//! the report passes overall only when every check does. Identical seeds
//! reproduce the report byte for byte apart from the timestamp field.

use std::time::{SystemTime, UNIX_EPOCH};

use splitci::corpus;
use splitci::objective::default_first_step;
use splitci::optimizer::{grid_scan, minimize_w, OptimizeOptions};
use splitci::proofcheck;
use splitci::rng::SplitMix64;
use splitci::symmat::SymMatrix;

use crate::jsonfmt::fmt_real;

/// Aggregated outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckSummary {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Largest normalized residual observed (may be negative when the check
    /// passes with margin).
    pub worst_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub timestamp_unix_ms: u128,
    pub checks: Vec<CheckSummary>,
    pub overall_pass: bool,
}

fn summarize(
    name: &'static str,
    tolerance: f64,
    trials: usize,
    mut residual_for_trial: impl FnMut(usize) -> f64,
) -> CheckSummary {
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for t in 0..trials {
        let r = residual_for_trial(t);
        if r > tolerance {
            failures += 1;
        }
        worst = worst.max(r);
    }
    CheckSummary {
        name,
        trials,
        failures,
        worst_residual: worst,
        tolerance,
        pass: failures == 0,
    }
}

/// Run the full suite. Grid size for the optimizer-oracle check matches its
/// documented `2e-5` weight tolerance.
pub fn run_suite(seed: u64, trials: usize, dims: &[usize]) -> VerifyReport {
    let mut master = SplitMix64::new(seed);
    let dim_at = |t: usize| dims[t % dims.len()];
    // Each check draws one base seed from the master stream, then derives
    // per-trial seeds from it.
    let mut check_seed = || {
        let s = master.next_seed();
        move |t: usize| {
            let mut sm = SplitMix64::new(s.wrapping_add(t as u64));
            sm.next_seed()
        }
    };
    let w_at = |trial_seed: u64| 0.05 + 0.9 * SplitMix64::new(trial_seed).next_unit();

    let mut checks = Vec::new();

    // Trace invariance under cyclic rotation, random 3-chains.
    let s = check_seed();
    checks.push(summarize("cyclic_trace", 1e-10, trials, |t| {
        let n = dim_at(t);
        let base = s(t);
        let chain: Vec<_> = (0..3)
            .map(|k| corpus::random_square(n, base.wrapping_add(k)))
            .collect();
        let scale = 1.0 + n as f64 * chain.iter().map(|m| m.abs().max()).product::<f64>();
        let r = proofcheck::cyclic_trace_residual(&chain).expect("compatible chain");
        r / scale
    }));

    // tr{M1 M2} >= 0 for PSD operands.
    let s = check_seed();
    checks.push(summarize("psd_product_trace", 1e-10, trials, |t| {
        let n = dim_at(t);
        let base = s(t);
        let rank = (base % (n as u64 + 1)) as usize;
        let m1 = SymMatrix::random_psd(n, rank, 1.0, base).expect("valid rank");
        let m2 = SymMatrix::random_psd(n, n, 1.0, base.wrapping_add(1)).expect("valid rank");
        let trace = proofcheck::psd_product_trace(&m1, &m2).expect("psd inputs");
        -trace / (1.0 + m1.max_abs() * m2.max_abs())
    }));

    // Trace inequality gap under Loewner-ordered inputs, and its closed form.
    let s = check_seed();
    checks.push(summarize("loewner_gap", 1e-9, trials, |t| {
        let (x, y, z) = proofcheck::loewner_ordered_triple(dim_at(t), s(t));
        let check = proofcheck::loewner_trace_gap(&x, &y, &z).expect("ordered inputs");
        -check.gap / (1.0 + check.lhs.abs() + check.rhs.abs())
    }));
    let s = check_seed();
    checks.push(summarize("loewner_identity", 1e-9, trials, |t| {
        let (x, y, z) = proofcheck::loewner_ordered_triple(dim_at(t), s(t));
        let check = proofcheck::loewner_trace_gap(&x, &y, &z).expect("ordered inputs");
        check.identity_residual / (1.0 + check.lhs.abs() + check.rhs.abs())
    }));

    // Inverse-of-a-sum identities.
    let s = check_seed();
    checks.push(summarize("sum_inverse_identities", 1e-9, trials, |t| {
        let n = dim_at(t);
        let base = s(t);
        let p1 = corpus::random_pd(n, base);
        let p2 = corpus::random_pd(n, base.wrapping_add(1));
        let (r1, r2, r3) = proofcheck::sum_inverse_residuals(&p1, &p2).expect("pd inputs");
        let scale =
            1.0 + p1.spd_inverse().expect("pd").max_abs() * p2.spd_inverse().expect("pd").max_abs();
        r1.max(r2).max(r3) / scale
    }));

    // Jacobi's formula on the P1(w) family of a random pair.
    let s = check_seed();
    checks.push(summarize("jacobi_formula", 1e-6, trials, |t| {
        let n = dim_at(t);
        let base = s(t);
        let pair = corpus::random_pair(n, n, n, base);
        let w = w_at(base.wrapping_add(7));
        let p1d = pair.p1d().clone();
        let p1i = pair.p1i().clone();
        let family = move |w: f64| &p1d.scale(1.0 / w) + &p1i;
        let p1d_rate = pair.p1d().clone();
        let rate = move |w: f64| p1d_rate.scale(-1.0 / (w * w));
        let analytic = family(w)
            .spd_solve(rate(w).matrix())
            .expect("pd family")
            .trace();
        let r = proofcheck::jacobi_residual(&family, &rate, w, 1e-6).expect("pd family");
        r / (1.0 + analytic.abs())
    }));

    // Analytic slope against central finite differences.
    let s = check_seed();
    checks.push(summarize("slope_fd_consistency", 1e-5, trials, |t| {
        let (pair, w) = trial_pair(dim_at(t), s(t), w_at(s(t) ^ 0x5bd1));
        let d1 = pair.d1_logdet(w).expect("valid pair");
        let fd = pair.d1_fd(w, default_first_step(w)).expect("valid pair");
        (d1 - fd).abs() / (1.0 + d1.abs())
    }));

    // The two curvature formulas agree.
    let s = check_seed();
    checks.push(summarize("curvature_equivalence", 1e-8, trials, |t| {
        let (pair, w) = trial_pair(dim_at(t), s(t), w_at(s(t) ^ 0x94d0));
        let direct = pair.d2_logdet_direct(w).expect("valid pair");
        let decomposed = pair.d2_logdet_decomposed(w).expect("valid pair").d2;
        (direct - decomposed).abs() / (1.0 + direct.abs())
    }));

    // Curvature dominates its lower bound, which is itself nonnegative.
    let s = check_seed();
    checks.push(summarize("curvature_chain", 1e-7, trials, |t| {
        let (pair, w) = trial_pair(dim_at(t), s(t), w_at(s(t) ^ 0x1ce4));
        let d2 = pair.d2_logdet_direct(w).expect("valid pair");
        let lb = pair.convexity_lower_bound(w).expect("valid pair");
        (lb - d2) / (1.0 + d2.abs())
    }));
    let s = check_seed();
    checks.push(summarize("bound_nonnegative", 1e-9, trials, |t| {
        let (pair, w) = trial_pair(dim_at(t), s(t), w_at(s(t) ^ 0x7f4a));
        let d2 = pair.d2_logdet_direct(w).expect("valid pair");
        let lb = pair.convexity_lower_bound(w).expect("valid pair");
        -lb / (1.0 + d2.abs())
    }));

    // Convexity of the determinant itself via a wide-stencil second
    // difference.
    let s = check_seed();
    checks.push(summarize("det_convexity_fd", 1e-6, trials, |t| {
        let (pair, w) = trial_pair(dim_at(t), s(t), w_at(s(t) ^ 0x3111));
        let h = 0.5 * w.min(1.0 - w);
        let fd = pair.det_d2_fd(w, h).expect("valid pair");
        let det = pair.logdet_objective(w).expect("valid pair").exp();
        -fd / (1.0 + det)
    }));

    // Curvature of the log-objective is itself nonnegative.
    let s = check_seed();
    checks.push(summarize("log_convexity", 1e-8, trials, |t| {
        let (pair, w) = trial_pair(dim_at(t), s(t), w_at(s(t) ^ 0x79b9));
        let d2 = pair.d2_logdet_direct(w).expect("valid pair");
        -d2 / (1.0 + d2.abs())
    }));

    // Zero dependent parts make the objective constant in w.
    let s = check_seed();
    checks.push(summarize("flatness", 1e-12, trials, |t| {
        let n = dim_at(t);
        let base = s(t);
        let pair = splitci::SplitPair::new(
            SymMatrix::zeros(n),
            corpus::random_pd(n, base),
            SymMatrix::zeros(n),
            corpus::random_pd(n, base.wrapping_add(1)),
        )
        .expect("valid pair");
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 1..=9 {
            let v = pair.logdet_objective(0.1 * k as f64).expect("valid pair");
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    }));

    // Exchanging the sources mirrors the objective about w = 1/2.
    let s = check_seed();
    checks.push(summarize("swap_symmetry", 1e-12, trials, |t| {
        let (pair, w) = trial_pair(dim_at(t), s(t), w_at(s(t) ^ 0x4c15));
        let a = pair.logdet_objective(w).expect("valid pair");
        let b = pair
            .swapped()
            .logdet_objective(1.0 - w)
            .expect("valid pair");
        (a - b).abs()
    }));

    // Bisection agrees with the brute-force grid oracle.
    let s = check_seed();
    checks.push(summarize("optimizer_oracle", 1.0, trials, |t| {
        let n = dim_at(t);
        let base = s(t);
        let rank1 = (base % (n as u64 + 1)) as usize;
        let rank2 = ((base >> 8) % (n as u64 + 1)) as usize;
        let pair = corpus::random_pair(n, rank1, rank2, base);
        let opts = OptimizeOptions::default();
        let res = minimize_w(&pair, &opts).expect("valid pair");
        let (w_grid, obj_grid) = grid_scan(&pair, 100_001, opts.delta).expect("valid pair");
        let dw = (res.w_star - w_grid).abs() / 2e-5;
        let dv = (res.objective_logdet - obj_grid).abs() / 1e-10;
        dw.min(dv)
    }));

    let overall_pass = checks.iter().all(|c| c.pass);
    VerifyReport {
        seed,
        trials,
        dims: dims.to_vec(),
        timestamp_unix_ms: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        checks,
        overall_pass,
    }
}

/// Random pair with ranks derived from the seed, plus a sampled weight.
fn trial_pair(n: usize, seed: u64, w: f64) -> (splitci::SplitPair, f64) {
    let rank1 = (seed % (n as u64 + 1)) as usize;
    let rank2 = ((seed >> 16) % (n as u64 + 1)) as usize;
    (corpus::random_pair(n, rank1, rank2, seed), w)
}

/// Render the report as JSON (reals at 17 significant digits).
pub fn render_report(report: &VerifyReport) -> String {
    let dims: Vec<String> = report.dims.iter().map(|d| d.to_string()).collect();
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"seed\": {},\n", report.seed));
    out.push_str(&format!("  \"trials\": {},\n", report.trials));
    out.push_str(&format!("  \"dims\": [{}],\n", dims.join(", ")));
    out.push_str(&format!(
        "  \"timestamp_unix_ms\": {},\n",
        report.timestamp_unix_ms
    ));
    out.push_str("  \"checks\": [\n");
    for (i, c) in report.checks.iter().enumerate() {
        out.push_str("    {\n");
        out.push_str(&format!("      \"name\": \"{}\",\n", c.name));
        out.push_str(&format!("      \"trials\": {},\n", c.trials));
        out.push_str(&format!("      \"failures\": {},\n", c.failures));
        out.push_str(&format!(
            "      \"worst_residual\": {},\n",
            fmt_real(c.worst_residual)
        ));
        out.push_str(&format!(
            "      \"tolerance\": {},\n",
            fmt_real(c.tolerance)
        ));
        out.push_str(&format!("      \"pass\": {}\n", c.pass));
        out.push_str(if i + 1 == report.checks.len() {
            "    }\n"
        } else {
            "    },\n"
        });
    }
    out.push_str("  ],\n");
    out.push_str(&format!("  \"overall_pass\": {}\n", report.overall_pass));
    out.push_str("}\n");
    out
}
