//! Implementations of the file-producing subcommands.

use std::path::Path;

use nalgebra::DVector;
use splitci::fusion::{split_ci_fuse, SplitEstimate};
use splitci::optimizer::{minimize_w, OptimizeOptions, OptimizeResult};
use splitci::rng::NormalStream;
use splitci::symmat::SymMatrix;

use crate::jsonfmt::{fmt_real, fmt_real_array};
use crate::scenario::{load_scenario, numerical, CliError, Scenario};

fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn check_delta(delta: f64) -> Result<(), CliError> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "--delta must lie in (0, 0.5), got {delta}"
        )))
    }
}

/// `optimize`: weight optimization result as JSON.
pub fn cmd_optimize(input: &Path, output: &Path, delta: f64, w_tol: f64) -> Result<(), CliError> {
    check_delta(delta)?;
    if w_tol <= 0.0 {
        return Err(CliError::Input(format!(
            "--w-tol must be positive, got {w_tol}"
        )));
    }
    let scenario = load_scenario(input)?;
    let opts = OptimizeOptions {
        delta,
        w_tol,
        ..OptimizeOptions::default()
    };
    let res = minimize_w(&scenario.pair, &opts).map_err(numerical)?;
    write_output(output, &render_optimize(&res))
}

fn render_optimize(res: &OptimizeResult) -> String {
    format!(
        "{{\n  \"w\": {},\n  \"status\": \"{}\",\n  \"det_P\": {},\n  \"logdet_P\": {},\n  \"d1_at_solution\": {},\n  \"iterations\": {}\n}}\n",
        fmt_real(res.w_star),
        res.status.as_str(),
        fmt_real(res.objective_det),
        fmt_real(res.objective_logdet),
        fmt_real(res.d1_at_solution),
        res.iterations
    )
}

/// Exact header of the sweep CSV.
pub const SWEEP_HEADER: &str = "w,det,logdet,d1,d2_direct,d2_decomposed,lower_bound,T1,T2,T3";

/// `sweep`: tabulate the objective and every derivative quantity at equally
/// spaced weights in `[delta, 1 - delta]`.
pub fn cmd_sweep(input: &Path, output: &Path, samples: usize, delta: f64) -> Result<(), CliError> {
    check_delta(delta)?;
    if samples < 3 {
        return Err(CliError::Input(format!(
            "--samples must be at least 3, got {samples}"
        )));
    }
    let scenario = load_scenario(input)?;
    let span = 1.0 - 2.0 * delta;
    let mut out = String::with_capacity(samples * 220);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for i in 0..samples {
        let w = delta + span * (i as f64) / ((samples - 1) as f64);
        let ev = scenario.pair.evaluate(w).map_err(numerical)?;
        let row = [
            ev.w,
            ev.det_p,
            ev.logdet_p,
            ev.d1,
            ev.d2_direct,
            ev.d2_decomposed,
            ev.lower_bound,
            ev.t1,
            ev.t2,
            ev.t3,
        ];
        let cells: Vec<String> = row.iter().map(|&x| fmt_real(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_output(output, &out)
}

/// `fuse`: fuse the two estimates of a scenario (means required).
pub fn cmd_fuse(input: &Path, output: &Path) -> Result<(), CliError> {
    let scenario = load_scenario(input)?;
    let Scenario { pair, x1, x2 } = scenario;
    let x1 = x1.ok_or_else(|| CliError::Input("x1: required by fuse, missing".into()))?;
    let x2 = x2.ok_or_else(|| CliError::Input("x2: required by fuse, missing".into()))?;
    let e1 = SplitEstimate::new(x1, pair.p1d().clone(), pair.p1i().clone())
        .map_err(|e| CliError::Input(e.to_string()))?;
    let e2 = SplitEstimate::new(x2, pair.p2d().clone(), pair.p2i().clone())
        .map_err(|e| CliError::Input(e.to_string()))?;
    let out = split_ci_fuse(&e1, &e2, &OptimizeOptions::default()).map_err(numerical)?;

    let fused_x: Vec<f64> = out.fused.x().iter().copied().collect();
    let body = format!(
        "{{\n  \"w\": {},\n  \"x\": {},\n  \"P\": {},\n  \"Pd\": {},\n  \"Pi\": {},\n  \"status\": \"{}\"\n}}\n",
        fmt_real(out.w),
        fmt_real_array(&fused_x),
        fmt_real_array(&out.fused.total().to_row_major()),
        fmt_real_array(&out.fused.cov_d().to_row_major()),
        fmt_real_array(&out.fused.cov_i().to_row_major()),
        out.optimize.status.as_str()
    );
    write_output(output, &body)
}

/// Covariances of the simulated demo streams: a shared (correlated) error
/// source `Qc` and two independent noise sources `R1`, `R2`.
pub fn demo_matrices() -> (SymMatrix, SymMatrix, SymMatrix) {
    let qc = SymMatrix::new(2, &[1.0, 0.3, 0.3, 0.5]).expect("valid");
    let r1 = SymMatrix::new(2, &[0.5, 0.0, 0.0, 0.25]).expect("valid");
    let r2 = SymMatrix::new(2, &[0.25, 0.1, 0.1, 0.5]).expect("valid");
    (qc, r1, r2)
}

/// `demo`: two estimate streams observe a fixed truth with a shared error
/// drawn from `Qc` plus per-stream independent noise; each step fuses them
/// and logs the weight, fused determinant, and fused-mean error norm.
pub fn cmd_demo(steps: usize, seed: u64, output: &Path) -> Result<(), CliError> {
    if steps < 1 {
        return Err(CliError::Input(format!(
            "--steps must be at least 1, got {steps}"
        )));
    }
    let (qc, r1, r2) = demo_matrices();
    let sample = make_sampler(&qc);
    let sample_r1 = make_sampler(&r1);
    let sample_r2 = make_sampler(&r2);

    let mut stream = NormalStream::new(seed);
    let mut out = String::with_capacity(steps * 80 + 32);
    out.push_str("step,w,det_P,err_norm\n");
    for step in 0..steps {
        let common = sample(&mut stream);
        let v1 = sample_r1(&mut stream);
        let v2 = sample_r2(&mut stream);
        let e1 = SplitEstimate::new(&common + &v1, qc.clone(), r1.clone()).map_err(numerical)?;
        let e2 = SplitEstimate::new(&common + &v2, qc.clone(), r2.clone()).map_err(numerical)?;
        let fused = split_ci_fuse(&e1, &e2, &OptimizeOptions::default()).map_err(numerical)?;
        let det_p = fused.fused.total().chol_logdet().map_err(numerical)?.exp();
        let err_norm = fused.fused.x().norm();
        out.push_str(&format!(
            "{step},{},{},{}\n",
            fmt_real(fused.w),
            fmt_real(det_p),
            fmt_real(err_norm)
        ));
    }
    write_output(output, &out)
}

/// Sampler for `N(0, M)` via the Cholesky factor of `M`.
fn make_sampler(m: &SymMatrix) -> impl Fn(&mut NormalStream) -> DVector<f64> {
    let n = m.dim();
    let l = nalgebra::Cholesky::new(m.matrix().clone())
        .expect("demo covariances are positive definite")
        .l();
    move |stream: &mut NormalStream| {
        let z = DVector::from_iterator(n, (0..n).map(|_| stream.next_normal()));
        &l * z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimize_rendering_shape() {
        use splitci::optimizer::OptimizeStatus;
        let rendered = render_optimize(&OptimizeResult {
            w_star: 0.5,
            objective_logdet: 0.0,
            objective_det: 1.0,
            status: OptimizeStatus::Interior,
            iterations: 3,
            d1_at_solution: 0.0,
        });
        assert!(rendered.starts_with("{\n  \"w\": 5.0000000000000000e-1,\n"));
        assert!(rendered.contains("\"status\": \"interior\""));
        assert!(rendered.contains("\"iterations\": 3"));
        assert!(rendered.ends_with("}\n"));
        let parsed: serde_json::Value = serde_json::from_str(&rendered).unwrap();
        assert_eq!(parsed["w"].as_f64().unwrap(), 0.5);
    }

    #[test]
    fn demo_matrices_are_valid_covariances() {
        let (qc, r1, r2) = demo_matrices();
        for m in [&qc, &r1, &r2] {
            assert!(m.chol_logdet().is_ok());
        }
    }
}
