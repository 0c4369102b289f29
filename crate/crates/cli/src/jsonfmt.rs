//! Deterministic text serialization for outputs and golden fixtures.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), which
//! round-trips binary64 exactly, so re-running a command on the same inputs
//! reproduces output files byte for byte.

/// One real, 17 significant digits, exponent form (valid JSON number).
pub fn fmt_real(x: f64) -> String {
    debug_assert!(x.is_finite(), "refusing to serialize a non-finite value");
    format!("{x:.16e}")
}

/// A JSON array of reals on one line.
pub fn fmt_real_array(xs: &[f64]) -> String {
    let body: Vec<String> = xs.iter().map(|&x| fmt_real(x)).collect();
    format!("[{}]", body.join(", "))
}
