//! Deterministic pseudo-random streams for test-input generation.
//!
//! Fixtures generated here must be reproducible bit-for-bit from a 64-bit
//! seed, including by reimplementations in other languages, so the exact
//! algorithm is pinned rather than delegated to an external crate:
//!
//! 1. **Integer stream**: SplitMix64. State advances by the odd constant
//!    `0x9E3779B97F4A7C15`; each output is the new state mixed by
//!    `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//!    z *= 0x94D049BB133111EB; z ^= z >> 31` (all wrapping u64 arithmetic).
//! 2. **Uniform doubles**: `u1 = ((x >> 11) + 1) * 2^-53` in `(0, 1]` and
//!    `u2 = (y >> 11) * 2^-53` in `[0, 1)`, from consecutive outputs `x, y`.
//! 3. **Standard normals**: Box-Muller, where `r = sqrt(-2 ln u1)` yields the pair
//!    `r cos(2π u2)`, `r sin(2π u2)`; the cosine value is returned first and
//!    the sine value on the following call.

use std::f64::consts::PI;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX2: u64 = 0x94D0_49BB_1331_11EB;
const TWO_POW_NEG53: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 integer stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(MIX1);
        z = (z ^ (z >> 27)).wrapping_mul(MIX2);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG53
    }

    /// Derive an independent sub-seed (one stream output).
    pub fn next_seed(&mut self) -> u64 {
        self.next_u64()
    }
}

/// Standard-normal stream: SplitMix64 feeding a Box–Muller transform.
#[derive(Debug, Clone)]
pub struct NormalStream {
    uniform: SplitMix64,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            uniform: SplitMix64::new(seed),
            spare: None,
        }
    }

    /// Next standard-normal variate.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] so the logarithm is finite.
        let u1 = ((self.uniform.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG53;
        let u2 = self.uniform.next_unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}
