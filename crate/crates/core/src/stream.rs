//! Counter-based deterministic random streams.
//!
//! Noise draws are a pure function of `(seed, i, j)`, so perturbing a matrix
//! is order-independent and restricting an aperture afterwards keeps the
//! surviving entries bit-identical.

use core::f64::consts::TAU;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Two independent 64-bit words keyed by `(seed, i, j)`.
fn words(seed: u64, i: u64, j: u64) -> (u64, u64) {
    let h = mix(seed
        .wrapping_add(GOLDEN)
        .wrapping_add(mix(i.wrapping_mul(0xA24B_AED4_963E_E407)))
        .wrapping_add(mix(j.wrapping_mul(0x9FB2_1C65_1E98_DF25))));
    (mix(h.wrapping_add(GOLDEN)), mix(h.wrapping_add(GOLDEN.wrapping_mul(2))))
}

/// Uniform in the open interval (0, 1).
fn to_unit(w: u64) -> f64 {
    ((w >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Two standard normal draws keyed by `(seed, i, j)` (Box–Muller).
pub fn normal_pair(seed: u64, i: u64, j: u64) -> (f64, f64) {
    let (w1, w2) = words(seed, i, j);
    let r = (-2.0 * to_unit(w1).ln()).sqrt();
    let (s, c) = (TAU * to_unit(w2)).sin_cos();
    (r * c, r * s)
}

/// Small sequential generator for tests (splitmix64).
#[derive(Clone, Debug)]
pub struct SeqRng {
    state: u64,
}

impl SeqRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    pub fn uniform(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }
}
