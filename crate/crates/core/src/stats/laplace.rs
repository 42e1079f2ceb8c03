use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Maps `u` in `(-1/2, 1/2)` to a Laplace(0, `b`) variate by inverting the CDF:
/// `z = -b·sgn(u)·ln(1 - 2|u|)`.
pub fn laplace_from_uniform(u: f64, b: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    -b * u.signum() * (-2.0 * u.abs()).ln_1p()
}

/// Uniform on the open interval `(-1/2, 1/2)`, symmetric about zero.
fn centered_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    // Midpoints of a 2^53 grid: never exactly ±1/2 or 0.
    let k = rng.next_u64() >> 11;
    (k as f64 + 0.5) * (1.0 / (1u64 << 53) as f64) - 0.5
}

/// One draw from the Laplace distribution with location 0 and scale `b`.
pub fn sample_laplace<R: RngCore + ?Sized>(rng: &mut R, b: f64) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(
            "scale",
            format!("must be positive and finite, got {b}"),
        ));
    }
    Ok(laplace_from_uniform(centered_uniform(rng), b))
}

/// A deterministic noise source: the same seed always yields the same draws
/// in the same order.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    draws: u64,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        NoiseStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
        }
    }

    pub fn laplace(&mut self, b: f64) -> Result<f64> {
        let z = sample_laplace(&mut self.rng, b)?;
        self.draws += 1;
        Ok(z)
    }

    /// Number of successful draws so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}
