use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::student_t::t_upper_tail;
use crate::error::{Error, Result};

/// Denominator used for the sample standard deviation `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum VarianceDivisor {
    /// `S² = Σ(x - x̄)² / m`, the attack's default.
    #[default]
    SampleCount,
    /// `S² = Σ(x - x̄)² / (m - 1)`, the textbook unbiased form.
    Bessel,
}

impl VarianceDivisor {
    fn divisor(self, m: usize) -> f64 {
        match self {
            VarianceDivisor::SampleCount => m as f64,
            VarianceDivisor::Bessel => (m - 1) as f64,
        }
    }
}

impl fmt::Display for VarianceDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarianceDivisor::SampleCount => "m",
            VarianceDivisor::Bessel => "m-1",
        })
    }
}

impl FromStr for VarianceDivisor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(VarianceDivisor::SampleCount),
            "m-1" => Ok(VarianceDivisor::Bessel),
            other => Err(Error::invalid(
                "s-divisor",
                format!("expected `m` or `m-1`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_stat: f64,
    pub df: u32,
    /// Two-sided: `2·(1 - F_t(|T|; df))`.
    pub p_value: f64,
    pub reject_null: bool,
}

/// One-sample two-sided t-test of `H₀: μ = mu0`, with `S` divided by `m`.
pub fn one_sample_t_test(samples: &[f64], mu0: f64, alpha: f64) -> Result<TTestResult> {
    one_sample_t_test_with(samples, mu0, alpha, VarianceDivisor::SampleCount)
}

/// [`one_sample_t_test`] with an explicit choice of divisor for `S`.
pub fn one_sample_t_test_with(
    samples: &[f64],
    mu0: f64,
    alpha: f64,
    divisor: VarianceDivisor,
) -> Result<TTestResult> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::invalid(
            "samples",
            format!("need at least 2, got {m}"),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in (0, 1), got {alpha}"),
        ));
    }
    if samples.iter().any(|x| !x.is_finite()) || !mu0.is_finite() {
        return Err(Error::invalid("samples", "values must be finite"));
    }
    let n = m as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
    let s = (ss / divisor.divisor(m)).sqrt();
    if s == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let t_stat = (mean - mu0) / (s / n.sqrt());
    let df = (m - 1) as u32;
    let p_value = (2.0 * t_upper_tail(t_stat.abs(), df)?).min(1.0);
    Ok(TTestResult {
        t_stat,
        df,
        p_value,
        reject_null: p_value < alpha,
    })
}
