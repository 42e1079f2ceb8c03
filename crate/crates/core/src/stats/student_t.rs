//! Student-t density, distribution function and quantile.
//!
//! The distribution function goes through the regularized incomplete beta
//! function `I_x(ν/2, 1/2)` with `x = ν/(ν + t²)`, evaluated by Lentz's
//! continued fraction.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const CF_MAX_ITER: usize = 200;
const CF_EPS: f64 = 1e-14;
const TINY: f64 = 1e-300;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for `I_x(a, b)` (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let clamp = |v: f64| if v.abs() < TINY { TINY } else { v };

    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;

    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let del = d * c;
        h *= del;

        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// `I_x(a, b)` given both `x` and `1 - x`, so callers can pass an exact complement.
fn inc_beta(a: f64, b: f64, x: f64, one_minus_x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if one_minus_x <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * one_minus_x.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, one_minus_x) / b
    }
}

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0`, `0 <= x <= 1`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::invalid(
            "a, b",
            format!("must be positive, got a={a}, b={b}"),
        ));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("x", format!("must lie in [0, 1], got {x}")));
    }
    Ok(inc_beta(a, b, x, 1.0 - x))
}

fn check_df(nu: u32) -> Result<f64> {
    if nu < 1 {
        return Err(Error::invalid("degrees of freedom", "must be at least 1"));
    }
    Ok(nu as f64)
}

/// Density of the Student-t distribution with `nu` degrees of freedom.
pub fn t_pdf(t: f64, nu: u32) -> Result<f64> {
    let v = check_df(nu)?;
    let ln_norm = ln_gamma((v + 1.0) / 2.0) - ln_gamma(v / 2.0) - 0.5 * (v * PI).ln();
    Ok((ln_norm - (v + 1.0) / 2.0 * (t * t / v).ln_1p()).exp())
}

/// `P(T > t)`; accurate in the far upper tail where `1 - t_cdf` would cancel.
pub fn t_upper_tail(t: f64, nu: u32) -> Result<f64> {
    let v = check_df(nu)?;
    if t.is_nan() {
        return Ok(f64::NAN);
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let t2 = t * t;
    let x = v / (v + t2);
    let y = t2 / (v + t2);
    let two_sided = inc_beta(v / 2.0, 0.5, x, y);
    Ok(if t > 0.0 {
        0.5 * two_sided
    } else {
        1.0 - 0.5 * two_sided
    })
}

/// Distribution function `F_t(t; nu)`.
pub fn t_cdf(t: f64, nu: u32) -> Result<f64> {
    t_upper_tail(-t, nu)
}

/// Inverse of [`t_cdf`]: bracketing bisection, then safeguarded Newton steps.
pub fn t_quantile(p: f64, nu: u32) -> Result<f64> {
    check_df(nu)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("must lie in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Solve P(T > t) = tail for t > 0, then restore the sign.
    let (tail, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };
    let g = |t: f64| t_upper_tail(t, nu).map(|u| u - tail);

    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::invalid("p", format!("quantile of {p} overflows")));
        }
    }
    for _ in 0..60 {
        if hi - lo <= 1e-6 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut t = 0.5 * (lo + hi);
    for _ in 0..50 {
        let r = g(t)?;
        if r > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if r.abs() <= 1e-15 * tail.max(1e-300) {
            break;
        }
        let slope = t_pdf(t, nu)?;
        let mut next = t + r / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON * t {
            t = next;
            break;
        }
        t = next;
    }
    Ok(sign * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::integrate;
    use proptest::prelude::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cauchy_density_at_zero() {
        assert!((t_pdf(0.0, 1).unwrap() - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn density_is_even() {
        for &(x, nu) in &[(0.3, 1), (1.7, 4), (5.2, 30), (12.0, 2)] {
            assert_eq!(t_pdf(x, nu).unwrap(), t_pdf(-x, nu).unwrap());
        }
    }

    #[test]
    fn density_normalizes() {
        let mass = integrate(|t| t_pdf(t, 9).unwrap(), -50.0, 50.0, 1e-11).unwrap();
        // Tails beyond ±50 at nu = 9 carry about 3e-14.
        assert!((mass - 1.0).abs() < 1e-8, "mass {mass}");
    }

    #[test]
    fn cdf_closed_forms() {
        for nu in [1, 2, 5, 60, 1000] {
            assert_eq!(t_cdf(0.0, nu).unwrap(), 0.5);
        }
        assert!((t_cdf(1.0, 1).unwrap() - 0.75).abs() < 1e-14);
        // nu = 2: F(t) = 1/2 + t / (2 sqrt(2 + t²)).
        for t in [-3.0, -0.4, 0.9, 7.5] {
            let exact = 0.5 + t / (2.0 * (2.0f64 + t * t).sqrt());
            assert!((t_cdf(t, 2).unwrap() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn cdf_against_quadrature_oracle() {
        let by_quadrature = 0.5 + integrate(|t| t_pdf(t, 9).unwrap(), 0.0, 2.262, 1e-12).unwrap();
        let cdf = t_cdf(2.262, 9).unwrap();
        assert!((cdf - by_quadrature).abs() < 1e-10);
        assert!((cdf - 0.975).abs() < 1e-3);
    }

    #[test]
    fn quantiles() {
        assert_eq!(t_quantile(0.5, 7).unwrap(), 0.0);
        let cauchy = (PI * 0.475).tan();
        assert!((t_quantile(0.975, 1).unwrap() - cauchy).abs() < 1e-8);
        assert!((cauchy - 12.7062).abs() < 1e-4);

        // Bisection on t_cdf alone, as an independent route.
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if t_cdf(mid, 9).unwrap() < 0.975 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let q = t_quantile(0.975, 9).unwrap();
        assert!((q - lo).abs() < 1e-9);
        assert!((q - 2.2622).abs() < 1e-4);
        assert!((t_quantile(0.025, 9).unwrap() + q).abs() < 1e-12);
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(t_quantile(p, 3).is_err());
        }
        assert!(t_cdf(0.0, 0).is_err());
        assert!(t_pdf(0.0, 0).is_err());
    }

    #[test]
    fn far_tail_is_accurate() {
        // nu = 1: P(T > t) = atan(1/t)/pi.
        let t: f64 = 1e6;
        let exact = (1.0 / t).atan() / PI;
        assert!((t_upper_tail(t, 1).unwrap() / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn incomplete_beta_edges() {
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
        // I_x(1, 1) = x; I_x(2, 1) = x².
        assert!((regularized_incomplete_beta(1.0, 1.0, 0.3).unwrap() - 0.3).abs() < 1e-14);
        assert!((regularized_incomplete_beta(2.0, 1.0, 0.6).unwrap() - 0.36).abs() < 1e-14);
        assert!(regularized_incomplete_beta(0.0, 1.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn derivative_of_cdf_is_density(t in -8.0f64..8.0, nu in 1u32..80) {
            let h = 1e-5;
            let fd = (t_cdf(t + h, nu).unwrap() - t_cdf(t - h, nu).unwrap()) / (2.0 * h);
            prop_assert!((fd - t_pdf(t, nu).unwrap()).abs() < 1e-6);
        }

        #[test]
        fn quantile_inverts_cdf(p in 0.01f64..0.99, nu in 1u32..200) {
            let t = t_quantile(p, nu).unwrap();
            prop_assert!((t_cdf(t, nu).unwrap() - p).abs() < 1e-8);
        }

        #[test]
        fn cdf_is_monotone(a in -20.0f64..20.0, b in -20.0f64..20.0, nu in 1u32..100) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(t_cdf(lo, nu).unwrap() <= t_cdf(hi, nu).unwrap());
        }
    }
}
