use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const MAX_DEPTH: u32 = 60;

// Every interval is split at least this many times before the error test is
// trusted, so narrow peaks are not missed by the first five samples.
const MIN_DEPTH: u32 = 5;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::invalid(
            "bounds",
            format!("need finite a <= b, got [{a}, {b}]"),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(
            "tol",
            format!("must be positive, got {tol}"),
        ));
    }
    if a == b {
        return Ok(0.0);
    }
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand(x))
        }
    };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (eval(a)?, eval(m)?, eval(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(
        &eval,
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        tol,
        0,
    )
}

fn refine<E>(eval: &E, p: Panel, tol: f64, depth: u32) -> Result<f64>
where
    E: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    if !(p.a < lm && lm < m && m < rm && rm < p.b) {
        return Err(Error::NonConvergence {
            a: p.a,
            b: p.b,
            depth,
        });
    }
    let (flm, frm) = (eval(lm)?, eval(rm)?);
    let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    let delta = left + right - p.whole;

    if depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::NonConvergence {
            a: p.a,
            b: p.b,
            depth,
        });
    }
    let l = Panel {
        a: p.a,
        b: m,
        fa: p.fa,
        fm: flm,
        fb: p.fm,
        whole: left,
    };
    let r = Panel {
        a: m,
        b: p.b,
        fa: p.fm,
        fm: frm,
        fb: p.fb,
        whole: right,
    };
    Ok(refine(eval, l, tol / 2.0, depth + 1)? + refine(eval, r, tol / 2.0, depth + 1)?)
}
