//! Cross-checks of the hand-written Student-t routines against `statrs`.

use laplace_mia::stats::{t_cdf, t_pdf, t_quantile};
use proptest::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

fn reference(nu: u32) -> StudentsT {
    StudentsT::new(0.0, 1.0, nu as f64).unwrap()
}

#[test]
fn table_quantiles() {
    // Two-sided 5% critical values.
    for (nu, crit) in [
        (1, 12.706_204_736),
        (4, 2.776_445_105),
        (9, 2.262_157_163),
        (28, 2.048_407_142),
    ] {
        assert!(
            (t_quantile(0.975, nu).unwrap() - crit).abs() < 1e-8,
            "nu={nu}"
        );
    }
}

proptest! {
    #[test]
    fn cdf_matches_statrs(t in -30.0f64..30.0, nu in 1u32..300) {
        prop_assert!((t_cdf(t, nu).unwrap() - reference(nu).cdf(t)).abs() < 1e-10);
    }

    #[test]
    fn pdf_matches_statrs(t in -30.0f64..30.0, nu in 1u32..300) {
        let r = reference(nu).pdf(t);
        prop_assert!((t_pdf(t, nu).unwrap() - r).abs() <= 1e-12 * r.max(1e-3));
    }

    #[test]
    fn quantile_matches_statrs(p in 0.001f64..0.999, nu in 1u32..200) {
        let ours = t_quantile(p, nu).unwrap();
        let theirs = reference(nu).inverse_cdf(p);
        prop_assert!((ours - theirs).abs() <= 1e-7 * theirs.abs().max(1.0));
    }
}
