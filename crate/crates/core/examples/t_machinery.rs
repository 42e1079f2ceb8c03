//! The Student-t pieces the attack and the analysis rest on.

use laplace_mia::{integrate, one_sample_t_test, t_cdf, t_pdf, t_quantile};

fn main() -> laplace_mia::Result<()> {
    println!(
        "{:>4} {:>10} {:>12} {:>12}",
        "df", "t_0.975", "cdf(2.0)", "∫0..T* pdf"
    );
    for nu in [1u32, 2, 4, 9, 19, 29, 99] {
        let q = t_quantile(0.975, nu)?;
        let mass = integrate(|t| t_pdf(t, nu).unwrap(), 0.0, q, 1e-10)?;
        println!("{nu:>4} {q:>10.5} {:>12.6} {mass:>12.6}", t_cdf(2.0, nu)?);
    }

    let r = one_sample_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.0, 0.05)?;
    println!(
        "\nsamples 1..5 against mu0=0: T={:.4} df={} p={:.6} reject={}",
        r.t_stat, r.df, r.p_value, r.reject_null
    );
    Ok(())
}
