//! Monte Carlo success rate of the attack beside the closed form, per cell.

use laplace_mia::{success_rate_total, EmpiricalConfig, VarianceDivisor};

fn main() -> laplace_mia::Result<()> {
    println!(
        "{:>3} {:>6} {:>8} {:>14} {:>14}",
        "m", "eps_t", "theory", "empirical(m)", "empirical(m-1)"
    );
    for (m, eps_t) in [(4, 1.0), (10, 1.0), (10, 5.0), (20, 10.0)] {
        let theory = success_rate_total(m, eps_t)?;
        let plain = EmpiricalConfig::new(m, eps_t, 4000, 9).run()?;
        let bessel = EmpiricalConfig::new(m, eps_t, 4000, 9)
            .with_divisor(VarianceDivisor::Bessel)
            .run()?;
        println!(
            "{m:>3} {eps_t:>6} {theory:>8.4} {:>8.4}±{:.3} {:>8.4}±{:.3}",
            plain.rate, plain.stderr, bessel.rate, bessel.stderr
        );
    }
    Ok(())
}
