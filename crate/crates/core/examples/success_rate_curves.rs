//! Closed-form success rates: a fixed per-query budget against a fixed total.

use laplace_mia::{success_rate_per_query, success_rate_total};

fn main() -> laplace_mia::Result<()> {
    let ms = [4usize, 6, 8, 10, 15, 20, 25, 29];
    print!("{:>12}", "m");
    for m in ms {
        print!("{m:>8}");
    }
    println!();
    for eps in [0.01, 0.1, 0.33] {
        print!("{:>12}", format!("eps={eps}"));
        for m in ms {
            print!("{:>8.4}", success_rate_per_query(m, eps)?);
        }
        println!();
    }
    for eps_t in [1.0, 5.0, 10.0] {
        print!("{:>12}", format!("eps_t={eps_t}"));
        for m in ms {
            print!("{:>8.4}", success_rate_total(m, eps_t)?);
        }
        println!();
    }
    Ok(())
}
