//! Issues the same ten disjoint-piece queries against two datasets, one with the
//! target and one without, and prints both budget views.

use laplace_mia::{attacker_view_consumed, Condition, Dataset, LinearQuery, Mechanism};

fn main() -> laplace_mia::Result<()> {
    let known: Vec<String> = (0..10).map(|i| format!("k{i}")).collect();
    let eps = 0.1;

    for present in [false, true] {
        let mut ids = known.clone();
        if present {
            ids.push("x".into());
        }
        let mut mech = Mechanism::new(Dataset::from_ids(ids), f64::INFINITY, 7)?;
        let mut trace = Vec::new();
        for k in &known {
            let cond = Condition::new([k.as_str(), "x"]);
            mech.issue(LinearQuery::Count, &cond, eps)?;
            trace.push(eps);
        }
        println!(
            "x present: {present:5}  attacker view: {:.3}  mechanism view: {:.3}  spend on x: {:.3}",
            attacker_view_consumed(&trace),
            mech.total_consumed(),
            mech.accountant().spend("x"),
        );
    }
    Ok(())
}
