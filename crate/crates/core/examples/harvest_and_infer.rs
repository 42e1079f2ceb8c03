//! One full attack: harvest m samples through disjoint pieces of the background
//! knowledge, then run the t-test.

use laplace_mia::{attack, classify_case, AttackConfig, Dataset, LinearQuery, Mechanism};

fn main() -> laplace_mia::Result<()> {
    let m = 20;
    let eps_total = 10.0;
    let known_ids: Vec<String> = (0..40).map(|i| format!("patient-{i:03}")).collect();
    let known = Dataset::from_ids(known_ids.iter().cloned());
    let cfg = AttackConfig::new(m, eps_total, "patient-999", known_ids.clone());

    for present in [true, false] {
        let mut protected = known.clone();
        if present {
            protected.insert(laplace_mia::Record::unit("patient-999"))?;
        }
        // A few strangers the attacker knows nothing about.
        for i in 0..5 {
            protected.insert(laplace_mia::Record::unit(format!("stranger-{i}")))?;
        }
        let mut mech = Mechanism::new(protected, f64::INFINITY, 2024)?;
        let v = attack(&mut mech, LinearQuery::Count, &cfg, &known)?;
        let t = v.t_test.as_ref().expect("no abort, so the test ran");
        println!(
            "present={present:5} case {}  decision {:?}  T={:+.3} p={:.4}  budget attacker={:.2} mechanism={:.2}",
            classify_case(true, present).number(),
            v.decision,
            t.t_stat,
            t.p_value,
            v.attacker_budget,
            v.mechanism_budget,
        );
    }
    Ok(())
}
