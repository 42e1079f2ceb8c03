//! A defender with a per-record threshold. When the target is present the spend
//! on it grows with every query and the black box stops answering; the abort
//! itself tells the attacker the target is there.

use laplace_mia::{attack, AttackConfig, Dataset, Decision, LinearQuery, Mechanism, Record};

fn main() -> laplace_mia::Result<()> {
    let known_ids: Vec<String> = (0..10).map(|i| format!("k{i}")).collect();
    let known = Dataset::from_ids(known_ids.iter().cloned());
    let cfg = AttackConfig::new(10, 5.0, "x", known_ids);
    let threshold = 2.0;

    for present in [true, false] {
        let mut d = known.clone();
        if present {
            d.insert(Record::unit("x"))?;
        }
        let mut mech = Mechanism::new(d, threshold, 11)?;
        let v = attack(&mut mech, LinearQuery::Count, &cfg, &known)?;
        println!(
            "present={present:5}  decision {:?}  answers received {}  mechanism total {:.2} (threshold {threshold})",
            v.decision,
            v.samples.len(),
            mech.total_consumed(),
        );
        assert_eq!(v.decision == Decision::InViaAbort, present);
    }
    Ok(())
}
