//! The defender: a Laplace-mechanism black box with per-record budget accounting.
//!
//! The black box
//!
//! 1. answers a repeated query with the memoized value and charges nothing,
//! 2. answers a new query with `q(D_s ∩ D) + Laplace(0, ΔD/ε)`,
//! 3. aborts for good once the consumed budget exceeds its threshold.
//!
//! Budget is charged per record: every record in a query's effective set
//! accumulates that query's `ε`, and the mechanism's total is the maximum over
//! records. Queries over disjoint effective sets therefore compose in parallel
//! (total `ε`), while queries sharing a record compose sequentially (total `Σε`).

use std::collections::HashMap;

use crate::dataset::{apply_condition, eval_query, sensitivity, Condition, Dataset, LinearQuery};
use crate::error::{Error, Result};
use crate::stats::NoiseStream;

/// Identity of a query for memoization: kind, canonical condition and budget.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryKey {
    query: LinearQuery,
    member_ids: Vec<String>,
    epsilon_bits: u64,
}

impl QueryKey {
    pub fn new(query: LinearQuery, condition: &Condition, epsilon: f64) -> Self {
        QueryKey {
            query,
            member_ids: condition.member_ids().map(str::to_owned).collect(),
            epsilon_bits: epsilon.to_bits(),
        }
    }

    pub fn epsilon(&self) -> f64 {
        f64::from_bits(self.epsilon_bits)
    }
}

/// Neumaier-compensated running sum, so that e.g. ten charges of 0.1 total exactly 1.0.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Cumulative budget charged to each record.
#[derive(Debug, Clone, Default)]
pub struct BudgetAccountant {
    per_record_spend: HashMap<String, CompensatedSum>,
}

impl BudgetAccountant {
    pub fn charge<'a, I>(&mut self, ids: I, epsilon: f64)
    where
        I: IntoIterator<Item = &'a str>,
    {
        for id in ids {
            match self.per_record_spend.get_mut(id) {
                Some(s) => s.add(epsilon),
                None => {
                    let mut s = CompensatedSum::default();
                    s.add(epsilon);
                    self.per_record_spend.insert(id.to_owned(), s);
                }
            }
        }
    }

    /// Budget spent on queries whose effective set contained `id`.
    pub fn spend(&self, id: &str) -> f64 {
        self.per_record_spend
            .get(id)
            .map_or(0.0, CompensatedSum::value)
    }

    /// Maximum per-record spend; zero before any charge.
    pub fn total(&self) -> f64 {
        self.per_record_spend
            .values()
            .map(CompensatedSum::value)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IssueOutcome {
    /// A noisy answer and the budget charged for it (zero for a memo hit).
    Answer { value: f64, epsilon_charged: f64 },
    /// The black box has shut down; no answer is released.
    Aborted,
}

impl IssueOutcome {
    pub fn value(&self) -> Option<f64> {
        match *self {
            IssueOutcome::Answer { value, .. } => Some(value),
            IssueOutcome::Aborted => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mechanism {
    dataset: Dataset,
    threshold: f64,
    memo: HashMap<QueryKey, f64>,
    accountant: BudgetAccountant,
    noise: NoiseStream,
    seed: u64,
    aborted: bool,
}

impl Mechanism {
    /// `threshold` may be `f64::INFINITY` for a black box that never aborts.
    pub fn new(dataset: Dataset, threshold: f64, seed: u64) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::invalid(
                "threshold",
                format!("must be positive, got {threshold}"),
            ));
        }
        Ok(Mechanism {
            dataset,
            threshold,
            memo: HashMap::new(),
            accountant: BudgetAccountant::default(),
            noise: NoiseStream::new(seed),
            seed,
            aborted: false,
        })
    }

    pub fn issue(&mut self, q: LinearQuery, s: &Condition, epsilon: f64) -> Result<IssueOutcome> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(
                "epsilon",
                format!("must be positive and finite, got {epsilon}"),
            ));
        }
        if self.aborted {
            return Ok(IssueOutcome::Aborted);
        }
        let key = QueryKey::new(q, s, epsilon);
        if let Some(&value) = self.memo.get(&key) {
            return Ok(IssueOutcome::Answer {
                value,
                epsilon_charged: 0.0,
            });
        }

        let scale = sensitivity(q, &self.dataset)? / epsilon;
        let effective = apply_condition(s, &self.dataset);
        let exact = eval_query(q, effective.iter().copied());
        let value = exact + self.noise.laplace(scale)?;

        self.accountant
            .charge(effective.iter().map(|r| r.id.as_str()), epsilon);
        self.memo.insert(key, value);

        if self.accountant.total() > self.threshold {
            self.aborted = true;
            return Ok(IssueOutcome::Aborted);
        }
        Ok(IssueOutcome::Answer {
            value,
            epsilon_charged: epsilon,
        })
    }

    /// Consumed budget from the mechanism's side: the largest per-record spend.
    pub fn total_consumed(&self) -> f64 {
        self.accountant.total()
    }

    pub fn accountant(&self) -> &BudgetAccountant {
        &self.accountant
    }

    pub fn is_aborted(&self) -> bool {
        self.aborted
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    /// Number of distinct queries answered (or withheld on abort) so far.
    pub fn fresh_issues(&self) -> usize {
        self.memo.len()
    }
}

/// Consumed budget from the querier's side: every charged `ε` adds up.
pub fn attacker_view_consumed(trace: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    for &eps in trace {
        acc.add(eps);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn answer(o: IssueOutcome) -> (f64, f64) {
        match o {
            IssueOutcome::Answer {
                value,
                epsilon_charged,
            } => (value, epsilon_charged),
            IssueOutcome::Aborted => panic!("unexpected abort"),
        }
    }

    #[test]
    fn construction() {
        let d = Dataset::from_ids(ids("r", 3));
        let m = Mechanism::new(d.clone(), f64::INFINITY, 42).unwrap();
        assert_eq!(m.total_consumed(), 0.0);
        assert!(!m.is_aborted());
        let m = Mechanism::new(d.clone(), 1.0, 7).unwrap();
        assert_eq!(m.threshold(), 1.0);
        assert!(Mechanism::new(d.clone(), 0.0, 7).is_err());
        assert!(Mechanism::new(d, f64::NAN, 7).is_err());
    }

    #[test]
    fn answer_is_count_plus_replayed_noise() {
        let d = Dataset::from_ids(ids("r", 8));
        let mut m = Mechanism::new(d, f64::INFINITY, 5).unwrap();
        let s = Condition::new(ids("r", 5));
        let (value, charged) = answer(m.issue(LinearQuery::Count, &s, 0.5).unwrap());
        let mut oracle = NoiseStream::new(5);
        assert_eq!(value, 5.0 + oracle.laplace(2.0).unwrap());
        assert_eq!(charged, 0.5);
        assert_eq!(m.total_consumed(), 0.5);
    }

    #[test]
    fn repeated_query_is_memoized() {
        let d = Dataset::from_ids(ids("r", 4));
        let mut m = Mechanism::new(d, f64::INFINITY, 1).unwrap();
        let s = Condition::new(["r1", "r0", "zz"]);
        let (first, _) = answer(m.issue(LinearQuery::Count, &s, 0.3).unwrap());
        for _ in 0..5 {
            // Same ids in another order.
            let again = Condition::new(["zz", "r0", "r1"]);
            let (v, charged) = answer(m.issue(LinearQuery::Count, &again, 0.3).unwrap());
            assert_eq!(v, first);
            assert_eq!(charged, 0.0);
        }
        assert_eq!(m.total_consumed(), 0.3);
        assert_eq!(m.fresh_issues(), 1);

        // A different budget is a different query.
        let (_, charged) = answer(m.issue(LinearQuery::Count, &s, 0.2).unwrap());
        assert_eq!(charged, 0.2);
        assert!((m.total_consumed() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn overlapping_queries_trip_threshold() {
        let d = Dataset::from_ids(ids("r", 4));
        let mut m = Mechanism::new(d, 0.5, 3).unwrap();
        assert!(m
            .issue(LinearQuery::Count, &Condition::new(["r0", "r1"]), 0.4)
            .unwrap()
            .value()
            .is_some());
        let second = m
            .issue(LinearQuery::Count, &Condition::new(["r1", "r2"]), 0.4)
            .unwrap();
        assert_eq!(second, IssueOutcome::Aborted);
        assert!(m.is_aborted());
        // Permanent, even for a memoized or harmless query.
        assert_eq!(
            m.issue(LinearQuery::Count, &Condition::new(["r0", "r1"]), 0.4)
                .unwrap(),
            IssueOutcome::Aborted
        );
        assert_eq!(
            m.issue(LinearQuery::Count, &Condition::new(["r3"]), 0.01)
                .unwrap(),
            IssueOutcome::Aborted
        );
    }

    #[test]
    fn disjoint_queries_do_not_trip_threshold() {
        let d = Dataset::from_ids(ids("r", 4));
        let mut m = Mechanism::new(d, 0.5, 3).unwrap();
        for i in 0..4 {
            let s = Condition::new([format!("r{i}")]);
            assert!(m
                .issue(LinearQuery::Count, &s, 0.4)
                .unwrap()
                .value()
                .is_some());
        }
        assert_eq!(m.total_consumed(), 0.4);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let mut m = Mechanism::new(Dataset::from_ids(["a"]), 1.0, 0).unwrap();
        for eps in [0.0, -0.1, f64::INFINITY, f64::NAN] {
            assert!(m
                .issue(LinearQuery::Count, &Condition::new(["a"]), eps)
                .is_err());
        }
        assert_eq!(m.total_consumed(), 0.0);
    }

    #[test]
    fn sum_without_bound_is_rejected() {
        let mut m = Mechanism::new(Dataset::from_ids(["a"]), 1.0, 0).unwrap();
        assert!(matches!(
            m.issue(LinearQuery::Sum, &Condition::new(["a"]), 0.5),
            Err(Error::MissingValueBound(None))
        ));
    }

    #[test]
    fn absent_records_are_not_charged() {
        let mut m = Mechanism::new(Dataset::from_ids(["a", "b"]), f64::INFINITY, 0).unwrap();
        m.issue(LinearQuery::Count, &Condition::new(["a", "ghost"]), 0.25)
            .unwrap();
        assert_eq!(m.accountant().spend("a"), 0.25);
        assert_eq!(m.accountant().spend("ghost"), 0.0);
    }

    #[test]
    fn parallel_and_sequential_totals() {
        let d = Dataset::from_ids(ids("r", 6).into_iter().chain(["x".to_owned()]));

        let mut m = Mechanism::new(d.clone(), f64::INFINITY, 0).unwrap();
        for i in 0..3 {
            m.issue(LinearQuery::Count, &Condition::new([format!("r{i}")]), 0.1)
                .unwrap();
        }
        assert_eq!(m.total_consumed(), 0.1);

        let mut m = Mechanism::new(d, f64::INFINITY, 0).unwrap();
        for i in 0..3 {
            m.issue(
                LinearQuery::Count,
                &Condition::new([format!("r{i}"), "x".into()]),
                0.1,
            )
            .unwrap();
        }
        assert_eq!(m.total_consumed(), attacker_view_consumed(&[0.1; 3]));
        assert!((m.total_consumed() - 0.3).abs() <= f64::EPSILON);
    }

    #[test]
    fn attacker_view_sums() {
        assert_eq!(attacker_view_consumed(&[0.1; 10]), 1.0);
        assert_eq!(attacker_view_consumed(&[]), 0.0);
        assert_eq!(attacker_view_consumed(&[0.25; 4]), 1.0);
    }

    #[test]
    fn noise_variance_over_fresh_mechanisms() {
        let d = Dataset::from_ids(ids("r", 3));
        let s = Condition::new(ids("r", 3));
        for eps in [1.0, 0.5] {
            let n = 100_000;
            let errs: Vec<f64> = (0..n)
                .map(|seed| {
                    let mut m = Mechanism::new(d.clone(), f64::INFINITY, seed).unwrap();
                    m.issue(LinearQuery::Count, &s, eps)
                        .unwrap()
                        .value()
                        .unwrap()
                        - 3.0
                })
                .collect();
            let mean = errs.iter().sum::<f64>() / n as f64;
            let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64;
            let expected = 2.0 / (eps * eps);
            assert!((var - expected).abs() / expected < 0.05, "eps={eps}: {var}");
        }
    }

    #[test]
    fn neighbouring_datasets_log_ratio_is_bounded() {
        let eps = 1.0;
        let with = Dataset::from_ids(ids("r", 5));
        let without = Dataset::from_ids(ids("r", 4));
        let s = Condition::new(ids("r", 5));
        let n = 100_000u64;
        let histogram = |d: &Dataset, offset: u64| {
            let mut bins = [0u32; 12];
            for i in 0..n {
                let mut m = Mechanism::new(d.clone(), f64::INFINITY, offset + i).unwrap();
                let v = m
                    .issue(LinearQuery::Count, &s, eps)
                    .unwrap()
                    .value()
                    .unwrap();
                let b = (v + 1.5).floor().clamp(0.0, 11.0) as usize;
                bins[b] += 1;
            }
            bins
        };
        let a = histogram(&with, 0);
        let b = histogram(&without, 1 << 40);
        for (ca, cb) in a.iter().zip(&b) {
            if *ca < 2000 || *cb < 2000 {
                continue;
            }
            let ratio = (*ca as f64 / *cb as f64).ln().abs();
            assert!(ratio <= eps + 0.1, "log ratio {ratio}");
        }
    }

    proptest! {
        #[test]
        fn disjoint_family_totals_epsilon(k in 1usize..20, eps in 0.001f64..2.0) {
            let d = Dataset::from_ids(ids("r", 20));
            let mut m = Mechanism::new(d, f64::INFINITY, 9).unwrap();
            for i in 0..k {
                m.issue(LinearQuery::Count, &Condition::new([format!("r{i}")]), eps).unwrap();
            }
            prop_assert_eq!(m.total_consumed(), eps);
        }

        #[test]
        fn shared_record_family_totals_sum(epsilons in prop::collection::vec(0.001f64..1.0, 1..15)) {
            let d = Dataset::from_ids(ids("r", 20).into_iter().chain(["x".to_owned()]));
            let mut m = Mechanism::new(d, f64::INFINITY, 9).unwrap();
            for (i, &eps) in epsilons.iter().enumerate() {
                m.issue(LinearQuery::Count, &Condition::new([format!("r{i}"), "x".into()]), eps).unwrap();
            }
            prop_assert_eq!(m.total_consumed(), attacker_view_consumed(&epsilons));
        }

        #[test]
        fn memo_hits_change_nothing(n in 1usize..10, seed in any::<u64>()) {
            let d = Dataset::from_ids(ids("r", 5));
            let mut m = Mechanism::new(d, f64::INFINITY, seed).unwrap();
            let s = Condition::new(["r1", "r3"]);
            let first = m.issue(LinearQuery::Count, &s, 0.7).unwrap();
            let spent = m.total_consumed();
            for _ in 0..n {
                let again = m.issue(LinearQuery::Count, &s, 0.7).unwrap();
                prop_assert_eq!(again.value(), first.value());
                prop_assert_eq!(m.total_consumed(), spent);
            }
        }
    }
}
