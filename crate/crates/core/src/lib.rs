//! Membership inference against the Laplace mechanism.
//!
//! The crate models three parties:
//!
//! * the **defender** ([`mechanism`]): a stateful Laplace black box that memoizes
//!   answers, charges budget per record and aborts once the per-record spend
//!   crosses a threshold;
//! * the **attacker** ([`attack`]): harvests `m` i.i.d. noisy answers of one
//!   counting query by splitting its background knowledge into disjoint pieces,
//!   then runs a one-sample t-test to decide whether a target record is present;
//! * the **analyst** ([`analysis`]): closed-form success rates from the
//!   shifted-t power formula, checked against Monte Carlo runs of the attack.
//!
//! The divergence between the attacker's sequential total (`m·ε`) and the
//! mechanism's per-record total (`ε` when the target is absent) is what makes the
//! attack cheap: see [`mechanism::Mechanism::total_consumed`] and
//! [`mechanism::attacker_view_consumed`].
//!
//! Runnable walk-throughs live in the crate's `examples/` directory.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod attack;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod mechanism;
pub mod seed;
pub mod stats;

pub use analysis::{
    empirical_success_rate, power_terms, success_rate_exact, success_rate_per_query,
    success_rate_total, EmpiricalConfig, EmpiricalRate, ExperimentRow, GridMode, PowerTerms,
    RateMode, RateSpec,
};
pub use attack::{
    attack, classify_case, harvest_samples, AttackConfig, Case, Decision, HarvestOutcome, Verdict,
};
pub use dataset::{
    apply_condition, eval_query, sensitivity, Condition, Dataset, LinearQuery, Record,
};
pub use error::{Error, Result};
pub use mechanism::{attacker_view_consumed, IssueOutcome, Mechanism, QueryKey};
pub use stats::{
    integrate, one_sample_t_test, sample_laplace, t_cdf, t_pdf, t_quantile, NoiseStream,
    TTestResult, VarianceDivisor,
};
