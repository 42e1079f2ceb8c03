//! The attacker: sample harvesting by linear division, then a t-test on the
//! harvested answers.
//!
//! With background knowledge `D_know ⊂ D` split into disjoint pieces
//! `D_1..D_m`, the attacker asks for `q` over `D_i ∪ {x}` and adds back
//! `q(D_know \ D_i)` locally. Each reconstructed answer is an independent noisy
//! copy of `q((D_know ∪ {x}) ∩ D)`, while the mechanism only sees queries over
//! disjoint record sets when `x` is absent.

use std::collections::HashSet;

use serde::Serialize;

use crate::dataset::{eval_query, Condition, Dataset, LinearQuery};
use crate::error::{Error, Result};
use crate::mechanism::{attacker_view_consumed, IssueOutcome, Mechanism};
use crate::stats::{one_sample_t_test_with, TTestResult, VarianceDivisor};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    /// Number of samples to harvest.
    pub m: usize,
    /// Total budget from the attacker's perspective; each query gets `eps_total / m`.
    pub eps_total: f64,
    pub alpha: f64,
    pub target_id: String,
    /// The attacker's background knowledge, in partitioning order.
    pub known_ids: Vec<String>,
    pub divisor: VarianceDivisor,
}

impl AttackConfig {
    pub fn new(
        m: usize,
        eps_total: f64,
        target_id: impl Into<String>,
        known_ids: Vec<String>,
    ) -> Self {
        AttackConfig {
            m,
            eps_total,
            alpha: DEFAULT_ALPHA,
            target_id: target_id.into(),
            known_ids,
            divisor: VarianceDivisor::default(),
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_divisor(mut self, divisor: VarianceDivisor) -> Self {
        self.divisor = divisor;
        self
    }

    /// Budget spent on each individual query.
    pub fn per_query_epsilon(&self) -> f64 {
        self.eps_total / self.m as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("m must be positive".into()));
        }
        if !(self.eps_total > 0.0 && self.eps_total.is_finite()) {
            return Err(Error::Config(format!(
                "total budget must be positive and finite, got {}",
                self.eps_total
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        let mut seen = HashSet::with_capacity(self.known_ids.len());
        for id in &self.known_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Config(format!("known id `{id}` is listed twice")));
            }
        }
        if seen.contains(self.target_id.as_str()) {
            return Err(Error::Config(format!(
                "target `{}` is part of the background knowledge",
                self.target_id
            )));
        }
        if self.known_ids.len() < self.m {
            return Err(Error::InsufficientKnowledge {
                known: self.known_ids.len(),
                m: self.m,
            });
        }
        Ok(())
    }

    /// Splits the known ids into `m` disjoint, nonempty pieces: one singleton per
    /// piece in list order, leftovers dealt round-robin.
    pub fn partition(&self) -> Vec<Vec<&str>> {
        let mut parts: Vec<Vec<&str>> = vec![Vec::new(); self.m];
        for (i, id) in self.known_ids.iter().enumerate() {
            parts[i % self.m].push(id.as_str());
        }
        parts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HarvestOutcome {
    /// All `m` reconstructed answers, plus the budget charged per issue.
    Complete { samples: Vec<f64>, trace: Vec<f64> },
    /// The black box aborted; `samples` holds what was reconstructed before that.
    AbortDetected { samples: Vec<f64>, trace: Vec<f64> },
}

impl HarvestOutcome {
    pub fn samples(&self) -> &[f64] {
        match self {
            HarvestOutcome::Complete { samples, .. }
            | HarvestOutcome::AbortDetected { samples, .. } => samples,
        }
    }

    /// Budget charged by each answered issue, in issue order.
    pub fn trace(&self) -> &[f64] {
        match self {
            HarvestOutcome::Complete { trace, .. }
            | HarvestOutcome::AbortDetected { trace, .. } => trace,
        }
    }

    pub fn aborted(&self) -> bool {
        matches!(self, HarvestOutcome::AbortDetected { .. })
    }
}

fn check_knowledge(cfg: &AttackConfig, known: &Dataset) -> Result<()> {
    if known.len() != cfg.known_ids.len() {
        return Err(Error::Config(format!(
            "background dataset has {} records but {} known ids were given",
            known.len(),
            cfg.known_ids.len()
        )));
    }
    if let Some(missing) = cfg.known_ids.iter().find(|id| !known.contains(id)) {
        return Err(Error::Config(format!(
            "known id `{missing}` has no local record"
        )));
    }
    Ok(())
}

/// Collects `m` independent noisy answers of `q` over `D_know ∪ {target}`.
///
/// `known` holds the attacker's local copies of the records in `cfg.known_ids`.
pub fn harvest_samples(
    mechanism: &mut Mechanism,
    q: LinearQuery,
    cfg: &AttackConfig,
    known: &Dataset,
) -> Result<HarvestOutcome> {
    cfg.validate()?;
    check_knowledge(cfg, known)?;

    let eps = cfg.per_query_epsilon();
    // q(D_know \ D_i) = q(D_know) - q(D_i) by linearity.
    let known_total = eval_query(q, known.records());
    let mut samples = Vec::with_capacity(cfg.m);
    let mut trace = Vec::with_capacity(cfg.m);

    for piece in cfg.partition() {
        let condition = Condition::new(piece.iter().copied().chain([cfg.target_id.as_str()]));
        match mechanism.issue(q, &condition, eps)? {
            IssueOutcome::Answer {
                value,
                epsilon_charged,
            } => {
                let piece_value = eval_query(q, piece.iter().filter_map(|id| known.get(id)));
                samples.push(value + (known_total - piece_value));
                trace.push(epsilon_charged);
            }
            IssueOutcome::Aborted => return Ok(HarvestOutcome::AbortDetected { samples, trace }),
        }
    }
    Ok(HarvestOutcome::Complete { samples, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    /// The t-test rejected `H₀`: the target is judged present.
    In,
    /// The t-test kept `H₀`: the target is judged absent.
    Out,
    /// The black box aborted mid-harvest. With disjoint pieces only a present
    /// target accumulates budget across queries, so this is read as present.
    InViaAbort,
}

impl Decision {
    pub fn claims_member(self) -> bool {
        !matches!(self, Decision::Out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub decision: Decision,
    pub t_test: Option<TTestResult>,
    pub samples: Vec<f64>,
    /// Sum of the budgets charged to the attacker's answered queries.
    pub attacker_budget: f64,
    /// The mechanism's own (per-record maximum) total after the harvest.
    pub mechanism_budget: f64,
    /// Set when every sample was identical and the test could not run.
    pub degenerate_sample: bool,
}

/// Harvests samples and decides whether `cfg.target_id` is in the protected dataset.
pub fn attack(
    mechanism: &mut Mechanism,
    q: LinearQuery,
    cfg: &AttackConfig,
    known: &Dataset,
) -> Result<Verdict> {
    if cfg.m < 2 {
        return Err(Error::Config(format!(
            "the t-test needs m >= 2, got {}",
            cfg.m
        )));
    }
    let harvest = harvest_samples(mechanism, q, cfg, known)?;
    let attacker_budget = attacker_view_consumed(harvest.trace());
    let mechanism_budget = mechanism.total_consumed();

    let (samples, aborted) = match harvest {
        HarvestOutcome::Complete { samples, .. } => (samples, false),
        HarvestOutcome::AbortDetected { samples, .. } => (samples, true),
    };
    if aborted {
        return Ok(Verdict {
            decision: Decision::InViaAbort,
            t_test: None,
            samples,
            attacker_budget,
            mechanism_budget,
            degenerate_sample: false,
        });
    }

    let mu0 = eval_query(q, known.records());
    let (decision, t_test, degenerate_sample) =
        match one_sample_t_test_with(&samples, mu0, cfg.alpha, cfg.divisor) {
            Ok(t) if t.reject_null => (Decision::In, Some(t), false),
            Ok(t) => (Decision::Out, Some(t), false),
            Err(Error::DegenerateSample) => (Decision::Out, None, true),
            Err(e) => return Err(e),
        };
    Ok(Verdict {
        decision,
        t_test,
        samples,
        attacker_budget,
        mechanism_budget,
        degenerate_sample,
    })
}

/// The four situations an attacker can face, by background knowledge and membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    InsufficientAbsent,
    InsufficientPresent,
    SufficientAbsent,
    SufficientPresent,
}

impl Case {
    pub fn number(self) -> u8 {
        match self {
            Case::InsufficientAbsent => 1,
            Case::InsufficientPresent => 2,
            Case::SufficientAbsent => 3,
            Case::SufficientPresent => 4,
        }
    }
}

pub fn classify_case(enough_background: bool, x_in_d: bool) -> Case {
    match (enough_background, x_in_d) {
        (false, false) => Case::InsufficientAbsent,
        (false, true) => Case::InsufficientPresent,
        (true, false) => Case::SufficientAbsent,
        (true, true) => Case::SufficientPresent,
    }
}
