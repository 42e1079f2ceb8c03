//! Success rate of the attack: the closed-form power approximation and Monte
//! Carlo estimates from running the attack end to end.
//!
//! Under a balanced membership prior the attack is right with probability
//!
//! ```text
//! R = ½·(P{keep H₀ | H₀} + P{reject H₀ | H₁}) = ½·(2 − α − δ) = ½·(1.95 − δ)
//! ```
//!
//! where `δ` is the type-II error. Approximating the statistic under `H₁` by a
//! central t shifted by `T₁ = (μ₀ − μ₁)·√m / S` gives
//!
//! ```text
//! δ = ∫_{−T* + T₁}^{T* + T₁} f(t) dt,    T* = t_{0.975, m−1}
//! ```
//!
//! with `f` the Student-t density on `m − 1` degrees of freedom. For a counting
//! query `μ₀ − μ₁ = −1`, and substituting the noise deviation `√2/ε` for `S`
//! gives `T₁ = −ε·√m/√2`; with a fixed total budget `ε = ε_t/m`.

use rayon::prelude::*;
use serde::Serialize;

use crate::attack::{attack, AttackConfig, DEFAULT_ALPHA};
use crate::dataset::{Dataset, LinearQuery, Record};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::seed;
use crate::stats::{integrate, t_pdf, t_quantile, VarianceDivisor, DEFAULT_TOLERANCE};

/// Significance level baked into the closed form (`1.95 = 2 − 0.05`).
pub const THEORY_ALPHA: f64 = 0.05;

/// Lower bound on Monte Carlo trials per estimate.
pub const MIN_TRIALS: usize = 100;

/// The two error terms behind the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTerms {
    /// Type-I error; equals the significance level by construction.
    pub alpha_term: f64,
    /// Type-II error under the shifted-t approximation.
    pub delta_term: f64,
    /// Upper 0.975 quantile on `m − 1` degrees of freedom.
    pub t_star: f64,
    /// Shift `(μ₀ − μ₁)·√m / S`.
    pub t_shift: f64,
}

impl PowerTerms {
    pub fn success_rate(&self) -> f64 {
        0.5 * (2.0 - self.alpha_term - self.delta_term)
    }
}

fn check_m(m: usize) -> Result<u32> {
    if m < 2 {
        return Err(Error::invalid(
            "m",
            format!("need at least 2 samples, got {m}"),
        ));
    }
    u32::try_from(m - 1).map_err(|_| Error::invalid("m", "too large"))
}

pub fn power_terms(m: usize, mu0: f64, mu1: f64, s: f64) -> Result<PowerTerms> {
    let nu = check_m(m)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid(
            "S",
            format!("must be positive and finite, got {s}"),
        ));
    }
    if !(mu0.is_finite() && mu1.is_finite()) {
        return Err(Error::invalid("mu", "means must be finite"));
    }
    let t_star = t_quantile(1.0 - THEORY_ALPHA / 2.0, nu)?;
    let t_shift = (mu0 - mu1) * (m as f64).sqrt() / s;
    let delta_term = integrate(
        |t| t_pdf(t, nu).unwrap_or(f64::NAN),
        -t_star + t_shift,
        t_star + t_shift,
        DEFAULT_TOLERANCE,
    )?;
    Ok(PowerTerms {
        alpha_term: THEORY_ALPHA,
        delta_term,
        t_star,
        t_shift,
    })
}

/// Closed-form success rate for null mean `mu0`, true mean `mu1` and deviation `s`.
pub fn success_rate_exact(m: usize, mu0: f64, mu1: f64, s: f64) -> Result<f64> {
    Ok(power_terms(m, mu0, mu1, s)?.success_rate())
}

/// Counting query with budget `eps` on every one of the `m` queries.
pub fn success_rate_per_query(m: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(
            "epsilon",
            format!("must be positive and finite, got {eps}"),
        ));
    }
    success_rate_exact(m, 0.0, 1.0, std::f64::consts::SQRT_2 / eps)
}

/// Counting query with total budget `eps_total` split evenly over `m` queries.
pub fn success_rate_total(m: usize, eps_total: f64) -> Result<f64> {
    if !(eps_total > 0.0 && eps_total.is_finite()) {
        return Err(Error::invalid(
            "eps_total",
            format!("must be positive and finite, got {eps_total}"),
        ));
    }
    success_rate_per_query(m, eps_total / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RateMode {
    /// Raw parameters of the power formula.
    Exact { mu0: f64, mu1: f64, s: f64 },
    /// Counting query, fixed budget per query.
    PerQuery { eps: f64 },
    /// Counting query, fixed total budget.
    Total { eps_total: f64 },
}

/// One evaluation point of the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSpec {
    pub m: usize,
    pub mode: RateMode,
}

impl RateSpec {
    pub fn evaluate(&self) -> Result<f64> {
        match self.mode {
            RateMode::Exact { mu0, mu1, s } => success_rate_exact(self.m, mu0, mu1, s),
            RateMode::PerQuery { eps } => success_rate_per_query(self.m, eps),
            RateMode::Total { eps_total } => success_rate_total(self.m, eps_total),
        }
    }
}

/// Monte Carlo set-up for a counting-query attack with `m` singleton pieces and
/// a black box that never aborts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalConfig {
    pub m: usize,
    pub eps_total: f64,
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
    pub divisor: VarianceDivisor,
}

impl EmpiricalConfig {
    pub fn new(m: usize, eps_total: f64, trials: usize, seed: u64) -> Self {
        EmpiricalConfig {
            m,
            eps_total,
            trials,
            seed,
            alpha: DEFAULT_ALPHA,
            divisor: VarianceDivisor::default(),
        }
    }

    pub fn with_divisor(mut self, divisor: VarianceDivisor) -> Self {
        self.divisor = divisor;
        self
    }

    fn attack_config(&self) -> AttackConfig {
        AttackConfig::new(self.m, self.eps_total, TARGET_ID, known_ids(self.m))
            .with_alpha(self.alpha)
            .with_divisor(self.divisor)
    }

    /// Runs trials `first..first + count` with the target present or absent and
    /// returns how many ended in a membership claim.
    ///
    /// Trial `i` always draws its noise from `seed::derive(self.seed, i)`.
    pub fn membership_claims(&self, present: bool, first: usize, count: usize) -> Result<usize> {
        let cfg = self.attack_config();
        cfg.validate()?;
        let known = Dataset::from_ids(cfg.known_ids.iter().cloned());
        let mut protected = known.clone();
        if present {
            protected.insert(Record::unit(TARGET_ID))?;
        }
        let claims = (first..first + count)
            .into_par_iter()
            .map(|i| {
                let mut mech = Mechanism::new(
                    protected.clone(),
                    f64::INFINITY,
                    seed::derive(self.seed, i as u64),
                )?;
                let v = attack(&mut mech, LinearQuery::Count, &cfg, &known)?;
                Ok(v.decision.claims_member())
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(claims.into_iter().filter(|&c| c).count())
    }

    pub fn run(&self) -> Result<EmpiricalRate> {
        if self.trials < MIN_TRIALS || !self.trials.is_multiple_of(2) {
            return Err(Error::invalid(
                "trials",
                format!(
                    "need an even count of at least {MIN_TRIALS}, got {}",
                    self.trials
                ),
            ));
        }
        let half = self.trials / 2;
        let true_positives = self.membership_claims(true, 0, half)?;
        let false_positives = self.membership_claims(false, half, half)?;
        let correct = true_positives + (half - false_positives);
        let rate = correct as f64 / self.trials as f64;
        Ok(EmpiricalRate {
            rate,
            stderr: (rate * (1.0 - rate) / self.trials as f64).sqrt(),
            trials: self.trials,
            correct,
            true_positives,
            false_positives,
        })
    }
}

const TARGET_ID: &str = "target";

fn known_ids(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("known-{i}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalRate {
    /// Fraction of correct verdicts over both halves.
    pub rate: f64,
    pub stderr: f64,
    pub trials: usize,
    pub correct: usize,
    /// Membership claims among the `trials / 2` runs with the target present.
    pub true_positives: usize,
    /// Membership claims among the `trials / 2` runs with the target absent.
    pub false_positives: usize,
}

/// Fraction of correct verdicts over `trials` attacks, half with the target present.
pub fn empirical_success_rate(
    m: usize,
    eps_total: f64,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalRate> {
    EmpiricalConfig::new(m, eps_total, trials, seed).run()
}

/// Which budget is held fixed along a grid row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridMode {
    /// Total budget `ε_t` fixed; each query gets `ε_t / m`.
    FixedTotal,
    /// Per-query budget `ε` fixed; the total grows as `m·ε`.
    FixedPerQuery,
}

impl GridMode {
    pub fn label(self) -> &'static str {
        match self {
            GridMode::FixedTotal => "fig3",
            GridMode::FixedPerQuery => "fig4",
        }
    }
}

/// One `(m, budget)` cell of a theory-versus-experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub mode: GridMode,
    pub m: usize,
    /// `ε_t` for [`GridMode::FixedTotal`], `ε` for [`GridMode::FixedPerQuery`].
    pub budget: f64,
    pub r_theory: f64,
    pub r_empirical: f64,
    pub stderr: f64,
    pub trials: usize,
    /// Seed of this cell's Monte Carlo run; replays it via [`empirical_success_rate`].
    pub seed: u64,
}

impl ExperimentRow {
    pub fn compute(
        mode: GridMode,
        m: usize,
        budget: f64,
        trials: usize,
        seed: u64,
        divisor: VarianceDivisor,
    ) -> Result<Self> {
        let (r_theory, eps_total) = match mode {
            GridMode::FixedTotal => (success_rate_total(m, budget)?, budget),
            GridMode::FixedPerQuery => (success_rate_per_query(m, budget)?, budget * m as f64),
        };
        let emp = EmpiricalConfig::new(m, eps_total, trials, seed)
            .with_divisor(divisor)
            .run()?;
        Ok(ExperimentRow {
            mode,
            m,
            budget,
            r_theory,
            r_empirical: emp.rate,
            stderr: emp.stderr,
            trials,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::t_cdf;

    #[test]
    fn coincident_means_are_a_coin_flip() {
        let r = success_rate_exact(10, 3.0, 3.0, 1.7).unwrap();
        assert!((r - 0.5).abs() < 1e-9);
        let p = power_terms(10, 3.0, 3.0, 1.7).unwrap();
        assert!((p.delta_term - 0.95).abs() < 1e-9);
    }

    #[test]
    fn huge_shift_hits_ceiling() {
        let r = success_rate_exact(10, 0.0, 1.0, 1e-4).unwrap();
        assert!((r - 0.975).abs() < 1e-9);
    }

    #[test]
    fn delta_at_shift_equal_to_quantile() {
        for m in [3usize, 10, 29] {
            let nu = (m - 1) as u32;
            let t_star = t_quantile(0.975, nu).unwrap();
            // Choose S so that T₁ = T*.
            let s = (m as f64).sqrt() / t_star;
            let p = power_terms(m, 1.0, 0.0, s).unwrap();
            assert!((p.t_shift - t_star).abs() < 1e-12);
            let oracle = t_cdf(2.0 * t_star, nu).unwrap() - 0.5;
            assert!((p.delta_term - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn composition_identity() {
        for &(m, mu0, mu1, s) in &[(4, 0.0, 1.0, 2.0), (17, 2.0, 2.5, 0.3), (29, 5.0, 4.0, 9.0)] {
            let p = power_terms(m, mu0, mu1, s).unwrap();
            assert_eq!(p.alpha_term, 0.05);
            let r = success_rate_exact(m, mu0, mu1, s).unwrap();
            assert!((0.5 * (1.95 - p.delta_term) - r).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_budget_is_a_coin_flip() {
        assert!((success_rate_per_query(10, 1e-9).unwrap() - 0.5).abs() < 1e-8);
        assert!((success_rate_total(10, 1e-9).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn per_query_budget_and_sample_count_help() {
        let strong = success_rate_per_query(10, 1.0).unwrap();
        let weak = success_rate_per_query(10, 0.1).unwrap();
        assert!(strong > 0.5 && strong < 0.975);
        assert!(strong > weak);
        assert!(
            success_rate_per_query(29, 0.33).unwrap() > success_rate_per_query(4, 0.33).unwrap()
        );
    }

    #[test]
    fn fixed_total_prefers_fewer_samples() {
        assert!(success_rate_total(4, 1.0).unwrap() > success_rate_total(29, 1.0).unwrap());
        assert_eq!(
            success_rate_total(10, 10.0).unwrap(),
            success_rate_per_query(10, 1.0).unwrap()
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(success_rate_exact(10, 0.0, 1.0, 0.0).is_err());
        assert!(success_rate_exact(1, 0.0, 1.0, 1.0).is_err());
        assert!(success_rate_per_query(10, 0.0).is_err());
        assert!(success_rate_total(10, -1.0).is_err());
        assert!(empirical_success_rate(10, 1.0, 99, 0).is_err());
        assert!(empirical_success_rate(10, 1.0, 101, 0).is_err());
    }

    #[test]
    fn rate_spec_dispatch() {
        let a = RateSpec {
            m: 10,
            mode: RateMode::Total { eps_total: 10.0 },
        }
        .evaluate()
        .unwrap();
        let b = RateSpec {
            m: 10,
            mode: RateMode::PerQuery { eps: 1.0 },
        }
        .evaluate()
        .unwrap();
        let c = RateSpec {
            m: 10,
            mode: RateMode::Exact {
                mu0: 0.0,
                mu1: 1.0,
                s: std::f64::consts::SQRT_2,
            },
        }
        .evaluate()
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn range_over_grid() {
        for m in 4..=29 {
            for eps in [0.01, 0.05, 0.1, 0.33, 1.0, 3.0] {
                let r = success_rate_per_query(m, eps).unwrap();
                assert!(
                    (0.5 - 1e-9..=0.975 + 1e-9).contains(&r),
                    "m={m} eps={eps}: {r}"
                );
            }
        }
    }

    #[test]
    fn monotone_in_m() {
        for eps in [0.05, 0.1, 0.33] {
            let rs: Vec<f64> = (4..=29)
                .map(|m| success_rate_per_query(m, eps).unwrap())
                .collect();
            assert!(rs.windows(2).all(|w| w[1] >= w[0]), "eps={eps}");
        }
    }

    #[test]
    fn fixed_total_rises_then_falls() {
        // The shrinking critical value outweighs the shrinking shift for the
        // first few m, so the curve peaks before it starts to decline.
        for (eps_t, peak) in [(1.0, 7), (5.0, 6), (10.0, 5)] {
            let rs: Vec<f64> = (4..=29)
                .map(|m| success_rate_total(m, eps_t).unwrap())
                .collect();
            let argmax = 4 + rs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            assert_eq!(argmax, peak, "eps_t={eps_t}");
            assert!(
                rs[peak - 4..].windows(2).all(|w| w[1] <= w[0]),
                "eps_t={eps_t}"
            );
        }
    }

    #[test]
    fn no_signal_floor() {
        let e = empirical_success_rate(10, 0.001, 4000, 3).unwrap();
        assert!(
            (e.rate - 0.5).abs() <= 3.0 * e.stderr.max(0.5 / 4000f64.sqrt()),
            "{e:?}"
        );
    }

    #[test]
    fn empirical_is_deterministic() {
        let a = empirical_success_rate(6, 3.0, 200, 77).unwrap();
        let b = empirical_success_rate(6, 3.0, 200, 77).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| empirical_success_rate(6, 3.0, 200, 77).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn near_ceiling_with_generous_budget() {
        let theory = success_rate_total(20, 20.0).unwrap();
        let e = empirical_success_rate(20, 20.0, 4000, 5).unwrap();
        assert!(theory > 0.85);
        assert!(e.rate > 0.85, "{e:?}");
    }
}
