//! Experiment drivers behind the `laplace-mia` binary: theory-versus-Monte-Carlo
//! grids written as CSV and SVG, and single attacks on a dataset file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{ExperimentRow, GridMode, MIN_TRIALS};
use crate::attack::{attack, classify_case, AttackConfig, Case, Decision, Verdict};
use crate::dataset::{Dataset, LinearQuery};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::seed;
use crate::stats::VarianceDivisor;

pub const CSV_HEADER: &str = "mode,m,budget,R_theory,R_empirical,stderr,trials,seed";

pub const MAX_M: usize = 10_000;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_M_RANGE: (usize, usize) = (4, 29);
pub const DEFAULT_STEPS: usize = 10;

pub const EXIT_OUT: i32 = 0;
pub const EXIT_IN: i32 = 1;
pub const EXIT_IN_VIA_ABORT: i32 = 2;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_DATA: i32 = 65;

/// Exit status for a failed run.
pub fn error_exit_code(e: &Error) -> i32 {
    if e.is_data_format() {
        EXIT_DATA
    } else {
        EXIT_CONFIG
    }
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
pub fn budget_range(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::invalid("budget-steps", "must be at least 1"));
    }
    if !(min > 0.0 && max >= min && max.is_finite()) {
        return Err(Error::invalid(
            "budget range",
            format!("need 0 < min <= max, got [{min}, {max}]"),
        ));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                min + step * i as f64
            }
        })
        .collect())
}

/// A grid of `(budget, m)` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub budgets: Vec<f64>,
    pub m_min: usize,
    pub m_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub divisor: VarianceDivisor,
}

impl ExperimentSpec {
    pub fn new(budgets: Vec<f64>, trials: usize, seed: u64) -> Self {
        ExperimentSpec {
            budgets,
            m_min: DEFAULT_M_RANGE.0,
            m_max: DEFAULT_M_RANGE.1,
            trials,
            seed,
            divisor: VarianceDivisor::default(),
        }
    }

    pub fn with_m_range(mut self, m_min: usize, m_max: usize) -> Self {
        self.m_min = m_min;
        self.m_max = m_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2 <= self.m_min && self.m_min <= self.m_max && self.m_max <= MAX_M) {
            return Err(Error::Config(format!(
                "m range must satisfy 2 <= min <= max <= {MAX_M}, got {}..={}",
                self.m_min, self.m_max
            )));
        }
        if self.budgets.is_empty() {
            return Err(Error::Config("no budget values".into()));
        }
        if let Some(b) = self.budgets.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::Config(format!(
                "budget values must be positive, got {b}"
            )));
        }
        if self.trials < MIN_TRIALS || !self.trials.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "trials must be even and at least {MIN_TRIALS}, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

/// Every cell of the grid, budgets outermost. Cell `k` runs its trials from
/// `seed::derive(spec.seed, k)`.
pub fn run_grid(mode: GridMode, spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.budgets.len() * (spec.m_max - spec.m_min + 1));
    for &budget in &spec.budgets {
        for m in spec.m_min..=spec.m_max {
            let cell_seed = seed::derive(spec.seed, rows.len() as u64);
            rows.push(ExperimentRow::compute(
                mode,
                m,
                budget,
                spec.trials,
                cell_seed,
                spec.divisor,
            )?);
        }
    }
    Ok(rows)
}

/// Fixed total budget per row (`budgets` are `ε_t`).
pub fn run_fig3(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    run_grid(GridMode::FixedTotal, spec)
}

/// Fixed per-query budget per row (`budgets` are `ε`).
pub fn run_fig4(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    run_grid(GridMode::FixedPerQuery, spec)
}

/// `x` to `digits` significant digits in plain decimal notation.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn format_budget(x: f64) -> String {
    let s = format_significant(x, 6);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

pub fn to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.mode.label(),
            r.m,
            format_budget(r.budget),
            format_significant(r.r_theory, 6),
            format_significant(r.r_empirical, 6),
            format_significant(r.stderr, 6),
            r.trials,
            r.seed
        );
    }
    out
}

pub fn write_csv(rows: &[ExperimentRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_csv(rows)).map_err(|e| Error::io(path, e))
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 600.0;
const Y_MIN: f64 = 0.4;
const Y_MAX: f64 = 1.0;
const PLOT_LEFT: f64 = 70.0;
const PLOT_RIGHT: f64 = 640.0;
const PLOT_TOP: f64 = 50.0;
const PLOT_BOTTOM: f64 = 540.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Line chart of success rate against `m`: one colour per budget, theory solid,
/// Monte Carlo dashed.
pub fn render_svg(rows: &[ExperimentRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("cannot chart an empty grid".into()));
    }
    let mut series: Vec<(f64, Vec<&ExperimentRow>)> = Vec::new();
    for r in rows {
        match series
            .iter_mut()
            .find(|(b, _)| b.to_bits() == r.budget.to_bits())
        {
            Some((_, v)) => v.push(r),
            None => series.push((r.budget, vec![r])),
        }
    }
    let m_lo = rows.iter().map(|r| r.m).min().unwrap_or(0) as f64;
    let m_hi = rows.iter().map(|r| r.m).max().unwrap_or(0) as f64;
    let (x_lo, x_hi) = if m_hi > m_lo {
        (m_lo, m_hi)
    } else {
        (m_lo - 1.0, m_hi + 1.0)
    };

    let sx = |m: f64| PLOT_LEFT + (m - x_lo) / (x_hi - x_lo) * (PLOT_RIGHT - PLOT_LEFT);
    let sy = |r: f64| {
        let r = r.clamp(Y_MIN, Y_MAX);
        PLOT_BOTTOM - (r - Y_MIN) / (Y_MAX - Y_MIN) * (PLOT_BOTTOM - PLOT_TOP)
    };

    let mode = rows[0].mode;
    let budget_name = match mode {
        GridMode::FixedTotal => "ε_t",
        GridMode::FixedPerQuery => "ε",
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let title = match mode {
        GridMode::FixedTotal => "Success rate, fixed total budget",
        GridMode::FixedPerQuery => "Success rate, fixed per-query budget",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{title}</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0
    );

    // Axes and grid.
    let _ = writeln!(
        svg,
        r#"<path d="M{PLOT_LEFT} {PLOT_TOP} V{PLOT_BOTTOM} H{PLOT_RIGHT}" fill="none" stroke="black"/>"#
    );
    for i in 0..=6 {
        let r = Y_MIN + 0.1 * i as f64;
        let y = sy(r);
        let _ = writeln!(
            svg,
            r##"<line x1="{PLOT_LEFT}" y1="{y:.2}" x2="{PLOT_RIGHT}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{}" y="{:.2}" text-anchor="end">{r:.1}</text>"##,
            PLOT_LEFT - 6.0,
            y + 4.0
        );
    }
    let span = (x_hi - x_lo).max(1.0) as usize;
    let step = span.div_ceil(12).max(1);
    let mut m = x_lo.ceil() as usize;
    while m as f64 <= x_hi {
        let x = sx(m as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{PLOT_BOTTOM}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{m}</text>"#,
            PLOT_BOTTOM + 5.0,
            PLOT_BOTTOM + 20.0
        );
        m += step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">number of samples m</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        PLOT_BOTTOM + 45.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">success rate R</text>"#,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0
    );

    for (i, (budget, points)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let line = |value: fn(&ExperimentRow) -> f64| {
            points
                .iter()
                .map(|r| format!("{:.2},{:.2}", sx(r.m as f64), sy(value(r))))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            svg,
            r#"<polyline class="theory" points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            line(|r| r.r_theory)
        );
        let _ = writeln!(
            svg,
            r#"<polyline class="empirical" points="{}" fill="none" stroke="{colour}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
            line(|r| r.r_empirical)
        );
        let y = PLOT_TOP + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{budget_name} = {}</text>"#,
            PLOT_RIGHT + 15.0,
            PLOT_RIGHT + 40.0,
            PLOT_RIGHT + 46.0,
            y + 4.0,
            format_budget(*budget)
        );
    }
    let y = PLOT_TOP + 18.0 * series.len() as f64 + 10.0;
    let _ = writeln!(
        svg,
        r##"<text x="{}" y="{y}" fill="#555">solid: theory</text><text x="{}" y="{}" fill="#555">dashed: Monte Carlo</text>"##,
        PLOT_RIGHT + 15.0,
        PLOT_RIGHT + 15.0,
        y + 16.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_svg(rows: &[ExperimentRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(rows)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Settings for one attack against a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleAttackSpec {
    pub dataset_path: PathBuf,
    pub target_id: String,
    pub known_ids: Vec<String>,
    pub m: usize,
    pub eps_total: f64,
    pub alpha: f64,
    pub abort_threshold: f64,
    pub seed: u64,
    pub divisor: VarianceDivisor,
    pub query: LinearQuery,
    /// Required for sum queries.
    pub value_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub target_id: String,
    pub target_present: bool,
    pub case: Case,
    pub m: usize,
    pub eps_total: f64,
    pub per_query_eps: f64,
    pub seed: u64,
    pub verdict: Verdict,
}

impl AttackReport {
    pub fn exit_code(&self) -> i32 {
        match self.verdict.decision {
            Decision::Out => EXIT_OUT,
            Decision::In => EXIT_IN,
            Decision::InViaAbort => EXIT_IN_VIA_ABORT,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "target": self.target_id,
            "decision": self.verdict.decision,
            "t_stat": self.verdict.t_test.map(|t| t.t_stat),
            "p_value": self.verdict.t_test.map(|t| t.p_value),
            "df": self.verdict.t_test.map(|t| t.df),
            "samples": self.verdict.samples,
            "attacker_budget": self.verdict.attacker_budget,
            "mechanism_budget": self.verdict.mechanism_budget,
            "degenerate_sample": self.verdict.degenerate_sample,
            "case": self.case.number(),
            "target_present": self.target_present,
            "m": self.m,
            "eps_total": self.eps_total,
            "per_query_eps": self.per_query_eps,
            "seed": self.seed,
        })
        .to_string()
    }

    pub fn human(&self) -> String {
        let v = &self.verdict;
        let mut s = String::new();
        let decision = match v.decision {
            Decision::In => "IN (t-test rejected H0)",
            Decision::Out => "OUT (t-test kept H0)",
            Decision::InViaAbort => "IN (black box aborted)",
        };
        let _ = writeln!(s, "target:            {}", self.target_id);
        let _ = writeln!(s, "verdict:           {decision}");
        match v.t_test {
            Some(t) => {
                let _ = writeln!(s, "T statistic:       {:.6} (df = {})", t.t_stat, t.df);
                let _ = writeln!(s, "p-value:           {:.6}", t.p_value);
            }
            None if v.degenerate_sample => {
                let _ = writeln!(s, "T statistic:       undefined (identical samples)");
            }
            None => {}
        }
        let samples: Vec<String> = v.samples.iter().map(|x| format!("{x:.4}")).collect();
        let _ = writeln!(
            s,
            "samples ({:>3}):     [{}]",
            v.samples.len(),
            samples.join(", ")
        );
        let _ = writeln!(
            s,
            "budget, attacker:  {:.6} ({} queries at {:.6})",
            v.attacker_budget, self.m, self.per_query_eps
        );
        let _ = writeln!(s, "budget, mechanism: {:.6}", v.mechanism_budget);
        let _ = writeln!(
            s,
            "case:              {} (target {} the dataset)",
            self.case.number(),
            if self.target_present { "in" } else { "not in" }
        );
        s
    }
}

pub fn run_single_attack(spec: &SingleAttackSpec) -> Result<AttackReport> {
    let dataset = Dataset::load_jsonl(&spec.dataset_path, spec.value_bound)?;
    if let Some(missing) = spec.known_ids.iter().find(|id| !dataset.contains(id)) {
        return Err(Error::Config(format!(
            "known id `{missing}` is not in {}",
            spec.dataset_path.display()
        )));
    }
    let cfg = AttackConfig::new(
        spec.m,
        spec.eps_total,
        spec.target_id.clone(),
        spec.known_ids.clone(),
    )
    .with_alpha(spec.alpha)
    .with_divisor(spec.divisor);
    cfg.validate()?;
    let known = dataset.subset(spec.known_ids.iter().map(String::as_str));
    let target_present = dataset.contains(&spec.target_id);
    let case = classify_case(spec.known_ids.len() >= spec.m, target_present);

    let mut mechanism = Mechanism::new(dataset, spec.abort_threshold, spec.seed)?;
    let verdict = attack(&mut mechanism, spec.query, &cfg, &known)?;
    Ok(AttackReport {
        target_id: spec.target_id.clone(),
        target_present,
        case,
        m: spec.m,
        eps_total: spec.eps_total,
        per_query_eps: cfg.per_query_epsilon(),
        seed: spec.seed,
        verdict,
    })
}
