//! Text rendering for the CLI commands: plain tables for humans, CSV for
//! pipelines, JSON via serde for everything else.
//!
//! HHI levels print on the 10000-point scale with one decimal; deltas print
//! raw unless the caller asked for points. The sweep CSV schema is fixed
//! (`E,hhi_points,band,delta` with raw deltas and shortest-round-trip floats)
//! so downstream plots and re-runs are bit-stable.

use std::fmt::Write as _;

use prizebalance::analysis::{HhiMinimum, ImprovementRegime, SweepResult, ThresholdReport};
use prizebalance::index::{ConcentrationReport, POINTS_SCALE};
use prizebalance::model::BudgetDistribution;
use prizebalance::oracle::VerificationSummary;
use prizebalance::rules::{BalanceEffect, PostAwardDistribution};

/// Compact number for human tables: up to four decimals, trailing zeros
/// trimmed.
fn num(value: f64) -> String {
    let mut s = format!("{value:.4}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn delta_cell(delta: f64, points: bool) -> String {
    if points {
        format!("{:.2} points", delta * POINTS_SCALE)
    } else {
        num(delta)
    }
}

pub fn index_table(dist: &BudgetDistribution, report: &ConcentrationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "clubs {}, total budget {}", dist.n(), num(dist.total()));
    let _ = writeln!(out, "HHI {:.1}, {}", report.hhi_points, report.band);
    if let Some(cr) = &report.cr {
        let _ = writeln!(out, "CR({}) {:.4}", cr.m, cr.value);
    }
    out
}

pub fn index_csv(report: &ConcentrationReport) -> String {
    let (m, value) = report
        .cr
        .as_ref()
        .map_or((String::new(), String::new()), |cr| {
            (cr.m.to_string(), cr.value.to_string())
        });
    format!(
        "hhi_raw,hhi_points,band,cr_m,cr_value\n{},{},{},{},{}\n",
        report.hhi_raw, report.hhi_points, report.band, m, value
    )
}

fn rule_name(post: &PostAwardDistribution) -> String {
    match post.rule() {
        prizebalance::SharingRule::EvenTopK { k } => format!("even top-{k}"),
        prizebalance::SharingRule::WeightedTopK { k, weights } => {
            let ws: Vec<String> = weights.iter().map(|w| num(*w)).collect();
            format!("weighted top-{k} ({})", ws.join(", "))
        }
        prizebalance::SharingRule::General { .. } => "general amounts".to_string(),
    }
}

pub fn apply_table(
    post: &PostAwardDistribution,
    baseline: &ConcentrationReport,
    after: &ConcentrationReport,
    delta: f64,
    effect: BalanceEffect,
    points: bool,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "rule {}, endowment {}",
        rule_name(post),
        num(post.endowment().value())
    );
    let width = post
        .base()
        .clubs()
        .iter()
        .map(|c| c.label.len())
        .max()
        .unwrap_or(4)
        .max(4);
    let _ = writeln!(out, "{:width$}  {:>12}  {:>12}", "club", "before", "after");
    for club in post.awarded().clubs() {
        let before = post
            .base()
            .clubs()
            .iter()
            .find(|c| c.label == club.label)
            .map(|c| c.budget)
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{:width$}  {:>12}  {:>12}",
            club.label,
            num(before),
            num(club.budget)
        );
    }
    let _ = writeln!(
        out,
        "baseline HHI {:.1} ({}), post-award HHI {:.1} ({})",
        baseline.hhi_points, baseline.band, after.hhi_points, after.band
    );
    let _ = writeln!(out, "delta {} ({effect})", delta_cell(delta, points));
    out
}

pub fn apply_csv(post: &PostAwardDistribution) -> String {
    let mut out = String::from("club,before,after\n");
    for club in post.awarded().clubs() {
        let before = post
            .base()
            .clubs()
            .iter()
            .find(|c| c.label == club.label)
            .map(|c| c.budget)
            .unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", club.label, before, club.budget);
    }
    out
}

pub fn thresholds_table(report: &ThresholdReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "endowment {}", num(report.endowment));
    let _ = writeln!(out, "smallest improving k: {}", report.min_improving_k);
    let _ = writeln!(
        out,
        "{:>3}  {:<10}  {:>14}  {:>16}",
        "k", "regime", "break-even E", "HHI-minimizing E"
    );
    for (classification, (_, minimum)) in
        report.classifications.iter().zip(&report.hhi_minima)
    {
        let (regime, break_even) = match classification.regime {
            ImprovementRegime::AlwaysImproves => ("always", "-".to_string()),
            ImprovementRegime::NeverImproves => ("never", "-".to_string()),
            ImprovementRegime::ThresholdAt(v) => ("threshold", num(v)),
        };
        let minimum = match minimum {
            HhiMinimum::At(v) => num(*v),
            HhiMinimum::AlwaysFalling => "always falling".to_string(),
        };
        let _ = writeln!(
            out,
            "{:>3}  {:<10}  {:>14}  {:>16}",
            classification.k, regime, break_even, minimum
        );
    }
    out
}

pub fn thresholds_csv(report: &ThresholdReport) -> String {
    let mut out = String::from("k,regime,break_even,hhi_min\n");
    for (classification, (_, minimum)) in
        report.classifications.iter().zip(&report.hhi_minima)
    {
        let (regime, break_even) = match classification.regime {
            ImprovementRegime::AlwaysImproves => ("always", String::new()),
            ImprovementRegime::NeverImproves => ("never", String::new()),
            ImprovementRegime::ThresholdAt(v) => ("threshold", v.to_string()),
        };
        let minimum = match minimum {
            HhiMinimum::At(v) => v.to_string(),
            HhiMinimum::AlwaysFalling => String::new(),
        };
        let _ = writeln!(out, "{},{},{},{}", classification.k, regime, break_even, minimum);
    }
    out
}

/// The pinned sweep schema. Floats use the shortest representation that
/// round-trips, so identical inputs and flags reproduce identical bytes.
pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::from("E,hhi_points,band,delta\n");
    for row in &sweep.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.endowment, row.hhi_points, row.band, row.delta
        );
    }
    out
}

pub fn sweep_table(sweep: &SweepResult, points: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "even top-{}, baseline HHI {:.1}",
        sweep.k,
        sweep.baseline_hhi * POINTS_SCALE
    );
    let _ = writeln!(
        out,
        "{:>14}  {:>10}  {:<14}  {:>16}",
        "E", "hhi_points", "band", "delta"
    );
    for row in &sweep.rows {
        let _ = writeln!(
            out,
            "{:>14}  {:>10.1}  {:<14}  {:>16}",
            num(row.endowment),
            row.hhi_points,
            row.band.to_string(),
            delta_cell(row.delta, points)
        );
    }
    out
}

pub fn verify_table(summary: &VerificationSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "seed {}, {} instances requested",
        summary.seed, summary.instances
    );
    for (i, property) in summary.properties.iter().enumerate() {
        let verdict = if property.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "[{}] {:<68} {}  checked {:>6}  max deviation {:.3e}",
            i + 1,
            property.name,
            verdict,
            property.checked,
            property.max_deviation
        );
        if let Some(worst) = &property.worst {
            let _ = writeln!(out, "    offending instance: {worst}");
        }
    }
    let _ = writeln!(
        out,
        "{} properties, {} instances, {} failures",
        summary.properties.len(),
        summary.instances,
        summary.total_failures()
    );
    out
}
