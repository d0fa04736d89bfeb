//! Applying a sharing rule: the post-award distribution and how its HHI moves
//! against the baseline.

use serde::Serialize;

use crate::index::hhi;
use crate::model::{BudgetDistribution, Endowment, ModelError, SharingRule};

/// Absolute scale of the neutral band around a zero HHI change. A delta with
/// `|delta| <= NEUTRAL_TOL * max(1, H(X))` counts as neutral, which keeps
/// exact break-even awards deterministic.
pub const NEUTRAL_TOL: f64 = 1e-12;

/// A distribution together with the rule and endowment that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostAwardDistribution {
    base: BudgetDistribution,
    rule: SharingRule,
    endowment: Endowment,
    awarded: BudgetDistribution,
}

impl PostAwardDistribution {
    pub fn base(&self) -> &BudgetDistribution {
        &self.base
    }

    /// The validated (canonicalized) rule that was applied.
    pub fn rule(&self) -> &SharingRule {
        &self.rule
    }

    pub fn endowment(&self) -> Endowment {
        self.endowment
    }

    /// Budgets after the award, re-canonicalized.
    pub fn awarded(&self) -> &BudgetDistribution {
        &self.awarded
    }
}

/// Adds each club's award to its budget and re-canonicalizes. Awards are
/// positional against the canonical order of `dist`: the even rule gives
/// `E/k` to each of the first k clubs, the weighted rule gives `a_i * E` to
/// the i-th, and a general rule gives its i-th amount to the i-th club.
pub fn apply(
    dist: &BudgetDistribution,
    rule: SharingRule,
    endowment: Endowment,
) -> Result<PostAwardDistribution, ModelError> {
    let rule = rule.validated(dist, endowment)?;
    let e = endowment.value();
    let award_for = |i: usize| -> f64 {
        match &rule {
            SharingRule::EvenTopK { k } => {
                if i < *k {
                    e / *k as f64
                } else {
                    0.0
                }
            }
            SharingRule::WeightedTopK { k: _, weights } => {
                weights.get(i).map_or(0.0, |w| w * e)
            }
            SharingRule::General { amounts } => amounts[i],
        }
    };
    let awarded = BudgetDistribution::canonicalize(
        dist.clubs()
            .iter()
            .enumerate()
            .map(|(i, club)| (club.label.clone(), club.budget + award_for(i))),
    )?;
    Ok(PostAwardDistribution {
        base: dist.clone(),
        rule,
        endowment,
        awarded,
    })
}

/// HHI of the post-award distribution.
pub fn post_hhi(
    dist: &BudgetDistribution,
    rule: SharingRule,
    endowment: Endowment,
) -> Result<f64, ModelError> {
    Ok(hhi(apply(dist, rule, endowment)?.awarded()))
}

/// Signed HHI change `H(post) - H(base)`. Positive hurts balance, negative
/// improves it.
pub fn delta_hhi(
    dist: &BudgetDistribution,
    rule: SharingRule,
    endowment: Endowment,
) -> Result<f64, ModelError> {
    Ok(post_hhi(dist, rule, endowment)? - hhi(dist))
}

/// Sign classification of an HHI change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BalanceEffect {
    Improves,
    Hurts,
    Neutral,
}

impl std::fmt::Display for BalanceEffect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            BalanceEffect::Improves => "improves",
            BalanceEffect::Hurts => "hurts",
            BalanceEffect::Neutral => "neutral",
        };
        f.write_str(name)
    }
}

/// Classifies a delta against the neutral band scaled by the baseline HHI.
pub fn classify_delta(delta: f64, baseline_hhi: f64) -> BalanceEffect {
    let tol = NEUTRAL_TOL * f64::max(1.0, baseline_hhi);
    if delta.abs() <= tol {
        BalanceEffect::Neutral
    } else if delta > 0.0 {
        BalanceEffect::Hurts
    } else {
        BalanceEffect::Improves
    }
}
