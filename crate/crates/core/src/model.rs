//! Domain types: league budget distributions, prize endowments, and sharing
//! rules.
//!
//! A [`BudgetDistribution`] is always held in canonical order (budgets
//! nonincreasing, ties keeping input order) and every budget is finite and
//! strictly positive. The constructor is the only way in, so downstream code
//! can rely on those invariants without re-checking.

use serde::Serialize;
use thiserror::Error;

/// Relative tolerance used when checking that weights or explicit amounts sum
/// to their target.
pub const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("a league needs at least two clubs, got {0}")]
    EmptyOrSingleton(usize),
    #[error("club {label:?} has a nonpositive budget ({budget})")]
    NonpositiveBudget { label: String, budget: f64 },
    #[error("club {label:?} has a nonfinite budget")]
    NonfiniteBudget { label: String },
    #[error("endowment must be finite and nonnegative, got {0}")]
    InvalidEndowment(f64),
    #[error("k = {k} is out of range for a league of {n} clubs")]
    KOutOfRange { k: usize, n: usize },
    #[error("top-k weights must be positive and nonincreasing")]
    WeightsNotMonotone,
    #[error("top-k weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("allocation amounts invalid: {reason}")]
    AmountsMismatch { reason: String },
}

/// One club: a label and a strictly positive budget. Budgets are
/// unit-agnostic; the conventional unit is millions EUR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Club {
    pub label: String,
    pub budget: f64,
}

/// The league state: club budgets sorted nonincreasing (stable on ties).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetDistribution {
    clubs: Vec<Club>,
}

impl BudgetDistribution {
    /// Builds a distribution from raw `(label, budget)` entries, validating
    /// and sorting into canonical order.
    pub fn canonicalize<L, I>(entries: I) -> Result<Self, ModelError>
    where
        L: Into<String>,
        I: IntoIterator<Item = (L, f64)>,
    {
        let mut clubs: Vec<Club> = entries
            .into_iter()
            .map(|(label, budget)| Club {
                label: label.into(),
                budget,
            })
            .collect();
        if clubs.len() < 2 {
            return Err(ModelError::EmptyOrSingleton(clubs.len()));
        }
        for club in &clubs {
            if !club.budget.is_finite() {
                return Err(ModelError::NonfiniteBudget {
                    label: club.label.clone(),
                });
            }
            if club.budget <= 0.0 {
                return Err(ModelError::NonpositiveBudget {
                    label: club.label.clone(),
                    budget: club.budget,
                });
            }
        }
        // Vec::sort_by is stable, so equal budgets keep their input order.
        clubs.sort_by(|a, b| b.budget.partial_cmp(&a.budget).expect("budgets are finite"));
        Ok(Self { clubs })
    }

    /// Convenience constructor for unlabeled budget vectors; labels become
    /// `club01`, `club02`, ... in input order.
    pub fn from_budgets(budgets: &[f64]) -> Result<Self, ModelError> {
        Self::canonicalize(
            budgets
                .iter()
                .enumerate()
                .map(|(i, &b)| (format!("club{:02}", i + 1), b)),
        )
    }

    pub fn n(&self) -> usize {
        self.clubs.len()
    }

    pub fn clubs(&self) -> &[Club] {
        &self.clubs
    }

    /// Budgets in canonical (nonincreasing) order.
    pub fn budgets(&self) -> impl Iterator<Item = f64> + '_ {
        self.clubs.iter().map(|c| c.budget)
    }

    pub fn total(&self) -> f64 {
        self.budgets().sum()
    }

    /// Budget shares `x_i / x` in canonical order. Each lies in (0, 1) and
    /// they sum to 1 up to rounding.
    pub fn shares(&self) -> Vec<f64> {
        let total = self.total();
        self.budgets().map(|b| b / total).collect()
    }
}

/// Total prize money flowing into the league. Finite and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Endowment(f64);

impl Endowment {
    pub const ZERO: Endowment = Endowment(0.0);

    pub fn new(value: f64) -> Result<Self, ModelError> {
        if !value.is_finite() || value < 0.0 {
            return Err(ModelError::InvalidEndowment(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for Endowment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How an endowment is split across clubs, always relative to canonical
/// (budget-descending) order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SharingRule {
    /// Split the endowment equally among the k largest-budget clubs.
    EvenTopK { k: usize },
    /// Give share `weights[i]` of the endowment to the (i+1)-th largest club.
    /// Weights are positive, nonincreasing, and sum to 1.
    WeightedTopK { k: usize, weights: Vec<f64> },
    /// Explicit per-club amounts (canonical order), summing to the endowment.
    General { amounts: Vec<f64> },
}

impl SharingRule {
    /// Checks the rule against a league of `n` clubs and endowment `E`,
    /// returning the canonical form. A weighted rule whose weights are all
    /// `1/k` is folded into `EvenTopK`, since only genuinely uneven weight
    /// vectors behave differently.
    pub fn validated(
        self,
        dist: &BudgetDistribution,
        endowment: Endowment,
    ) -> Result<SharingRule, ModelError> {
        let n = dist.n();
        match self {
            SharingRule::EvenTopK { k } => {
                if k < 1 || k > n {
                    return Err(ModelError::KOutOfRange { k, n });
                }
                Ok(SharingRule::EvenTopK { k })
            }
            SharingRule::WeightedTopK { k, weights } => {
                if k < 1 || k > n || weights.len() != k {
                    return Err(ModelError::KOutOfRange { k, n });
                }
                for pair in weights.windows(2) {
                    if pair[1] > pair[0] {
                        return Err(ModelError::WeightsNotMonotone);
                    }
                }
                let last = *weights.last().expect("k >= 1");
                if last <= 0.0 || weights.iter().any(|w| !w.is_finite()) {
                    return Err(ModelError::WeightsNotMonotone);
                }
                let sum: f64 = weights.iter().sum();
                if (sum - 1.0).abs() > SUM_TOL {
                    return Err(ModelError::WeightsNotNormalized { sum });
                }
                let even = 1.0 / k as f64;
                // max >= mean always, so weights[0] <= 1/k means uniform.
                if weights[0] <= even * (1.0 + SUM_TOL) {
                    Ok(SharingRule::EvenTopK { k })
                } else {
                    Ok(SharingRule::WeightedTopK { k, weights })
                }
            }
            SharingRule::General { amounts } => {
                if amounts.len() != n {
                    return Err(ModelError::AmountsMismatch {
                        reason: format!("{} amounts for {} clubs", amounts.len(), n),
                    });
                }
                if amounts.iter().any(|a| !a.is_finite() || *a < 0.0) {
                    return Err(ModelError::AmountsMismatch {
                        reason: "amounts must be finite and nonnegative".into(),
                    });
                }
                let sum: f64 = amounts.iter().sum();
                let e = endowment.value();
                if (sum - e).abs() > SUM_TOL * f64::max(1.0, e.abs()) {
                    return Err(ModelError::AmountsMismatch {
                        reason: format!("amounts sum to {sum}, endowment is {e}"),
                    });
                }
                Ok(SharingRule::General { amounts })
            }
        }
    }

    /// True for a weighted rule that is genuinely uneven, i.e. the top weight
    /// exceeds `1/k`. Validated rules are uneven exactly when they are still
    /// `WeightedTopK` after canonicalization.
    pub fn strictly_uneven(&self) -> bool {
        match self {
            SharingRule::WeightedTopK { k, weights } => {
                weights.first().copied().unwrap_or(0.0) > 1.0 / *k as f64
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(dist: &BudgetDistribution) -> Vec<&str> {
        dist.clubs().iter().map(|c| c.label.as_str()).collect()
    }

    #[test]
    fn canonicalize_sorts_nonincreasing() {
        let dist = BudgetDistribution::canonicalize([("A", 1.0), ("B", 3.0)]).unwrap();
        assert_eq!(labels(&dist), ["B", "A"]);
        assert_eq!(dist.budgets().collect::<Vec<_>>(), [3.0, 1.0]);
    }

    #[test]
    fn canonicalize_keeps_tie_order() {
        let dist = BudgetDistribution::canonicalize([("A", 2.0), ("B", 2.0)]).unwrap();
        assert_eq!(labels(&dist), ["A", "B"]);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let dist =
            BudgetDistribution::canonicalize([("A", 1.0), ("B", 3.0), ("C", 3.0)]).unwrap();
        let again = BudgetDistribution::canonicalize(
            dist.clubs()
                .iter()
                .map(|c| (c.label.clone(), c.budget)),
        )
        .unwrap();
        assert_eq!(again, dist);
    }

    #[test]
    fn canonicalize_rejects_singleton() {
        let err = BudgetDistribution::canonicalize([("A", 5.0)]).unwrap_err();
        assert_eq!(err, ModelError::EmptyOrSingleton(1));
    }

    #[test]
    fn canonicalize_rejects_nonpositive_and_nonfinite() {
        assert!(matches!(
            BudgetDistribution::canonicalize([("A", 1.0), ("B", 0.0)]),
            Err(ModelError::NonpositiveBudget { .. })
        ));
        assert!(matches!(
            BudgetDistribution::canonicalize([("A", 1.0), ("B", -2.0)]),
            Err(ModelError::NonpositiveBudget { .. })
        ));
        assert!(matches!(
            BudgetDistribution::canonicalize([("A", 1.0), ("B", f64::NAN)]),
            Err(ModelError::NonfiniteBudget { .. })
        ));
    }

    #[test]
    fn shares_match_hand_values() {
        let dist = BudgetDistribution::from_budgets(&[3.0, 1.0]).unwrap();
        assert_eq!(dist.shares(), [0.75, 0.25]);

        let dist = BudgetDistribution::from_budgets(&[2.0, 2.0, 2.0, 2.0]).unwrap();
        assert_eq!(dist.shares(), [0.25; 4].to_vec());

        let dist = BudgetDistribution::from_budgets(&[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let expected = [
            1.0 / 3.0,
            4.0 / 15.0,
            3.0 / 15.0,
            2.0 / 15.0,
            1.0 / 15.0,
        ];
        for (got, want) in dist.shares().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "share {got} vs {want}");
        }
    }

    #[test]
    fn endowment_rejects_negative_and_nonfinite() {
        assert!(Endowment::new(-1.0).is_err());
        assert!(Endowment::new(f64::INFINITY).is_err());
        assert_eq!(Endowment::new(0.0).unwrap(), Endowment::ZERO);
    }

    #[test]
    fn validate_rejects_k_out_of_range() {
        let dist = BudgetDistribution::from_budgets(&[3.0, 2.0, 1.0]).unwrap();
        let err = SharingRule::EvenTopK { k: 0 }
            .validated(&dist, Endowment::ZERO)
            .unwrap_err();
        assert_eq!(err, ModelError::KOutOfRange { k: 0, n: 3 });
        assert!(SharingRule::EvenTopK { k: 4 }
            .validated(&dist, Endowment::ZERO)
            .is_err());
    }

    #[test]
    fn uniform_weights_fold_to_even() {
        let dist = BudgetDistribution::from_budgets(&[3.0, 2.0, 1.0]).unwrap();
        let rule = SharingRule::WeightedTopK {
            k: 2,
            weights: vec![0.5, 0.5],
        };
        let validated = rule.validated(&dist, Endowment::ZERO).unwrap();
        assert_eq!(validated, SharingRule::EvenTopK { k: 2 });
        assert!(!validated.strictly_uneven());
    }

    #[test]
    fn uneven_weights_survive_validation() {
        let dist = BudgetDistribution::from_budgets(&[3.0, 2.0, 1.0]).unwrap();
        let rule = SharingRule::WeightedTopK {
            k: 2,
            weights: vec![0.75, 0.25],
        };
        let validated = rule.clone().validated(&dist, Endowment::ZERO).unwrap();
        assert_eq!(validated, rule);
        assert!(validated.strictly_uneven());
    }

    #[test]
    fn weight_validation_errors() {
        let dist = BudgetDistribution::from_budgets(&[3.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            SharingRule::WeightedTopK {
                k: 2,
                weights: vec![0.25, 0.75],
            }
            .validated(&dist, Endowment::ZERO),
            Err(ModelError::WeightsNotMonotone)
        ));
        assert!(matches!(
            SharingRule::WeightedTopK {
                k: 2,
                weights: vec![0.75, 0.35],
            }
            .validated(&dist, Endowment::ZERO),
            Err(ModelError::WeightsNotNormalized { .. })
        ));
        assert!(matches!(
            SharingRule::WeightedTopK {
                k: 2,
                weights: vec![1.2, -0.2],
            }
            .validated(&dist, Endowment::ZERO),
            Err(ModelError::WeightsNotMonotone)
        ));
    }

    #[test]
    fn general_amounts_must_sum_to_endowment() {
        let dist = BudgetDistribution::from_budgets(&[3.0, 2.0, 1.0]).unwrap();
        let err = SharingRule::General {
            amounts: vec![1.0, 1.0, 1.0],
        }
        .validated(&dist, Endowment::new(4.0).unwrap())
        .unwrap_err();
        assert!(matches!(err, ModelError::AmountsMismatch { .. }));

        assert!(SharingRule::General {
            amounts: vec![2.0, 1.0, 1.0],
        }
        .validated(&dist, Endowment::new(4.0).unwrap())
        .is_ok());

        // Length mismatch is also an amounts error.
        assert!(matches!(
            SharingRule::General {
                amounts: vec![4.0],
            }
            .validated(&dist, Endowment::new(4.0).unwrap()),
            Err(ModelError::AmountsMismatch { .. })
        ));
    }
}
