//! Concentration indices over a budget distribution.
//!
//! The Herfindahl-Hirschman index is the sum of squared budget shares; it
//! rises as balance falls. `hhi` returns the raw fraction in `[1/n, 1]`;
//! reports also carry the conventional 10000-point scale, banded per the
//! U.S. Horizontal Merger Guidelines.

use serde::Serialize;
use thiserror::Error;

use crate::model::BudgetDistribution;

/// Conventional multiplier for reporting the index on a 0-10000 scale.
pub const POINTS_SCALE: f64 = 10_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("HHI points value {0} is outside [0, 10000]")]
    OutOfRange(f64),
    #[error("m = {m} is out of range for a league of {n} clubs")]
    MOutOfRange { m: usize, n: usize },
}

/// Merger-guidelines concentration band. Both endpoints of the 1000-1800
/// range classify as `Moderate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Band {
    Unconcentrated,
    Moderate,
    High,
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Band::Unconcentrated => "Unconcentrated",
            Band::Moderate => "Moderate",
            Band::High => "High",
        };
        f.write_str(name)
    }
}

/// Sum of squared budget shares, computed as `sum(x_i^2) / x^2` with a single
/// shared total so both factors round once.
pub fn hhi(dist: &BudgetDistribution) -> f64 {
    let total = dist.total();
    let sum_sq: f64 = dist.budgets().map(|b| b * b).sum();
    sum_sq / (total * total)
}

/// Classifies an HHI value on the points scale.
pub fn band(hhi_points: f64) -> Result<Band, IndexError> {
    if !hhi_points.is_finite() || !(0.0..=POINTS_SCALE).contains(&hhi_points) {
        return Err(IndexError::OutOfRange(hhi_points));
    }
    Ok(if hhi_points < 1000.0 {
        Band::Unconcentrated
    } else if hhi_points <= 1800.0 {
        Band::Moderate
    } else {
        Band::High
    })
}

/// Combined share of the `m` largest budgets, `1 <= m <= n`.
pub fn concentration_ratio(dist: &BudgetDistribution, m: usize) -> Result<f64, IndexError> {
    let n = dist.n();
    if m < 1 || m > n {
        return Err(IndexError::MOutOfRange { m, n });
    }
    let top: f64 = dist.budgets().take(m).sum();
    Ok(top / dist.total())
}

/// Concentration ratio bundled with the m it was taken over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationRatio {
    pub m: usize,
    pub value: f64,
}

/// Full concentration report for one distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub hhi_raw: f64,
    pub hhi_points: f64,
    pub band: Band,
    pub cr: Option<ConcentrationRatio>,
}

impl ConcentrationReport {
    pub fn new(dist: &BudgetDistribution, cr_m: Option<usize>) -> Result<Self, IndexError> {
        let hhi_raw = hhi(dist);
        let hhi_points = hhi_raw * POINTS_SCALE;
        let cr = match cr_m {
            Some(m) => Some(ConcentrationRatio {
                m,
                value: concentration_ratio(dist, m)?,
            }),
            None => None,
        };
        Ok(Self {
            hhi_raw,
            hhi_points,
            band: band(hhi_points)?,
            cr,
        })
    }
}
