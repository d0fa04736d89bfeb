//! Closed-form threshold analysis for even k-top rules.
//!
//! Everything here reduces to three derived quantities of the distribution:
//! the total `x`, the sum of squared budgets `sum(x_i^2)`, and the top-k
//! partial sums. From those we answer, without simulating the award:
//!
//! - does splitting `E` among the top k improve balance ([`improves`]),
//! - for which endowments can a given k ever improve ([`classify_k`]),
//! - the smallest improving k for a given endowment ([`min_improving_k`]),
//! - the endowment where post-award HHI bottoms out
//!   ([`hhi_minimizing_endowment`]),
//! - the break-even endowment above which a threshold-regime k flips from
//!   improving to hurting ([`max_improving_endowment`]).
//!
//! All inequality checks use a relative tolerance of [`INEQ_REL_TOL`] so that
//! exact boundary instances classify deterministically.

use serde::Serialize;
use thiserror::Error;

use crate::index::{band, hhi, Band, IndexError, POINTS_SCALE};
use crate::model::{BudgetDistribution, Endowment, ModelError, SharingRule};
use crate::rules;

/// Relative tolerance applied to both sides of every closed-form inequality.
pub const INEQ_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("k = {k} is in the {regime} regime and has no break-even endowment")]
    PremiseViolated { k: usize, regime: String },
    #[error("improvement flags over k = 1..n are not single-crossing: {flags:?}")]
    SingleCrossingViolation { flags: Vec<bool> },
    #[error("endowment grid must be nonempty, finite, nonnegative, and strictly increasing")]
    BadGrid,
}

/// `lhs <= rhs` up to a relative slack on the larger side.
fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQ_REL_TOL * f64::max(lhs.abs(), rhs.abs())
}

/// `x`, `sum(x_i^2)`, and the partial sum of the k largest budgets.
fn moments(dist: &BudgetDistribution, k: usize) -> (f64, f64, f64) {
    let total = dist.total();
    let sum_sq = dist.budgets().map(|b| b * b).sum();
    let top_k = dist.budgets().take(k).sum();
    (total, sum_sq, top_k)
}

fn check_k(dist: &BudgetDistribution, k: usize) -> Result<(), AnalysisError> {
    if k < 1 || k > dist.n() {
        return Err(ModelError::KOutOfRange { k, n: dist.n() }.into());
    }
    Ok(())
}

/// Whether the even k-top rule weakly improves balance at endowment `E`:
/// `x^2 (E + 2 sum_{i<=k} x_i) <= k (E + 2x) sum x_i^2`.
///
/// At `E = 0` the weak reading makes this `x * sum_{i<=k} x_i <= k * sum x_i^2`
/// even though the award itself is the identity.
pub fn improves(
    dist: &BudgetDistribution,
    k: usize,
    endowment: Endowment,
) -> Result<bool, AnalysisError> {
    check_k(dist, k)?;
    let e = endowment.value();
    let (total, sum_sq, top_k) = moments(dist, k);
    let lhs = total * total * (e + 2.0 * top_k);
    let rhs = k as f64 * (e + 2.0 * total) * sum_sq;
    Ok(leq(lhs, rhs))
}

/// For a fixed k, which endowments improve balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ImprovementRegime {
    /// `k * sum(x_i^2) >= x^2`: improves for every endowment.
    AlwaysImproves,
    /// `k * sum(x_i^2) <= x * sum_{i<=k} x_i`: improves for no endowment.
    NeverImproves,
    /// Improves exactly for endowments up to the enclosed break-even value.
    ThresholdAt(f64),
}

impl std::fmt::Display for ImprovementRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImprovementRegime::AlwaysImproves => f.write_str("always improves"),
            ImprovementRegime::NeverImproves => f.write_str("never improves"),
            ImprovementRegime::ThresholdAt(e) => write!(f, "improves iff E <= {e}"),
        }
    }
}

/// Regime of one k value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KClassification {
    pub k: usize,
    pub regime: ImprovementRegime,
}

/// Sorts k into one of the three improvement regimes. The degenerate case
/// where both trivial premises hold with equality (all budgets equal, k = n)
/// classifies as `AlwaysImproves`.
pub fn classify_k(dist: &BudgetDistribution, k: usize) -> Result<KClassification, AnalysisError> {
    check_k(dist, k)?;
    let (total, sum_sq, top_k) = moments(dist, k);
    let k_sum_sq = k as f64 * sum_sq;
    let regime = if leq(total * total, k_sum_sq) {
        ImprovementRegime::AlwaysImproves
    } else if leq(k_sum_sq, total * top_k) {
        ImprovementRegime::NeverImproves
    } else {
        // strict sandwich x*S_k < k*sum_sq < x^2 makes this positive
        let break_even =
            2.0 * total * (k_sum_sq - total * top_k) / (total * total - k_sum_sq);
        ImprovementRegime::ThresholdAt(break_even)
    };
    Ok(KClassification { k, regime })
}

/// Smallest k whose even k-top rule weakly improves balance at `E`. Scans
/// k = 1..n and verifies on the way that the improvement flags cross from
/// false to true exactly once; a broken pattern is an internal-consistency
/// error, not a silent answer.
pub fn min_improving_k(
    dist: &BudgetDistribution,
    endowment: Endowment,
) -> Result<usize, AnalysisError> {
    let flags: Vec<bool> = (1..=dist.n())
        .map(|k| improves(dist, k, endowment))
        .collect::<Result<_, _>>()?;
    let first = flags
        .iter()
        .position(|&f| f)
        .ok_or_else(|| AnalysisError::SingleCrossingViolation { flags: flags.clone() })?;
    if flags[first..].iter().any(|&f| !f) {
        return Err(AnalysisError::SingleCrossingViolation { flags });
    }
    Ok(first + 1)
}

/// Where post-award HHI stops falling in the endowment, for a fixed k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum HhiMinimum {
    /// `H(X^{k,E})` is nonincreasing up to this endowment and nondecreasing
    /// beyond it.
    At(f64),
    /// k = n: the HHI keeps falling toward `1/n` and never turns upward.
    AlwaysFalling,
}

/// Endowment minimizing post-award HHI for the even k-top rule:
/// `max(0, (k sum(x_i^2) - x sum_{i<=k} x_i) / sum_{i>k} x_i)`.
///
/// For k = n the denominator is empty and the turning condition can never
/// hold, so the sentinel [`HhiMinimum::AlwaysFalling`] is returned instead of
/// a number.
pub fn hhi_minimizing_endowment(
    dist: &BudgetDistribution,
    k: usize,
) -> Result<HhiMinimum, AnalysisError> {
    check_k(dist, k)?;
    if k == dist.n() {
        return Ok(HhiMinimum::AlwaysFalling);
    }
    let (total, sum_sq, top_k) = moments(dist, k);
    let tail: f64 = dist.budgets().skip(k).sum();
    let numerator = k as f64 * sum_sq - total * top_k;
    Ok(HhiMinimum::At(f64::max(0.0, numerator / tail)))
}

/// Break-even endowment for a k in the threshold regime:
/// `2x (k sum(x_i^2) - x sum_{i<=k} x_i) / (x^2 - k sum(x_i^2))`.
///
/// Errors with [`AnalysisError::PremiseViolated`] when k always or never
/// improves, since no finite positive break-even exists there.
pub fn max_improving_endowment(
    dist: &BudgetDistribution,
    k: usize,
) -> Result<f64, AnalysisError> {
    match classify_k(dist, k)?.regime {
        ImprovementRegime::ThresholdAt(e) => Ok(e),
        regime => Err(AnalysisError::PremiseViolated {
            k,
            regime: regime.to_string(),
        }),
    }
}

/// One grid point of an endowment sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub endowment: f64,
    pub hhi_raw: f64,
    pub hhi_points: f64,
    pub band: Band,
    /// Raw-scale change against the zero-endowment baseline.
    pub delta: f64,
}

/// Post-award HHI of the even k-top rule across an endowment grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub k: usize,
    pub baseline_hhi: f64,
    pub rows: Vec<SweepRow>,
}

/// Evaluates the even k-top rule on each grid endowment. The grid must be
/// nonempty, nonnegative, finite, and strictly increasing.
pub fn sweep_endowments(
    dist: &BudgetDistribution,
    k: usize,
    grid: &[f64],
) -> Result<SweepResult, AnalysisError> {
    check_k(dist, k)?;
    if grid.is_empty() || grid.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(AnalysisError::BadGrid);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::BadGrid);
    }
    let baseline = hhi(dist);
    let rows = grid
        .iter()
        .map(|&e| {
            let endowment = Endowment::new(e).expect("grid validated");
            let hhi_raw = rules::post_hhi(dist, SharingRule::EvenTopK { k }, endowment)?;
            let hhi_points = hhi_raw * POINTS_SCALE;
            Ok(SweepRow {
                endowment: e,
                hhi_raw,
                hhi_points,
                band: band(hhi_points)?,
                delta: hhi_raw - baseline,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(SweepResult {
        k,
        baseline_hhi: baseline,
        rows,
    })
}

/// Full per-k threshold table for one distribution and endowment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// Smallest improving k at the report's endowment.
    pub min_improving_k: usize,
    pub endowment: f64,
    pub classifications: Vec<KClassification>,
    /// HHI-minimizing endowment per k, in k order.
    pub hhi_minima: Vec<(usize, HhiMinimum)>,
}

/// Builds the threshold table: regime and break-even per k, HHI-minimizing
/// endowment per k, and the smallest improving k at `E`.
pub fn threshold_report(
    dist: &BudgetDistribution,
    endowment: Endowment,
) -> Result<ThresholdReport, AnalysisError> {
    let classifications = (1..=dist.n())
        .map(|k| classify_k(dist, k))
        .collect::<Result<Vec<_>, _>>()?;
    let hhi_minima = (1..=dist.n())
        .map(|k| Ok((k, hhi_minimizing_endowment(dist, k)?)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(ThresholdReport {
        min_improving_k: min_improving_k(dist, endowment)?,
        endowment: endowment.value(),
        classifications,
        hhi_minima,
    })
}
