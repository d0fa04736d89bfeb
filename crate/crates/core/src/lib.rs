//! How prize money reshapes a league's competitive balance.
//!
//! An international competition pays an endowment into a domestic league;
//! a sharing rule decides which clubs receive it. Adding the awards to the
//! club budgets moves the Herfindahl-Hirschman index of the budget
//! distribution, and that movement has closed forms: whether a k-top split
//! improves balance, the smallest improving k, the endowment where the
//! post-award index bottoms out, and the break-even endowment beyond which
//! a rule flips from helping to hurting.
//!
//! Module map:
//!
//! - [`model`] — budget distributions, endowments, sharing rules
//! - [`index`] — HHI, merger-guideline bands, concentration ratios
//! - [`rules`] — applying a rule and measuring the HHI change
//! - [`analysis`] — the closed-form thresholds and endowment sweeps
//! - [`oracle`] — brute-force/grid verifiers and the randomized self-check

pub mod analysis;
pub mod index;
pub mod model;
pub mod oracle;
pub mod rules;

pub use analysis::{
    classify_k, hhi_minimizing_endowment, improves, max_improving_endowment, min_improving_k,
    sweep_endowments, threshold_report, AnalysisError, HhiMinimum, ImprovementRegime,
    KClassification, SweepResult, SweepRow, ThresholdReport,
};
pub use index::{band, concentration_ratio, hhi, Band, ConcentrationReport, IndexError};
pub use model::{BudgetDistribution, Club, Endowment, ModelError, SharingRule};
pub use rules::{apply, classify_delta, delta_hhi, post_hhi, BalanceEffect, PostAwardDistribution};
