//! Brute-force and grid verifiers for the closed forms in [`crate::analysis`],
//! plus the seeded random-instance stream and the driver behind
//! `prizebalance verify`.
//!
//! Everything here recomputes from the definition of the index — award the
//! endowment, square the shares — and never reuses the closed-form arithmetic
//! it checks, so agreement between the two paths is evidence rather than
//! tautology. Grid scans are uniform on purpose: unimodality is one of the
//! claims under test, so the scan must not assume it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    classify_k, hhi_minimizing_endowment, min_improving_k, HhiMinimum, ImprovementRegime,
};
use crate::index::hhi;
use crate::model::{BudgetDistribution, Endowment, SharingRule};
use crate::rules::{delta_hhi, post_hhi, NEUTRAL_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("improvement deltas over k are not single-crossing: {details}")]
    SingleCrossingViolation { details: String },
}

/// Seeded generator of random league instances: club count uniform over
/// `n_clubs`, budgets and endowment log-uniform over their ranges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomInstanceSpec {
    pub n_clubs: (usize, usize),
    pub budget_range: (f64, f64),
    pub endowment_range: (f64, f64),
    pub seed: u64,
}

impl Default for RandomInstanceSpec {
    /// Leagues of 2-30 clubs, budgets spanning three decades, endowments
    /// spanning four.
    fn default() -> Self {
        Self {
            n_clubs: (2, 30),
            budget_range: (1.0, 1_000.0),
            endowment_range: (0.1, 1_000.0),
            seed: 42,
        }
    }
}

/// One sampled league and endowment.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub dist: BudgetDistribution,
    pub endowment: Endowment,
}

impl RandomInstance {
    /// Compact one-line description for failure reports.
    pub fn describe(&self) -> String {
        let budgets: Vec<f64> = self.dist.budgets().collect();
        format!("budgets={budgets:?}, endowment={}", self.endowment)
    }
}

fn log_uniform(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    let (lo, hi) = range;
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

impl RandomInstanceSpec {
    /// Deterministic instance stream: the same spec always yields the same
    /// sequence.
    pub fn instances(&self, count: usize) -> Vec<RandomInstance> {
        assert!(
            self.n_clubs.0 >= 2 && self.n_clubs.0 <= self.n_clubs.1,
            "club count range must be nonempty and start at 2"
        );
        assert!(
            self.budget_range.0 > 0.0 && self.budget_range.0 <= self.budget_range.1,
            "budget range must be positive and nonempty"
        );
        assert!(
            self.endowment_range.0 > 0.0 && self.endowment_range.0 <= self.endowment_range.1,
            "endowment range must be positive and nonempty"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|_| {
                let n = rng.random_range(self.n_clubs.0..=self.n_clubs.1);
                let budgets: Vec<f64> =
                    (0..n).map(|_| log_uniform(&mut rng, self.budget_range)).collect();
                let endowment =
                    Endowment::new(log_uniform(&mut rng, self.endowment_range)).expect("positive");
                RandomInstance {
                    dist: BudgetDistribution::from_budgets(&budgets).expect("positive budgets"),
                    endowment,
                }
            })
            .collect()
    }
}

/// Smallest improving k found by awarding every k and comparing HHI directly.
/// A delta inside the neutral band counts as improving, mirroring the weak
/// inequality of the closed form. Errors if the improvement pattern over k is
/// not false-then-true.
pub fn brute_min_improving_k(
    dist: &BudgetDistribution,
    endowment: Endowment,
) -> Result<usize, OracleError> {
    let baseline = hhi(dist);
    let tol = NEUTRAL_TOL * f64::max(1.0, baseline);
    let improving: Vec<bool> = (1..=dist.n())
        .map(|k| {
            let delta = delta_hhi(dist, SharingRule::EvenTopK { k }, endowment)
                .expect("k in range, endowment valid");
            delta <= tol
        })
        .collect();
    let first = improving.iter().position(|&f| f).ok_or_else(|| {
        OracleError::SingleCrossingViolation {
            details: format!("no improving k at all: {improving:?}"),
        }
    })?;
    if improving[first..].iter().any(|&f| !f) {
        return Err(OracleError::SingleCrossingViolation {
            details: format!("pattern {improving:?}"),
        });
    }
    Ok(first + 1)
}

/// Result of a uniform grid scan of post-award HHI over the endowment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridScan {
    /// First grid endowment attaining the minimal HHI.
    pub min_endowment: f64,
    /// Grid spacing, `e_max / steps`.
    pub step: f64,
    /// Whether the HHI sequence falls (weakly) and then rises (weakly),
    /// with no second dip after it has started rising.
    pub unimodal: bool,
}

/// Scans `H(X^{k,E})` on the uniform grid `E = 0, e_max/steps, ..., e_max`,
/// recomputing each point from the awarded budgets.
pub fn grid_scan(dist: &BudgetDistribution, k: usize, e_max: f64, steps: usize) -> GridScan {
    assert!(k >= 1 && k <= dist.n(), "k out of range");
    assert!(steps >= 1 && e_max > 0.0);
    let budgets: Vec<f64> = dist.budgets().collect();
    let total: f64 = budgets.iter().sum();
    let tail_sq: f64 = budgets[k..].iter().map(|b| b * b).sum();

    let hhi_at = |e: f64| -> f64 {
        let per_club = e / k as f64;
        let top_sq: f64 = budgets[..k]
            .iter()
            .map(|b| {
                let awarded = b + per_club;
                awarded * awarded
            })
            .sum();
        let grand = total + e;
        (top_sq + tail_sq) / (grand * grand)
    };

    let step = e_max / steps as f64;
    let mut min_endowment = 0.0;
    let mut min_hhi = f64::INFINITY;
    let mut prev = f64::NAN;
    let mut rising = false;
    let mut unimodal = true;
    for i in 0..=steps {
        let e = e_max * i as f64 / steps as f64;
        let h = hhi_at(e);
        if h < min_hhi {
            min_hhi = h;
            min_endowment = e;
        }
        if i > 0 {
            let diff = h - prev;
            if diff > NEUTRAL_TOL {
                rising = true;
            } else if diff < -NEUTRAL_TOL && rising {
                unimodal = false;
            }
        }
        prev = h;
    }
    GridScan {
        min_endowment,
        step,
        unimodal,
    }
}

/// Grid argmin of post-award HHI as a function of the endowment.
pub fn grid_min_hhi_endowment(
    dist: &BudgetDistribution,
    k: usize,
    e_max: f64,
    steps: usize,
) -> f64 {
    grid_scan(dist, k, e_max, steps).min_endowment
}

/// Expansion-form post-award HHI for the even k-top rule,
/// `(sum_{i<=k} (x_i + E/k)^2 + sum_{i>k} x_i^2) / (x + E)^2`.
/// Kept as an independent cross-check against [`crate::rules::post_hhi`].
pub fn closed_form_even_post_hhi(dist: &BudgetDistribution, k: usize, endowment: Endowment) -> f64 {
    assert!(k >= 1 && k <= dist.n(), "k out of range");
    let e = endowment.value();
    let per_club = e / k as f64;
    let top_sq: f64 = dist
        .budgets()
        .take(k)
        .map(|b| (b + per_club) * (b + per_club))
        .sum();
    let tail_sq: f64 = dist.budgets().skip(k).map(|b| b * b).sum();
    let grand = dist.total() + e;
    (top_sq + tail_sq) / (grand * grand)
}

/// Random admissible uneven weight vectors: positive, nonincreasing, summing
/// to 1, with the top weight strictly above `1/k`. Deterministic per seed.
pub fn random_weight_vectors(k: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(k >= 2, "uneven weight vectors need k >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut weights: Vec<f64> = (0..k)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        if weights.iter().any(|w| *w <= 0.0) {
            continue;
        }
        weights.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        // keep a margin above 1/k so validation cannot fold it to even
        if weights[0] > (1.0 + 1e-6) / k as f64 {
            out.push(weights);
        }
    }
    out
}

/// Outcome of one verified property.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyOutcome {
    pub name: &'static str,
    /// Instances (or instance/vector pairs) the property was checked on.
    pub checked: usize,
    pub failures: usize,
    /// Worst observed violation of the property's weak inequality, before
    /// tolerance. Units vary per property (HHI for sign checks, grid steps
    /// for the minimum-location check).
    pub max_deviation: f64,
    /// First offending instance, when any check failed.
    pub worst: Option<String>,
}

impl PropertyOutcome {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            failures: 0,
            max_deviation: 0.0,
            worst: None,
        }
    }

    fn record(&mut self, deviation: f64, ok: bool, instance: &RandomInstance, note: &str) {
        self.max_deviation = self.max_deviation.max(deviation);
        if !ok {
            self.failures += 1;
            if self.worst.is_none() {
                self.worst = Some(format!("{} ({note})", instance.describe()));
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Aggregate result of a verification run.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationSummary {
    pub seed: u64,
    pub instances: usize,
    pub properties: Vec<PropertyOutcome>,
}

impl VerificationSummary {
    pub fn total_failures(&self) -> usize {
        self.properties.iter().map(|p| p.failures).sum()
    }

    pub fn passed(&self) -> bool {
        self.total_failures() == 0
    }
}

/// Checks every closed form against direct recomputation on `count` seeded
/// instances. The grid and weight-vector properties run on capped subsets
/// (1000 instances) and the limit property on 100, since they are much
/// heavier per instance.
pub fn run_verification(spec: &RandomInstanceSpec, count: usize) -> VerificationSummary {
    let instances = spec.instances(count);
    let even = |k: usize| SharingRule::EvenTopK { k };

    let mut sign = PropertyOutcome::new("top-1 never improves; full-share never hurts");
    let mut crossing =
        PropertyOutcome::new("post-award HHI monotone in k; single crossing matches brute force");
    let mut uneven = PropertyOutcome::new("even k-top no worse than any uneven k-top");
    let mut minimum = PropertyOutcome::new("grid HHI minimum within one step of closed form");
    let mut monotone =
        PropertyOutcome::new("break-even increasing in k; min improving k nondecreasing in E");
    let mut limit = PropertyOutcome::new("post-award HHI approaches 1/k for huge endowments");

    for inst in &instances {
        let n = inst.dist.n();
        let baseline = hhi(&inst.dist);
        let tol = NEUTRAL_TOL * f64::max(1.0, baseline);

        // directions at the extremes
        let d_top = delta_hhi(&inst.dist, even(1), inst.endowment).expect("valid");
        let d_all = delta_hhi(&inst.dist, even(n), inst.endowment).expect("valid");
        sign.checked += 1;
        sign.record(
            f64::max(-d_top, d_all).max(0.0),
            d_top >= -tol && d_all <= tol,
            inst,
            "extreme-k delta has the wrong sign",
        );

        // monotonicity in k, single crossing, closed form vs brute force
        crossing.checked += 1;
        let posts: Vec<f64> = (1..=n)
            .map(|k| post_hhi(&inst.dist, even(k), inst.endowment).expect("valid"))
            .collect();
        let worst_rise = posts
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max);
        let brute = brute_min_improving_k(&inst.dist, inst.endowment);
        let closed = min_improving_k(&inst.dist, inst.endowment);
        let agree = matches!((&brute, &closed), (Ok(b), Ok(c)) if b == c);
        crossing.record(
            worst_rise.max(0.0),
            worst_rise <= NEUTRAL_TOL && agree,
            inst,
            "k-monotonicity or brute-force agreement broke",
        );

        // break-even endowments strictly increase over the threshold regime
        let break_evens: Vec<f64> = (1..=n)
            .filter_map(|k| match classify_k(&inst.dist, k).expect("valid").regime {
                ImprovementRegime::ThresholdAt(e) => Some(e),
                _ => None,
            })
            .collect();
        let worst_drop = break_evens
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::NEG_INFINITY, f64::max);
        let strictly_up = break_evens.windows(2).all(|w| w[1] > w[0]);
        monotone.checked += 1;
        monotone.record(
            worst_drop.max(0.0),
            strictly_up,
            inst,
            "break-even endowment not strictly increasing in k",
        );
    }

    // min improving k along a growing endowment grid
    for inst in instances.iter().take(2_000) {
        let mut prev = 0usize;
        let mut ok = true;
        for i in 0..16 {
            let e = Endowment::new(0.1 * 10f64.powf(4.0 * i as f64 / 15.0)).expect("positive");
            let k = min_improving_k(&inst.dist, e).unwrap_or(0);
            if k == 0 || k < prev {
                ok = false;
                break;
            }
            prev = k;
        }
        monotone.checked += 1;
        monotone.record(0.0, ok, inst, "min improving k decreased as E grew");
    }

    // even vs uneven weight vectors
    for (i, inst) in instances.iter().take(1_000).enumerate() {
        let n = inst.dist.n();
        let k = 2 + (i % (n - 1).max(1)).min(n - 2);
        let h_even = post_hhi(&inst.dist, even(k), inst.endowment).expect("valid");
        for weights in random_weight_vectors(k, 10, spec.seed.wrapping_add(i as u64)) {
            let h_uneven = post_hhi(
                &inst.dist,
                SharingRule::WeightedTopK { k, weights },
                inst.endowment,
            )
            .expect("admissible");
            uneven.checked += 1;
            uneven.record(
                (h_even - h_uneven).max(0.0),
                h_even <= h_uneven + NEUTRAL_TOL,
                inst,
                "uneven rule beat the even rule",
            );
        }
    }

    // grid minimum vs closed form, and unimodality of the scan
    for (i, inst) in instances.iter().take(1_000).enumerate() {
        let n = inst.dist.n();
        let k = 1 + i % (n - 1);
        let closed = match hhi_minimizing_endowment(&inst.dist, k).expect("k < n") {
            HhiMinimum::At(e) => e,
            HhiMinimum::AlwaysFalling => unreachable!("k < n"),
        };
        let e_max = if closed > 0.0 {
            2.0 * closed
        } else {
            inst.dist.total()
        };
        let scan = grid_scan(&inst.dist, k, e_max, 10_000);
        let dev_steps = (scan.min_endowment - closed).abs() / scan.step;
        minimum.checked += 1;
        minimum.record(
            dev_steps,
            dev_steps <= 1.0 + 1e-9 && scan.unimodal,
            inst,
            "grid minimum strayed from the closed form or scan was not unimodal",
        );
    }

    // limit of the post-award HHI for enormous endowments
    for inst in instances.iter().take(100) {
        let n = inst.dist.n();
        let k = 1 + (n - 1) / 2;
        let huge = Endowment::new(1e9 * inst.dist.total()).expect("finite");
        let h = post_hhi(&inst.dist, even(k), huge).expect("valid");
        let dev = (h - 1.0 / k as f64).abs();
        limit.checked += 1;
        limit.record(dev, dev <= 1e-6, inst, "HHI limit 1/k missed");
    }

    VerificationSummary {
        seed: spec.seed,
        instances: count,
        properties: vec![sign, crossing, uneven, minimum, monotone, limit],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(budgets: &[f64]) -> BudgetDistribution {
        BudgetDistribution::from_budgets(budgets).unwrap()
    }

    fn e(v: f64) -> Endowment {
        Endowment::new(v).unwrap()
    }

    #[test]
    fn brute_matches_hand_values() {
        assert_eq!(brute_min_improving_k(&dist(&[3.0, 2.0, 1.0]), e(1.0)).unwrap(), 3);
        let micro = dist(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        assert_eq!(brute_min_improving_k(&micro, e(50.0)).unwrap(), 4);
        assert_eq!(brute_min_improving_k(&micro, e(100.0)).unwrap(), 5);
        // equal budgets: only the full share keeps the distribution balanced
        assert_eq!(
            brute_min_improving_k(&dist(&[2.0, 2.0, 2.0, 2.0]), e(5.0)).unwrap(),
            4
        );
    }

    #[test]
    fn grid_finds_the_micro_minimum() {
        let micro = dist(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        let found = grid_min_hhi_endowment(&micro, 4, 100.0, 10_000);
        assert!((found - 10.0).abs() <= 0.01, "got {found}");
        assert_eq!(grid_min_hhi_endowment(&micro, 1, 100.0, 10_000), 0.0);
        // awarding either of two equal clubs unbalances immediately
        assert_eq!(grid_min_hhi_endowment(&dist(&[2.0, 2.0]), 1, 10.0, 1_000), 0.0);
    }

    #[test]
    fn grid_scan_is_unimodal_on_micro() {
        let micro = dist(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        for k in 1..=4 {
            assert!(grid_scan(&micro, k, 200.0, 5_000).unimodal, "k={k}");
        }
    }

    #[test]
    fn closed_form_matches_production_path() {
        let micro = dist(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        for k in 1..=5 {
            for val in [0.0, 0.5, 10.0, 60.0, 1e6] {
                let via_apply =
                    post_hhi(&micro, SharingRule::EvenTopK { k }, e(val)).unwrap();
                let via_form = closed_form_even_post_hhi(&micro, k, e(val));
                assert!(
                    (via_apply - via_form).abs() <= 1e-12 * via_apply.max(1.0),
                    "k={k} E={val}: {via_apply} vs {via_form}"
                );
            }
        }
    }

    #[test]
    fn weight_vectors_are_admissible_and_deterministic() {
        for k in [2usize, 3, 7] {
            let vecs = random_weight_vectors(k, 25, 99);
            assert_eq!(vecs.len(), 25);
            for w in &vecs {
                assert_eq!(w.len(), k);
                assert!(w.windows(2).all(|p| p[1] <= p[0]));
                assert!(w.iter().all(|v| *v > 0.0));
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(w[0] > 1.0 / k as f64);
            }
        }
        assert_eq!(
            random_weight_vectors(3, 10, 7),
            random_weight_vectors(3, 10, 7)
        );
        assert_ne!(
            random_weight_vectors(3, 10, 7),
            random_weight_vectors(3, 10, 8)
        );
    }

    #[test]
    fn instance_stream_is_deterministic() {
        let spec = RandomInstanceSpec::default();
        let a = spec.instances(50);
        let b = spec.instances(50);
        assert_eq!(a, b);
        let other = RandomInstanceSpec {
            seed: 43,
            ..RandomInstanceSpec::default()
        };
        assert_ne!(a, other.instances(50));
    }

    #[test]
    fn instances_respect_ranges() {
        let spec = RandomInstanceSpec {
            n_clubs: (2, 6),
            budget_range: (10.0, 20.0),
            endowment_range: (1.0, 2.0),
            seed: 5,
        };
        for inst in spec.instances(200) {
            assert!((2..=6).contains(&inst.dist.n()));
            for b in inst.dist.budgets() {
                assert!((10.0..=20.0).contains(&b));
            }
            assert!((1.0..=2.0).contains(&inst.endowment.value()));
        }
    }

    #[test]
    fn small_verification_run_is_clean() {
        let spec = RandomInstanceSpec::default();
        let summary = run_verification(&spec, 300);
        assert_eq!(summary.properties.len(), 6);
        assert!(
            summary.passed(),
            "failures: {:?}",
            summary
                .properties
                .iter()
                .filter(|p| !p.passed())
                .collect::<Vec<_>>()
        );
        for p in &summary.properties {
            assert!(p.checked > 0, "{} never ran", p.name);
        }
    }

    #[test]
    fn minimum_league_still_exercises_everything() {
        let spec = RandomInstanceSpec {
            n_clubs: (2, 2),
            ..RandomInstanceSpec::default()
        };
        let summary = run_verification(&spec, 200);
        assert!(summary.passed());
    }
}
