//! Average sharpness by enumerating every detection record.
//!
//! `μ = Σ_records |∫ e^{iφ} Π P(u_k|φ, θ_k) dφ / 2π|`. Each node carries the
//! normalized posterior and the probability of reaching it, so a leaf contributes
//! `weight · |a_1|`. The last measurement is summed through the feedback
//! objective, which is exactly that sum over its outcomes.

use std::time::Instant;

use super::{EvalOptions, EvaluationReport, Method, SequencePlan, Stage, StageKind};
use crate::error::{Error, Result};
use crate::feedback::{optimal_theta_numeric, optimal_theta_single_photon, SharpnessObjective};
use crate::lossy_detection::{build_likelihood_table, LossChannel, OutcomeLikelihoodTable};
use crate::phase_inference::{flat_prior, PhaseDistribution};
use crate::scalar::{binomial, Real};
use crate::state_prep::make_single_photon;

/// Controlled phase for the next detection. The first detection uses 0.
pub(crate) fn choose_theta<T: Real>(
    kind: StageKind,
    first: bool,
    posterior: &PhaseDistribution<T>,
    table: &OutcomeLikelihoodTable<T>,
) -> T {
    if first {
        return T::zero();
    }
    match kind {
        StageKind::SinglePhoton => optimal_theta_single_photon(posterior),
        StageKind::MultiPhoton => optimal_theta_numeric(posterior, table),
    }
}

struct Step<'a, T: Real> {
    kind: StageKind,
    table: &'a OutcomeLikelihoodTable<T>,
}

struct TreeWalker<'a, T: Real> {
    steps: Vec<Step<'a, T>>,
}

impl<'a, T: Real> TreeWalker<'a, T> {
    fn new(stages: &'a [Stage<T>]) -> Self {
        let steps = stages
            .iter()
            .flat_map(|s| {
                (0..s.count).map(move |_| Step {
                    kind: s.kind,
                    table: &s.table,
                })
            })
            .collect();
        Self { steps }
    }

    /// Sum of `weight · |a_1|` over every leaf below step `i`.
    fn walk(&self, i: usize, posterior: &PhaseDistribution<T>, weight: T, first: bool) -> T {
        let Some(step) = self.steps.get(i) else {
            return weight * posterior.sharpness();
        };
        let theta = choose_theta(step.kind, first, posterior, step.table);
        if i + 1 == self.steps.len() {
            return weight * SharpnessObjective::new(posterior, step.table).value(theta);
        }
        let mut acc = T::zero();
        for entry in step.table.entries() {
            if entry.is_identically_zero() {
                continue;
            }
            let (next, evidence) = posterior.multiply(entry, theta);
            if evidence > T::zero() {
                acc += self.walk(i + 1, &next, weight * evidence, false);
            }
        }
        acc
    }
}

fn check_guard(leaves: u128, options: &EvalOptions) -> Result<()> {
    if leaves > options.branch_guard {
        return Err(Error::BranchGuard {
            branches: leaves,
            limit: options.branch_guard,
        });
    }
    Ok(())
}

/// Enumerates all `3^{N₁}·6^{N₂}·15^{N₄}` detection records.
pub fn evaluate_exact<T: Real>(plan: &SequencePlan<T>, options: &EvalOptions) -> Result<EvaluationReport<T>> {
    let start = Instant::now();
    let leaves = plan.exact_leaf_count();
    check_guard(leaves, options)?;
    let stages = plan.stages()?;
    let walker = TreeWalker::new(&stages);
    let mu = walker.walk(0, &flat_prior(), T::one(), true);
    Ok(EvaluationReport::new(mu, leaves, Method::Exact, None, start.elapsed()))
}

/// Same value as [`evaluate_exact`], summing the single-photon stage over the
/// number of photons that survive.
///
/// A lost single photon leaves both posterior and feedback unchanged, so
/// `μ = Σ_n C(N₁,n) ηⁿ (1−η)^{N₁−n} μ̃_n` where `μ̃_n` uses `n` lossless single
/// photons. The sequences for successive `n` share prefixes, so one binary tree
/// of depth `N₁` yields every `μ̃_n`.
pub fn evaluate_exact_with_speedup<T: Real>(
    plan: &SequencePlan<T>,
    options: &EvalOptions,
) -> Result<EvaluationReport<T>> {
    let start = Instant::now();
    let leaves = plan.speedup_leaf_count();
    check_guard(leaves, options)?;
    let stages = plan.stages()?;
    let multi: Vec<Stage<T>> = stages
        .iter()
        .filter(|s| s.kind == StageKind::MultiPhoton)
        .cloned()
        .collect();
    let lossless = build_likelihood_table(&make_single_photon(), &LossChannel::lossless());
    let walker = SinglePhotonPrefix {
        n1: plan.n1,
        eta: plan.eta,
        lossless: &lossless,
        rest: TreeWalker::new(&multi),
    };
    let mu = walker.walk(0, &flat_prior(), T::one());
    Ok(EvaluationReport::new(mu, leaves, Method::ExactWithSpeedup, None, start.elapsed()))
}

struct SinglePhotonPrefix<'a, T: Real> {
    n1: usize,
    eta: T,
    lossless: &'a OutcomeLikelihoodTable<T>,
    rest: TreeWalker<'a, T>,
}

impl<T: Real> SinglePhotonPrefix<'_, T> {
    fn survival_weight(&self, n: usize) -> T {
        T::lit(binomial(self.n1, n) as f64)
            * self.eta.powi(n as i32)
            * (T::one() - self.eta).powi((self.n1 - n) as i32)
    }

    fn walk(&self, n: usize, posterior: &PhaseDistribution<T>, weight: T) -> T {
        let w = self.survival_weight(n);
        let mut total = T::zero();
        if w > T::zero() {
            total += w * self.rest.walk(0, posterior, weight, n == 0);
        }
        if n < self.n1 {
            let theta = if n == 0 {
                T::zero()
            } else {
                optimal_theta_single_photon(posterior)
            };
            for entry in self.lossless.entries() {
                if entry.is_identically_zero() {
                    continue;
                }
                let (next, evidence) = posterior.multiply(entry, theta);
                if evidence > T::zero() {
                    total += self.walk(n + 1, &next, weight * evidence);
                }
            }
        }
        total
    }
}
