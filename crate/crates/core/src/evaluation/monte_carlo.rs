//! Sampled estimate of the average sharpness for plans too large to enumerate.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::choose_theta;
use super::{EvaluationReport, Method, SequencePlan, Stage};
use crate::error::{Error, Result};
use crate::lossy_detection::evaluate_all;
use crate::phase_inference::flat_prior;
use crate::scalar::{cis, wrap_phase, Cx, Real};

pub const BOOTSTRAP_RESAMPLES: usize = 256;

// stream reserved for bootstrap resampling; trials use streams 0..trials
const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// True phase and final estimate of one simulated run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialResult<T> {
    pub phi: T,
    pub estimate: T,
}

impl<T: Real> TrialResult<T> {
    fn error_phasor(&self) -> Cx<T> {
        cis(self.estimate - self.phi)
    }
}

/// Simulates `trials` runs of the adaptive sequence. Trial `i` draws from
/// stream `i` of a ChaCha8 generator seeded with `seed`, so results do not
/// depend on scheduling.
pub fn monte_carlo_trials<T: Real>(plan: &SequencePlan<T>, trials: usize, seed: u64) -> Result<Vec<TrialResult<T>>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let stages = plan.stages()?;
    Ok((0..trials)
        .into_par_iter()
        .map(|i| run_trial(&stages, seed, i as u64))
        .collect())
}

fn run_trial<T: Real>(stages: &[Stage<T>], seed: u64, index: u64) -> TrialResult<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let phi = T::lit(rng.random::<f64>()) * T::TAU();
    let mut posterior = flat_prior::<T>();
    let mut first = true;
    for stage in stages {
        let table = &*stage.table;
        for _ in 0..stage.count {
            let theta = choose_theta(stage.kind, first, &posterior, table);
            first = false;
            let probs = evaluate_all(table, phi, theta);
            let i = sample_index(&probs, rng.random::<f64>());
            let (next, evidence) = posterior.multiply(&table.entries()[i], theta);
            if evidence > T::zero() {
                posterior = next;
            }
        }
    }
    TrialResult {
        phi,
        estimate: wrap_phase(posterior.moment(1).arg()),
    }
}

fn sample_index<T: Real>(probs: &[T], u: f64) -> usize {
    let total: T = probs.iter().copied().sum();
    let target = T::lit(u) * total;
    let mut acc = T::zero();
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > T::zero() {
            acc += p;
            last = i;
            if acc > target {
                return i;
            }
        }
    }
    last
}

fn mean_sharpness<T: Real>(phasors: impl Iterator<Item = Cx<T>>, n: usize) -> T {
    let sum = phasors.fold(Cx::new(T::zero(), T::zero()), |acc, z| acc + z);
    (sum / T::from_count(n)).norm()
}

/// `μ ≈ |mean e^{i(φ̂ − φ)}|` with a bootstrap standard error.
pub fn evaluate_monte_carlo<T: Real>(plan: &SequencePlan<T>, trials: usize, seed: u64) -> Result<EvaluationReport<T>> {
    let start = Instant::now();
    let results = monte_carlo_trials(plan, trials, seed)?;
    let phasors: Vec<Cx<T>> = results.iter().map(TrialResult::error_phasor).collect();
    let mu = mean_sharpness(phasors.iter().copied(), trials);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BOOTSTRAP_STREAM);
    let resampled: Vec<T> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| mean_sharpness((0..trials).map(|_| phasors[rng.random_range(0..trials)]), trials))
        .collect();
    let b = T::from_count(BOOTSTRAP_RESAMPLES);
    let mean = resampled.iter().copied().sum::<T>() / b;
    let var = resampled.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (b - T::one());

    Ok(EvaluationReport::new(
        mu,
        trials as u128,
        Method::MonteCarlo,
        Some(var.sqrt()),
        start.elapsed(),
    ))
}
