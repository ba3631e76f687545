//! Shared helpers: random inputs, an independent grid oracle and the invariant checks.
#![allow(dead_code)]

use std::f64::consts::TAU;

use lossphase::lossy_detection::oracle_probabilities;
use lossphase::optim::golden_section_max;
use lossphase::{
    build_likelihood_table, evaluate_monte_carlo, expected_sharpness, flat_prior, optimal_theta_numeric,
    optimal_theta_single_photon, Channel, Cx, Distribution, LikelihoodTable, Outcome, Plan, State,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 128;

pub fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

/// Random normalized state with 1 to `max_n` photons and complex amplitudes.
pub fn arb_state(max_n: usize) -> impl Strategy<Value = State> {
    (1..=max_n)
        .prop_flat_map(|n| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n + 1))
        .prop_filter_map("nonzero state", |amps| {
            let v: Vec<Cx<f64>> = amps.into_iter().map(|(re, im)| Cx::new(re, im)).collect();
            State::new(v).ok()
        })
}

pub fn arb_eta() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(0.0), 0.05f64..1.0]
}

pub fn arb_phase() -> impl Strategy<Value = f64> {
    0.0f64..TAU
}

/// Outcomes with nonzero evidence, picked by index modulo the table length.
pub fn apply_updates(
    prior: &Distribution,
    table: &LikelihoodTable,
    picks: &[(usize, f64)],
) -> Distribution {
    let mut post = prior.clone();
    for &(pick, theta) in picks {
        let outcome = table.entries()[pick % table.len()].outcome();
        if let Ok(next) = post.bayes_update(table, outcome, theta) {
            post = next;
        }
    }
    post
}

fn max_abs(c: &[Cx<f64>]) -> f64 {
    c.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// ---- invariants ---------------------------------------------------------

/// Every probability series and every posterior is conjugate-symmetric.
pub fn check_hermitian(state: &State, eta: f64, picks: &[(usize, f64)]) -> Result<(), TestCaseError> {
    let table = build_likelihood_table(state, &Channel::new(eta).unwrap());
    for e in table.entries() {
        let m = e.max_harmonic() as isize;
        let scale = max_abs(e.coefficients()).max(1e-300);
        for d in 0..=m {
            let gap = (e.harmonic(-d) - e.harmonic(d).conj()).norm();
            prop_assert!(gap <= 1e-12 * scale.max(1.0), "c_{{-d}} != conj(c_d) at d={d}: {gap}");
        }
    }
    let post = apply_updates(&flat_prior(), &table, picks);
    prop_assert!(post.hermitian_defect() <= 1e-12, "posterior defect {}", post.hermitian_defect());
    Ok(())
}

/// Probabilities sum to one and posteriors integrate to one.
pub fn check_normalization(state: &State, eta: f64, x: f64, picks: &[(usize, f64)]) -> Result<(), TestCaseError> {
    let table = build_likelihood_table(state, &Channel::new(eta).unwrap());
    let probs = lossphase::evaluate_all(&table, x, 0.0);
    let total: f64 = probs.iter().sum();
    prop_assert!((total - 1.0).abs() <= 1e-12, "sum P = {total}");
    for e in table.entries() {
        let (p, _) = e.value_and_slope(x);
        prop_assert!(p >= -1e-12, "negative probability {p}");
    }
    let post = apply_updates(&flat_prior(), &table, picks);
    prop_assert!((post.coefficient(0).re - 1.0).abs() <= 1e-15);
    // a trapezoid sum on M points is exact for harmonics below M
    let m = 2 * post.max_harmonic() + 8;
    let integral: f64 = (0..m).map(|i| post.density(TAU * i as f64 / m as f64)).sum::<f64>() * TAU / m as f64;
    prop_assert!((integral - 1.0).abs() <= 1e-12, "posterior integrates to {integral}");
    Ok(())
}

/// After updates with `N_i` photons of which `L_i` were lost the posterior
/// carries no harmonic above `Σ (N_i − L_i)`.
pub fn check_harmonic_bound(states: &[(State, f64, usize, f64)]) -> Result<(), TestCaseError> {
    let mut post = flat_prior::<f64>();
    let mut bound = 0;
    for (state, eta, pick, theta) in states {
        let table = build_likelihood_table(state, &Channel::new(*eta).unwrap());
        for e in table.entries() {
            let o = e.outcome();
            prop_assert_eq!(e.max_harmonic(), state.n_photons() - o.lost);
        }
        let outcome = table.entries()[pick % table.len()].outcome();
        if let Ok(next) = post.bayes_update(&table, outcome, *theta) {
            post = next;
            bound += state.n_photons() - outcome.lost;
        }
        let top = post.max_harmonic();
        prop_assert!(
            top <= bound || (bound + 1..=top).all(|j| post.coefficient(j as isize).norm() <= 1e-14),
            "harmonic {top} above bound {bound}"
        );
    }
    Ok(())
}

/// Shifting φ and θ together leaves probabilities unchanged, and the Bayes
/// update commutes with rotating the prior.
pub fn check_shift_covariance(
    state: &State,
    eta: f64,
    phi: f64,
    theta: f64,
    delta: f64,
    picks: &[(usize, f64)],
) -> Result<(), TestCaseError> {
    let table = build_likelihood_table(state, &Channel::new(eta).unwrap());
    let a = lossphase::evaluate_all(&table, phi, theta);
    let b = lossphase::evaluate_all(&table, phi + delta, theta + delta);
    for (x, y) in a.iter().zip(&b) {
        prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
    }
    let prior = apply_updates(&flat_prior(), &table, picks);
    for e in table.entries() {
        let Ok(updated) = prior.bayes_update(&table, e.outcome(), theta) else { continue };
        let lhs = prior.rotated(delta).bayes_update(&table, e.outcome(), theta + delta).unwrap();
        let rhs = updated.rotated(delta);
        let gap = lhs
            .coefficients()
            .iter()
            .zip(rhs.coefficients())
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        prop_assert!(gap <= 1e-12, "rotation gap {gap}");
    }
    Ok(())
}

/// Rotating the prior by δ rotates the optimal controlled phase by δ.
pub fn check_feedback_covariance(
    picks: &[(usize, f64)],
    delta: f64,
    eta: f64,
    chi: f64,
) -> Result<(), TestCaseError> {
    let single = build_likelihood_table(&lossphase::make_single_photon(), &Channel::new(eta).unwrap());
    let prior = apply_updates(&flat_prior(), &single, picks);
    let moved = prior.rotated(delta);

    let t0 = optimal_theta_single_photon(&prior);
    let t1 = optimal_theta_single_photon(&moved);
    let v0 = expected_sharpness(&prior, &single, t0);
    let v1 = expected_sharpness(&moved, &single, t1);
    prop_assert!((v0 - v1).abs() <= 1e-9, "single photon {v0} vs {v1}");
    let shifted = expected_sharpness(&moved, &single, t0 + delta);
    prop_assert!((shifted - v0).abs() <= 1e-12);

    let two = build_likelihood_table(
        &lossphase::make_loss_resistant(&lossphase::LossResistantSpec::new(1, chi).unwrap()).unwrap(),
        &Channel::new(eta).unwrap(),
    );
    let n0 = optimal_theta_numeric(&prior, &two);
    let n1 = optimal_theta_numeric(&moved, &two);
    let w0 = expected_sharpness(&prior, &two, n0);
    let w1 = expected_sharpness(&moved, &two, n1);
    prop_assert!((w0 - w1).abs() <= 1e-6 * w0.max(1e-3), "two photon {w0} vs {w1}");
    let shifted = expected_sharpness(&moved, &two, n0 + delta);
    prop_assert!((shifted - w0).abs() <= 1e-12);
    Ok(())
}

/// Same seed, same report, regardless of the worker count.
pub fn check_mc_determinism(plan: &Plan, trials: usize, seed: u64) -> Result<(), TestCaseError> {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evaluate_monte_carlo(plan, trials, seed).unwrap())
    };
    let a = run(1);
    let b = run(3);
    prop_assert_eq!(a.mu.to_bits(), b.mu.to_bits());
    prop_assert_eq!(a.mc_std_error.map(f64::to_bits), b.mc_std_error.map(f64::to_bits));
    let c = evaluate_monte_carlo(plan, trials, seed).unwrap();
    prop_assert_eq!(a.mu.to_bits(), c.mu.to_bits());
    Ok(())
}

pub fn arb_picks(len: usize) -> impl Strategy<Value = Vec<(usize, f64)>> {
    prop::collection::vec((0usize..64, arb_phase()), 0..=len)
}

pub fn arb_small_plan() -> impl Strategy<Value = Plan> {
    (0usize..=3, 0usize..=1, 0.0f64..=2.0, 0usize..=1, 0.0f64..=2.0, 0.1f64..=1.0)
        .prop_filter("non-empty", |(n1, n2, _, n4, _, _)| n1 + n2 + n4 > 0)
        .prop_map(|(n1, n2, c2, n4, c4, eta)| Plan::new(n1, n2, Some(c2), n4, Some(c4), eta).unwrap())
}

/// Runs `check` over `CASES` random inputs, returning the failure message if any.
pub fn run_property<S: Strategy>(
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner().run(&strategy, check).map_err(|e| e.to_string())
}

// ---- grid oracle --------------------------------------------------------

/// Detection probabilities reconstructed from state-vector samples.
///
/// Each `P_u(x)` is a trigonometric polynomial of degree at most `N`, so
/// `4N + 4` equally spaced samples determine it exactly.
pub struct SampledModel {
    pub outcomes: Vec<Outcome>,
    coeffs: Vec<Vec<Cx<f64>>>,
    n: usize,
}

impl SampledModel {
    pub fn new(state: &State, eta: f64) -> Self {
        let n = state.n_photons();
        let m = 4 * n + 4;
        let channel = Channel::new(eta).unwrap();
        let samples: Vec<_> = (0..m)
            .map(|j| oracle_probabilities(state, &channel, TAU * j as f64 / m as f64, 0.0).unwrap())
            .collect();
        let outcomes: Vec<Outcome> = samples[0].keys().copied().collect();
        let coeffs = outcomes
            .iter()
            .map(|o| {
                (0..=2 * n)
                    .map(|i| {
                        let d = i as f64 - n as f64;
                        samples
                            .iter()
                            .enumerate()
                            .map(|(j, s)| s[o] * Cx::from_polar(1.0, -d * TAU * j as f64 / m as f64))
                            .sum::<Cx<f64>>()
                            / m as f64
                    })
                    .collect()
            })
            .collect();
        Self { outcomes, coeffs, n }
    }

    pub fn prob(&self, index: usize, x: f64) -> f64 {
        self.coeffs[index]
            .iter()
            .enumerate()
            .map(|(i, c)| c * Cx::from_polar(1.0, (i as f64 - self.n as f64) * x))
            .sum::<Cx<f64>>()
            .re
    }
}

/// Average sharpness of an adaptive plan with the posterior held on a φ grid,
/// probabilities from [`SampledModel`] and each controlled phase found by a
/// dense scan plus golden-section refinement.
pub struct GridOracle {
    grid: Vec<f64>,
    stages: Vec<SampledModel>,
}

impl GridOracle {
    pub fn new(stages: Vec<SampledModel>, points: usize) -> Self {
        Self {
            grid: (0..points).map(|i| TAU * i as f64 / points as f64).collect(),
            stages,
        }
    }

    fn first_moment(&self, weights: &[f64]) -> Cx<f64> {
        self.grid
            .iter()
            .zip(weights)
            .map(|(&p, &w)| Cx::from_polar(w, p))
            .sum::<Cx<f64>>()
            / self.grid.len() as f64
    }

    fn objective(&self, model: &SampledModel, weights: &[f64], theta: f64) -> f64 {
        (0..model.outcomes.len())
            .map(|u| {
                let next: Vec<f64> = self
                    .grid
                    .iter()
                    .zip(weights)
                    .map(|(&p, &w)| w * model.prob(u, p - theta))
                    .collect();
                self.first_moment(&next).norm()
            })
            .sum()
    }

    fn best_theta(&self, model: &SampledModel, weights: &[f64]) -> f64 {
        let scan = 720;
        let step = TAU / scan as f64;
        let (mut bt, mut bv) = (0.0, f64::NEG_INFINITY);
        for i in 0..scan {
            let t = i as f64 * step;
            let v = self.objective(model, weights, t);
            if v > bv + 1e-13 {
                (bt, bv) = (t, v);
            }
        }
        golden_section_max(|t| self.objective(model, weights, t), bt - step, bt + step, 1e-10).0
    }

    pub fn mu(&self) -> f64 {
        let flat = vec![1.0; self.grid.len()];
        self.walk(0, &flat)
    }

    fn walk(&self, step: usize, weights: &[f64]) -> f64 {
        let Some(model) = self.stages.get(step) else {
            return self.first_moment(weights).norm();
        };
        let theta = if step == 0 { 0.0 } else { self.best_theta(model, weights) };
        (0..model.outcomes.len())
            .map(|u| {
                let next: Vec<f64> = self
                    .grid
                    .iter()
                    .zip(weights)
                    .map(|(&p, &w)| w * model.prob(u, p - theta))
                    .collect();
                if next.iter().all(|&w| w.abs() < 1e-300) {
                    0.0
                } else {
                    self.walk(step + 1, &next)
                }
            })
            .sum()
    }
}
