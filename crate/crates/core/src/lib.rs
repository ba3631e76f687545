//! Adaptive optical phase estimation with loss-resistant two-mode states.
//!
//! The pipeline: prepare a symmetric `N`-photon state ([`state_prep`]), send it
//! through a lossy interferometer and tabulate the Fourier coefficients of every
//! detection probability ([`lossy_detection`]), fold outcomes into a Fourier-series
//! posterior ([`phase_inference`]), pick the next controlled phase ([`feedback`]),
//! and score whole sequences ([`evaluation`], [`sequence_optimizer`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The aliases below fix
//! the scalar to `f64`.

pub mod error;
pub mod evaluation;
pub mod feedback;
pub mod fock;
pub mod lossy_detection;
pub mod optim;
pub mod phase_inference;
pub mod scalar;
pub mod sequence_optimizer;
pub mod state_prep;

pub use error::{Error, Result};
pub use evaluation::{
    evaluate_exact, evaluate_exact_with_speedup, evaluate_monte_carlo, fisher_from_table, fisher_information,
    max_fisher_exact_optimal4, max_fisher_over_chi, max_fisher_over_phi, EvalOptions, EvaluationReport, Method,
    ReportRecord, SequencePlan, VarianceValue, DEFAULT_BRANCH_GUARD,
};
pub use feedback::{
    expected_sharpness, optimal_theta_numeric, optimal_theta_single_photon, single_photon_candidates,
    FeedbackCandidateSet, SharpnessObjective,
};
pub use lossy_detection::{
    build_likelihood_table, evaluate_all, evaluate_outcome, oracle_probabilities, LikelihoodEntry, LossChannel,
    Outcome, OutcomeLikelihoodTable,
};
pub use phase_inference::{flat_prior, MeasurementRecord, MeasurementStep, PhaseDistribution};
pub use scalar::{wrap_phase, Cx, Real};
pub use sequence_optimizer::{
    enumerate_plans, optimize, optimize_with, sql_baseline, sql_baseline_with, Evaluator, OptimizationResult,
};
pub use state_prep::{
    forward_simulate_triport, make_exact_optimal4, make_loss_resistant, make_single_photon, synthesize_triport,
    ExactOptimalSpec, LossResistantSpec, TriPortConfig, TwoModeState,
};

pub type State = TwoModeState<f64>;
pub type Channel = LossChannel<f64>;
pub type LikelihoodTable = OutcomeLikelihoodTable<f64>;
pub type Distribution = PhaseDistribution<f64>;
pub type Plan = SequencePlan<f64>;
pub type Report = EvaluationReport<f64>;
pub type Optimization = OptimizationResult<f64>;
