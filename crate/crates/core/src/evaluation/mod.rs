//! Performance measures: Fisher information of single states and the average
//! sharpness of complete adaptive sequences.

mod exact;
mod fisher;
mod monte_carlo;

use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lossy_detection::{build_likelihood_table, outcome_count, LossChannel, OutcomeLikelihoodTable};
use crate::phase_inference::holevo_from_sharpness;
use crate::scalar::Real;
use crate::state_prep::{make_loss_resistant, make_single_photon, LossResistantSpec};

pub use exact::{evaluate_exact, evaluate_exact_with_speedup};
pub use fisher::{
    fisher_from_table, fisher_information, max_fisher_exact_optimal4, max_fisher_over_chi,
    max_fisher_over_phi, FISHER_PHI_GRID,
};
pub use monte_carlo::{evaluate_monte_carlo, monte_carlo_trials, TrialResult, BOOTSTRAP_RESAMPLES};

/// Default cap on enumerated leaves.
pub const DEFAULT_BRANCH_GUARD: u128 = 100_000_000;

/// `N₁` single photons, then `N₂` two-photon states at `χ₂`, then `N₄`
/// four-photon states at `χ₄`, all through the same efficiency `η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequencePlan<T> {
    pub n1: usize,
    pub n2: usize,
    pub chi2: Option<T>,
    pub n4: usize,
    pub chi4: Option<T>,
    pub eta: T,
}

impl<T: Real> SequencePlan<T> {
    /// A `χ` is dropped when its count is zero and required otherwise.
    pub fn new(n1: usize, n2: usize, chi2: Option<T>, n4: usize, chi4: Option<T>, eta: T) -> Result<Self> {
        let plan = Self {
            n1,
            n2,
            chi2: if n2 > 0 { chi2 } else { None },
            n4,
            chi4: if n4 > 0 { chi4 } else { None },
            eta,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn single_photons(n1: usize, eta: T) -> Result<Self> {
        Self::new(n1, 0, None, 0, None, eta)
    }

    pub fn validate(&self) -> Result<()> {
        LossChannel::new(self.eta)?;
        for (count, chi, name) in [(self.n2, self.chi2, "chi2"), (self.n4, self.chi4, "chi4")] {
            if count > 0 {
                let chi = chi.ok_or_else(|| Error::invalid(format!("{name} required when its count is positive")))?;
                LossResistantSpec::new(1, chi)?;
            }
        }
        if self.measurements() == 0 {
            return Err(Error::invalid("plan contains no states"));
        }
        Ok(())
    }

    pub fn total_photons(&self) -> usize {
        self.n1 + 2 * self.n2 + 4 * self.n4
    }

    pub fn measurements(&self) -> usize {
        self.n1 + self.n2 + self.n4
    }

    /// `3^{N₁} · 6^{N₂} · 15^{N₄}`, saturating.
    pub fn exact_leaf_count(&self) -> u128 {
        pow_sat(outcome_count(1) as u128, self.n1)
            .saturating_mul(self.multi_leaf_count())
    }

    /// `(2^{N₁+1} − 1) · 6^{N₂} · 15^{N₄}`, saturating.
    pub fn speedup_leaf_count(&self) -> u128 {
        pow_sat(2, self.n1 + 1)
            .saturating_sub(1)
            .saturating_mul(self.multi_leaf_count())
    }

    fn multi_leaf_count(&self) -> u128 {
        pow_sat(outcome_count(2) as u128, self.n2).saturating_mul(pow_sat(outcome_count(4) as u128, self.n4))
    }

    /// Likelihood tables in execution order, one per group.
    pub(crate) fn stages(&self) -> Result<Vec<Stage<T>>> {
        self.validate()?;
        let channel = LossChannel::new(self.eta)?;
        let mut stages = Vec::new();
        if self.n1 > 0 {
            stages.push(Stage {
                kind: StageKind::SinglePhoton,
                count: self.n1,
                table: Arc::new(build_likelihood_table(&make_single_photon(), &channel)),
            });
        }
        for (count, chi, half_n) in [(self.n2, self.chi2, 1), (self.n4, self.chi4, 2)] {
            if count > 0 {
                let state = make_loss_resistant(&LossResistantSpec::new(half_n, chi.expect("validated"))?)?;
                stages.push(Stage {
                    kind: StageKind::MultiPhoton,
                    count,
                    table: Arc::new(build_likelihood_table(&state, &channel)),
                });
            }
        }
        Ok(stages)
    }
}

impl<T: Real> fmt::Display for SequencePlan<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let chi = |c: Option<T>| c.map_or_else(|| "-".to_string(), |v| format!("{v}"));
        write!(
            f,
            "plan(n1={}, n2={}, chi2={}, n4={}, chi4={}, eta={})",
            self.n1,
            self.n2,
            chi(self.chi2),
            self.n4,
            chi(self.chi4),
            self.eta
        )
    }
}

fn pow_sat(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum StageKind {
    SinglePhoton,
    MultiPhoton,
}

#[derive(Clone, Debug)]
pub(crate) struct Stage<T: Real> {
    pub kind: StageKind,
    pub count: usize,
    pub table: Arc<OutcomeLikelihoodTable<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    ExactWithSpeedup,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::ExactWithSpeedup => "exact_with_speedup",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    pub branch_guard: u128,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            branch_guard: DEFAULT_BRANCH_GUARD,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport<T> {
    pub mu: T,
    pub holevo_variance: T,
    pub branches_evaluated: u128,
    pub method: Method,
    pub mc_std_error: Option<T>,
    pub wall_time: Duration,
}

impl<T: Real> EvaluationReport<T> {
    pub(crate) fn new(mu: T, branches: u128, method: Method, mc_std_error: Option<T>, wall_time: Duration) -> Self {
        Self {
            mu,
            holevo_variance: holevo_from_sharpness(mu),
            branches_evaluated: branches,
            method,
            mc_std_error,
            wall_time,
        }
    }

    /// One-sigma uncertainty of the Holevo variance propagated from `mc_std_error`.
    pub fn holevo_std_error(&self) -> Option<T> {
        self.mc_std_error
            .map(|se| T::lit(2.0) * se / self.mu.powi(3))
    }

    pub fn to_record(&self) -> ReportRecord {
        ReportRecord {
            mu: self.mu.to_f64_lossy(),
            holevo_variance: VarianceValue::from(self.holevo_variance.to_f64_lossy()),
            branches_evaluated: u64::try_from(self.branches_evaluated).unwrap_or(u64::MAX),
            method: self.method,
            mc_std_error: self.mc_std_error.map(|v| v.to_f64_lossy()),
            wall_time_ms: self.wall_time.as_secs_f64() * 1e3,
        }
    }
}

/// JSON form of an [`EvaluationReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub mu: f64,
    pub holevo_variance: VarianceValue,
    pub branches_evaluated: u64,
    pub method: Method,
    pub mc_std_error: Option<f64>,
    pub wall_time_ms: f64,
}

/// A finite variance, or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceValue(pub f64);

impl From<f64> for VarianceValue {
    fn from(v: f64) -> Self {
        Self(v)
    }
}

impl fmt::Display for VarianceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for VarianceValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for VarianceValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Self(v)),
            Raw::Str(s) if s == "inf" => Ok(Self(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unexpected variance {s:?}"))),
        }
    }
}
