//! Search over grouped measurement sequences at a fixed photon budget.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_exact, evaluate_exact_with_speedup, evaluate_monte_carlo, EvalOptions, EvaluationReport,
    Method, SequencePlan, VarianceValue,
};
use crate::scalar::Real;

// relative slack under which two variances count as equal
const VARIANCE_TIE_TOL: f64 = 1e-12;

/// How each candidate plan is scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Evaluator {
    Exact,
    ExactWithSpeedup,
    MonteCarlo { trials: usize, seed: u64 },
}

impl Evaluator {
    pub fn evaluate<T: Real>(&self, plan: &SequencePlan<T>, options: &EvalOptions) -> Result<EvaluationReport<T>> {
        match *self {
            Evaluator::Exact => evaluate_exact(plan, options),
            Evaluator::ExactWithSpeedup => evaluate_exact_with_speedup(plan, options),
            Evaluator::MonteCarlo { trials, seed } => evaluate_monte_carlo(plan, trials, seed),
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Evaluator::Exact => Method::Exact,
            Evaluator::ExactWithSpeedup => Method::ExactWithSpeedup,
            Evaluator::MonteCarlo { .. } => Method::MonteCarlo,
        }
    }
}

/// `χ` values `0, s, 2s, …` up to 2, rounded to 12 decimals so that
/// multiples of 0.1 land on their shortest decimal form.
pub fn chi_grid<T: Real>(step: f64) -> Result<Vec<T>> {
    if !(step > 0.0 && step <= 2.0) {
        return Err(Error::invalid(format!("chi grid step must lie in (0, 2], got {step}")));
    }
    let count = (2.0 / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| T::lit(((i as f64 * step) * 1e12).round() / 1e12))
        .collect())
}

/// Every grouped plan with `N₁ + 2N₂ + 4N₄ = total_photons`, ordered by `N₄`,
/// then `N₂`, then `χ₂`, then `χ₄`.
pub fn enumerate_plans<T: Real>(total_photons: usize, chi_grid_step: f64, eta: T) -> Result<Vec<SequencePlan<T>>> {
    if total_photons == 0 {
        return Err(Error::invalid("total_photons must be at least 1"));
    }
    let grid = chi_grid::<T>(chi_grid_step)?;
    let options = |count: usize| -> Vec<Option<T>> {
        if count == 0 {
            vec![None]
        } else {
            grid.iter().copied().map(Some).collect()
        }
    };
    let mut plans = Vec::new();
    for n4 in 0..=total_photons / 4 {
        for n2 in 0..=(total_photons - 4 * n4) / 2 {
            let n1 = total_photons - 4 * n4 - 2 * n2;
            for &chi2 in &options(n2) {
                for &chi4 in &options(n4) {
                    plans.push(SequencePlan::new(n1, n2, chi2, n4, chi4, eta)?);
                }
            }
        }
    }
    Ok(plans)
}

/// One evaluated candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct ParetoEntry<T> {
    pub plan: SequencePlan<T>,
    pub report: EvaluationReport<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult<T> {
    pub total_photons: usize,
    pub eta: T,
    pub best_plan: SequencePlan<T>,
    pub best_variance: T,
    pub pareto_table: Vec<ParetoEntry<T>>,
}

/// Flat row of the pareto table, also the CSV layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub n1: usize,
    pub n2: usize,
    pub chi2: Option<f64>,
    pub n4: usize,
    pub chi4: Option<f64>,
    pub eta: f64,
    pub mu: f64,
    pub holevo_variance: VarianceValue,
    pub branches: u64,
    pub method: Method,
}

/// JSON form of an [`OptimizationResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub total_photons: usize,
    pub eta: f64,
    pub best_plan: SequencePlan<f64>,
    pub best_variance: VarianceValue,
    pub pareto_table: Vec<ParetoRow>,
}

fn plan_to_f64<T: Real>(p: &SequencePlan<T>) -> SequencePlan<f64> {
    SequencePlan {
        n1: p.n1,
        n2: p.n2,
        chi2: p.chi2.map(Real::to_f64_lossy),
        n4: p.n4,
        chi4: p.chi4.map(Real::to_f64_lossy),
        eta: p.eta.to_f64_lossy(),
    }
}

impl<T: Real> OptimizationResult<T> {
    pub fn rows(&self) -> Vec<ParetoRow> {
        self.pareto_table
            .iter()
            .map(|e| {
                let plan = plan_to_f64(&e.plan);
                let report = e.report.to_record();
                ParetoRow {
                    n1: plan.n1,
                    n2: plan.n2,
                    chi2: plan.chi2,
                    n4: plan.n4,
                    chi4: plan.chi4,
                    eta: plan.eta,
                    mu: report.mu,
                    holevo_variance: report.holevo_variance,
                    branches: report.branches_evaluated,
                    method: report.method,
                }
            })
            .collect()
    }

    pub fn to_record(&self) -> OptimizationRecord {
        OptimizationRecord {
            total_photons: self.total_photons,
            eta: self.eta.to_f64_lossy(),
            best_plan: plan_to_f64(&self.best_plan),
            best_variance: VarianceValue(self.best_variance.to_f64_lossy()),
            pareto_table: self.rows(),
        }
    }

    /// Writes the pareto table as CSV with header
    /// `n1,n2,chi2,n4,chi4,eta,mu,holevo_variance,branches,method`.
    pub fn write_pareto_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()
    }
}

/// Orders candidates by variance, then larger `N₁`, smaller `χ₂`, smaller `χ₄`.
fn compare<T: Real>(a: &ParetoEntry<T>, b: &ParetoEntry<T>) -> Ordering {
    let (va, vb) = (a.report.holevo_variance, b.report.holevo_variance);
    let scale = va.abs().min(vb.abs()).max(T::one());
    if (va - vb).abs() > T::lit(VARIANCE_TIE_TOL) * scale || va.is_infinite() != vb.is_infinite() {
        return va.partial_cmp(&vb).unwrap_or(Ordering::Equal);
    }
    let chi = |c: Option<T>| c.unwrap_or(T::zero());
    b.plan
        .n1
        .cmp(&a.plan.n1)
        .then(chi(a.plan.chi2).partial_cmp(&chi(b.plan.chi2)).unwrap_or(Ordering::Equal))
        .then(chi(a.plan.chi4).partial_cmp(&chi(b.plan.chi4)).unwrap_or(Ordering::Equal))
}

/// Evaluates every plan from [`enumerate_plans`] and returns the minimizer of
/// the Holevo variance, with the default branch guard.
pub fn optimize<T: Real>(
    total_photons: usize,
    eta: T,
    chi_grid_step: f64,
    evaluator: Evaluator,
) -> Result<OptimizationResult<T>> {
    optimize_with(total_photons, eta, chi_grid_step, evaluator, &EvalOptions::default())
}

pub fn optimize_with<T: Real>(
    total_photons: usize,
    eta: T,
    chi_grid_step: f64,
    evaluator: Evaluator,
    options: &EvalOptions,
) -> Result<OptimizationResult<T>> {
    let plans = enumerate_plans(total_photons, chi_grid_step, eta)?;
    let reports: Vec<Result<EvaluationReport<T>>> = plans
        .par_iter()
        .map(|plan| evaluator.evaluate(plan, options))
        .collect();
    let mut table = Vec::with_capacity(plans.len());
    for (plan, report) in plans.into_iter().zip(reports) {
        let report = report.map_err(|e| Error::Plan {
            plan: plan.to_string(),
            source: Box::new(e),
        })?;
        table.push(ParetoEntry { plan, report });
    }
    let best = table
        .iter()
        .reduce(|best, e| if compare(e, best) == Ordering::Less { e } else { best })
        .expect("at least the all-single-photon plan");
    Ok(OptimizationResult {
        total_photons,
        eta,
        best_plan: best.plan,
        best_variance: best.report.holevo_variance,
        pareto_table: table,
    })
}

/// Holevo variance of `N` single photons, evaluated with the binomial speedup.
pub fn sql_baseline<T: Real>(total_photons: usize, eta: T) -> Result<T> {
    sql_baseline_with(total_photons, eta, &EvalOptions::default())
}

pub fn sql_baseline_with<T: Real>(total_photons: usize, eta: T, options: &EvalOptions) -> Result<T> {
    if total_photons == 0 {
        return Err(Error::invalid("total_photons must be at least 1"));
    }
    let plan = SequencePlan::single_photons(total_photons, eta)?;
    Ok(evaluate_exact_with_speedup(&plan, options)?.holevo_variance)
}
