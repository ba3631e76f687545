//! Bayesian phase posterior as a finite Fourier series.
//!
//! `P(φ) = (1/2π) Σ_{j=−J..J} a_j e^{−ijφ}`, so the circular moment
//! `⟨e^{ikφ}⟩ = a_k / a_0`. A likelihood `Σ_d c_d e^{id(φ−θ)}` multiplies the
//! series exactly:
//!
//! ```text
//! a'_m = Σ_d a_{m+d} c_d e^{−idθ}
//! ```
//!
//! and the band grows by the likelihood's harmonic order `N − L`. No truncation
//! is applied.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lossy_detection::{LikelihoodEntry, Outcome, OutcomeLikelihoodTable};
use crate::scalar::{cis, cx, Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDistribution<T: Real> {
    coeffs: Vec<Cx<T>>,
}

/// Uniform distribution on `[0, 2π)`.
pub fn flat_prior<T: Real>() -> PhaseDistribution<T> {
    PhaseDistribution {
        coeffs: vec![Cx::one()],
    }
}

impl<T: Real> PhaseDistribution<T> {
    /// Builds a distribution from `a_{−J}..=a_J` and normalizes it to `a_0 = 1`.
    pub fn from_coefficients(coeffs: Vec<Cx<T>>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::invalid("coefficient vector must have odd length 2J+1"));
        }
        let j = coeffs.len() / 2;
        let a0 = coeffs[j];
        if a0.re.is_nan() || a0.re <= T::zero() {
            return Err(Error::invalid("a_0 must be positive"));
        }
        let scale = a0.re;
        Ok(Self {
            coeffs: coeffs.into_iter().map(|c| c / scale).collect(),
        })
    }

    pub fn max_harmonic(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// `a_{−J}..=a_J`
    pub fn coefficients(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// `a_j`, zero outside the band.
    pub fn coefficient(&self, j: isize) -> Cx<T> {
        let jm = self.max_harmonic() as isize;
        if j.abs() > jm {
            Cx::zero()
        } else {
            self.coeffs[(j + jm) as usize]
        }
    }

    /// `⟨e^{ikφ}⟩`
    pub fn moment(&self, k: isize) -> Cx<T> {
        self.coefficient(k) / self.coefficient(0).re
    }

    pub fn density(&self, phi: T) -> T {
        let jm = self.max_harmonic() as isize;
        let s = self
            .coeffs
            .iter()
            .enumerate()
            .fold(Cx::<T>::zero(), |acc, (i, &a)| {
                acc + a * cis(-T::from_isize(i as isize - jm).unwrap() * phi)
            });
        s.re / T::TAU()
    }

    /// `P(φ − δ)`: the distribution rotated forward by `δ`.
    pub fn rotated(&self, delta: T) -> Self {
        let jm = self.max_harmonic() as isize;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &a)| a * cis(T::from_isize(i as isize - jm).unwrap() * delta))
            .collect();
        Self { coeffs }
    }

    /// Posterior and evidence `P(u | prior, θ)`.
    ///
    /// A likelihood without harmonics (every photon lost) leaves the
    /// coefficients untouched.
    pub fn bayes_update_with_evidence(
        &self,
        table: &OutcomeLikelihoodTable<T>,
        outcome: Outcome,
        theta: T,
    ) -> Result<(Self, T)> {
        let entry = table.entry(outcome)?;
        if entry.is_identically_zero() {
            return Err(Error::DegenerateUpdate);
        }
        let (next, evidence) = self.multiply(entry, theta);
        if !evidence.is_finite() || evidence <= T::zero() {
            return Err(Error::DegenerateUpdate);
        }
        Ok((next, evidence))
    }

    pub fn bayes_update(
        &self,
        table: &OutcomeLikelihoodTable<T>,
        outcome: Outcome,
        theta: T,
    ) -> Result<Self> {
        self.bayes_update_with_evidence(table, outcome, theta)
            .map(|(d, _)| d)
    }

    /// Normalized product with one likelihood, plus the unnormalized `a'_0`.
    pub(crate) fn multiply(&self, entry: &LikelihoodEntry<T>, theta: T) -> (Self, T) {
        let a0 = self.coefficient(0).re;
        let m = entry.max_harmonic();
        if m == 0 {
            let evidence = entry.harmonic(0).re * a0;
            return (self.clone(), evidence);
        }
        let j = self.max_harmonic();
        let jn = j + m;
        let phases = harmonic_phases(entry, theta);
        let mut out = vec![Cx::zero(); 2 * jn + 1];
        // a'_{q} = Σ_d a_{q+d} w_d with w_d = c_d e^{−idθ}; index shift q ↦ q + jn
        for (ia, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ja = ia as isize - j as isize;
            for (id, &w) in phases.iter().enumerate() {
                let d = id as isize - m as isize;
                let q = ja - d;
                out[(q + jn as isize) as usize] += a * w;
            }
        }
        let evidence = out[jn].re;
        if evidence > T::zero() {
            for c in &mut out {
                *c /= evidence;
            }
            // a_0 is real by construction
            out[jn] = Cx::one();
        }
        (Self { coeffs: out }, evidence / a0)
    }

    /// `|⟨e^{iφ}⟩|`
    pub fn sharpness(&self) -> T {
        self.moment(1).norm()
    }

    /// `μ^{−2} − 1`, infinite for a flat distribution.
    pub fn holevo_variance(&self) -> T {
        holevo_from_sharpness(self.sharpness())
    }

    /// Largest `|a_{−j} − conj(a_j)|`.
    pub fn hermitian_defect(&self) -> T {
        let jm = self.max_harmonic() as isize;
        (0..=jm)
            .map(|j| (self.coefficient(-j) - self.coefficient(j).conj()).norm())
            .fold(T::zero(), T::max)
    }

    pub fn to_record(&self) -> DistributionRecord {
        DistributionRecord {
            max_harmonic: self.max_harmonic(),
            re: self.coeffs.iter().map(|c| c.re.to_f64_lossy()).collect(),
            im: self.coeffs.iter().map(|c| c.im.to_f64_lossy()).collect(),
        }
    }

    pub fn from_record(record: &DistributionRecord) -> Result<Self> {
        let width = 2 * record.max_harmonic + 1;
        if record.re.len() != width || record.im.len() != width {
            return Err(Error::invalid(format!(
                "max_harmonic {} needs {width} coefficients",
                record.max_harmonic
            )));
        }
        let coeffs = record
            .re
            .iter()
            .zip(&record.im)
            .map(|(&re, &im)| cx(T::lit(re), T::lit(im)))
            .collect();
        Self::from_coefficients(coeffs)
    }
}

/// `w_d = c_d e^{−idθ}` for `d = −M..=M`.
pub(crate) fn harmonic_phases<T: Real>(entry: &LikelihoodEntry<T>, theta: T) -> Vec<Cx<T>> {
    let m = entry.max_harmonic() as isize;
    entry
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, &c)| c * cis(-T::from_isize(i as isize - m).unwrap() * theta))
        .collect()
}

/// `μ^{−2} − 1`; `+∞` when `μ` vanishes.
pub fn holevo_from_sharpness<T: Real>(mu: T) -> T {
    if mu <= T::lit(1e-15) {
        T::infinity()
    } else {
        mu.powi(-2) - T::one()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub max_harmonic: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// One detection: photon number of the input state, controlled phase and result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementStep<T> {
    pub n_photons: usize,
    pub theta: T,
    pub outcome: Outcome,
}

/// Successive controlled phases and results.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord<T> {
    pub steps: Vec<MeasurementStep<T>>,
}

impl<T: Real> Default for MeasurementRecord<T> {
    fn default() -> Self {
        Self { steps: Vec::new() }
    }
}

impl<T: Real> MeasurementRecord<T> {
    pub fn push(&mut self, n_photons: usize, theta: T, outcome: Outcome) -> Result<()> {
        if !outcome.is_valid_for(n_photons) {
            return Err(Error::UnknownOutcome {
                lost: outcome.lost,
                detected: outcome.detected,
                n_photons,
            });
        }
        self.steps.push(MeasurementStep {
            n_photons,
            theta: crate::scalar::wrap_phase(theta),
            outcome,
        });
        Ok(())
    }

    /// Replays the record from a flat prior; `table_for` supplies the likelihood of each step.
    pub fn posterior<'a>(
        &self,
        mut table_for: impl FnMut(usize, &MeasurementStep<T>) -> &'a OutcomeLikelihoodTable<T>,
    ) -> Result<PhaseDistribution<T>> {
        let mut post = flat_prior();
        for (i, step) in self.steps.iter().enumerate() {
            let table = table_for(i, step);
            if table.n_photons() != step.n_photons {
                return Err(Error::invalid("table photon number does not match record"));
            }
            post = post.bayes_update(table, step.outcome, step.theta)?;
        }
        Ok(post)
    }
}
