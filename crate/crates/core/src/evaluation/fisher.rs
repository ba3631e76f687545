//! Fisher information `F(φ, θ) = Σ_u (∂P_u/∂φ)² / P_u` and its maxima.

use crate::error::{Error, Result};
use crate::lossy_detection::{build_likelihood_table, LossChannel, OutcomeLikelihoodTable};
use crate::optim::{golden_section_max, nelder_mead_max2};
use crate::scalar::Real;
use crate::state_prep::{
    make_exact_optimal4, make_loss_resistant, ExactOptimalSpec, LossResistantSpec, TwoModeState,
};

/// Number of φ samples before refinement when maximizing over φ.
pub const FISHER_PHI_GRID: usize = 256;

const ZERO_PROBABILITY: f64 = 1e-12;
const ZERO_SLOPE: f64 = 1e-9;
const CHI_STEP: f64 = 0.02;

/// `F(φ, θ)` from the Fourier coefficients of a table.
///
/// Terms with `P < 1e-12` and `|∂P/∂φ| < 1e-9` are dropped. A vanishing
/// probability with a larger slope is reported as [`Error::FisherDivergence`].
pub fn fisher_from_table<T: Real>(table: &OutcomeLikelihoodTable<T>, phi: T, theta: T) -> Result<T> {
    let x = phi - theta;
    let mut total = T::zero();
    for entry in table.entries() {
        let (p, slope) = entry.value_and_slope(x);
        if p < T::lit(ZERO_PROBABILITY) {
            if slope.abs() < T::lit(ZERO_SLOPE) {
                continue;
            }
            let outcome = entry.outcome();
            return Err(Error::FisherDivergence {
                phi: phi.to_f64_lossy(),
                lost: outcome.lost,
                detected: outcome.detected,
            });
        }
        total += slope * slope / p;
    }
    Ok(total)
}

pub fn fisher_information<T: Real>(state: &TwoModeState<T>, eta: T, phi: T, theta: T) -> Result<T> {
    let table = build_likelihood_table(state, &LossChannel::new(eta)?);
    fisher_from_table(&table, phi, theta)
}

/// Maximum of `F(·, θ)` over φ: 256-point grid, then golden-section refinement.
/// Divergent grid points are stepped over.
pub fn max_fisher_over_phi<T: Real>(table: &OutcomeLikelihoodTable<T>, theta: T) -> Result<(T, T)> {
    let step = T::TAU() / T::from_count(FISHER_PHI_GRID);
    let f = |phi: T| fisher_from_table(table, phi, theta).unwrap_or(T::neg_infinity());
    let mut best: Option<(T, T)> = None;
    for i in 0..FISHER_PHI_GRID {
        let phi = T::from_count(i) * step;
        let v = f(phi);
        if v.is_finite() && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((phi, v));
        }
    }
    let (phi0, f0) = best.ok_or(Error::FisherDivergence {
        phi: f64::NAN,
        lost: 0,
        detected: 0,
    })?;
    let (phi1, f1) = golden_section_max(f, phi0 - step, phi0 + step, T::lit(1e-9));
    Ok(if f1 > f0 { (phi1, f1) } else { (phi0, f0) })
}

fn max_fisher_loss_resistant<T: Real>(half_n: usize, chi: T, channel: &LossChannel<T>, theta: T) -> Result<T> {
    let state = make_loss_resistant(&LossResistantSpec::new(half_n, chi)?)?;
    let table = build_likelihood_table(&state, channel);
    max_fisher_over_phi(&table, theta).map(|(_, f)| f)
}

/// Best `χ ∈ [0, 2]` for the two- or four-photon loss-resistant state: grid of
/// step 0.02 then golden-section refinement. Ties go to the smaller `χ`.
pub fn max_fisher_over_chi<T: Real>(n_photons: usize, eta: T, theta: T) -> Result<(T, T)> {
    let half_n = match n_photons {
        2 => 1,
        4 => 2,
        _ => return Err(Error::invalid(format!("n_photons must be 2 or 4, got {n_photons}"))),
    };
    let channel = LossChannel::new(eta)?;
    let step = T::lit(CHI_STEP);
    let points = (2.0 / CHI_STEP).round() as usize;
    let mut best = (T::zero(), T::neg_infinity());
    for i in 0..=points {
        let chi = T::from_count(i) * step;
        let v = max_fisher_loss_resistant(half_n, chi, &channel, theta)?;
        if v > best.1 {
            best = (chi, v);
        }
    }
    let lo = (best.0 - step).max(T::zero());
    let hi = (best.0 + step).min(T::lit(2.0));
    let (chi, v) = golden_section_max(
        |c| max_fisher_loss_resistant(half_n, c, &channel, theta).unwrap_or(T::neg_infinity()),
        lo,
        hi,
        T::lit(1e-6),
    );
    Ok(if v > best.1 { (chi, v) } else { best })
}

fn max_fisher_exact4<T: Real>(p: [T; 2], channel: &LossChannel<T>, theta: T) -> T {
    let spec = ExactOptimalSpec {
        chi1p: p[0],
        chi2p: p[1],
    };
    make_exact_optimal4(&spec)
        .and_then(|s| max_fisher_over_phi(&build_likelihood_table(&s, channel), theta))
        .map_or(T::neg_infinity(), |(_, f)| f)
}

/// Best four-photon state of the two-parameter symmetric family.
///
/// Coarse grid `χ′₁ ∈ [0, 4]`, `χ′₂ ∈ [−4, 4]` at step 0.2, plus the optimum of
/// the one-parameter slice as a seed, refined by Nelder–Mead. Negative `χ′₁`
/// is covered by the φ maximization since it only flips the sign of odd
/// amplitudes.
pub fn max_fisher_exact_optimal4<T: Real>(eta: T, theta: T) -> Result<(T, T, T)> {
    let channel = LossChannel::new(eta)?;
    let step = T::lit(0.2);
    let f = |p: [T; 2]| max_fisher_exact4(p, &channel, theta);

    let mut best = ([T::zero(), T::zero()], T::neg_infinity());
    for i in 0..=20 {
        for j in 0..=40 {
            let p = [T::from_count(i) * step, T::from_count(j) * step - T::lit(4.0)];
            let v = f(p);
            if v > best.1 {
                best = (p, v);
            }
        }
    }
    let (chi, _) = max_fisher_over_chi(4, eta, theta)?;
    let slice = [chi, (T::lit(2.0) + chi * chi) / T::lit(6.0).sqrt()];
    let slice_v = f(slice);

    let mut result = if slice_v > best.1 { (slice, slice_v) } else { best };
    for start in [best.0, slice] {
        let (p, v) = nelder_mead_max2(f, start, T::lit(0.05), T::lit(1e-10), 2000);
        if v > result.1 {
            result = (p, v);
        }
    }
    let ([c1, c2], v) = result;
    Ok((c1.abs(), c2, v))
}
