//! Locally optimal controlled phase.
//!
//! The next `θ` maximizes the sharpness expected after one more detection,
//! `Σ_u |a'_1(u, θ)|`, where `a'_1` is the first moment of the unnormalized
//! posterior. Single photons admit a closed form with three candidates; other
//! states are searched numerically.

use num_traits::Zero;

use crate::lossy_detection::{build_likelihood_table, LossChannel, OutcomeLikelihoodTable};
use crate::optim::{find_slope_zero, golden_section_max};
use crate::phase_inference::PhaseDistribution;
use crate::scalar::{cis, cx, wrap_phase, Cx, Real};
use crate::state_prep::make_single_photon;

pub const GRID_POINTS: usize = 64;
pub const REFINE_TOL: f64 = 1e-6;
// relative slack under which two objective values count as a tie
const TIE_TOL: f64 = 1e-12;

/// `Σ_u |a'_1|` as a function of `θ`, precomputed for one prior and one table.
#[derive(Clone, Debug)]
pub struct SharpnessObjective<T: Real> {
    // per outcome: (max harmonic M, a_{1+d} c_d for d = −M..=M)
    terms: Vec<(usize, Vec<Cx<T>>)>,
    max_order: usize,
}

impl<T: Real> SharpnessObjective<T> {
    pub fn new(prior: &PhaseDistribution<T>, table: &OutcomeLikelihoodTable<T>) -> Self {
        let a0 = prior.coefficient(0).re;
        let mut max_order = 0;
        let terms = table
            .entries()
            .iter()
            .filter(|e| !e.is_identically_zero())
            .map(|e| {
                let m = e.max_harmonic();
                max_order = max_order.max(m);
                let products = (0..=2 * m)
                    .map(|i| {
                        let d = i as isize - m as isize;
                        prior.coefficient(1 + d) * e.harmonic(d) / a0
                    })
                    .collect();
                (m, products)
            })
            .collect();
        Self { terms, max_order }
    }

    fn rotations(&self, theta: T) -> Vec<Cx<T>> {
        let mo = self.max_order;
        // rot[mo + d] = e^{−idθ}
        let mut rot = vec![Cx::zero(); 2 * mo + 1];
        rot[mo] = Cx::new(T::one(), T::zero());
        let step = cis(-theta);
        for d in 1..=mo {
            rot[mo + d] = rot[mo + d - 1] * step;
            rot[mo - d] = rot[mo + d].conj();
        }
        rot
    }

    pub fn value(&self, theta: T) -> T {
        let rot = self.rotations(theta);
        self.terms
            .iter()
            .map(|(m, products)| {
                let base = self.max_order - m;
                products
                    .iter()
                    .zip(&rot[base..base + products.len()])
                    .fold(Cx::zero(), |acc, (p, r)| acc + p * r)
                    .norm()
            })
            .sum()
    }

    /// `∂/∂θ` of [`value`](Self::value); outcomes with `a'_1 = 0` contribute nothing.
    pub fn slope(&self, theta: T) -> T {
        let rot = self.rotations(theta);
        self.terms
            .iter()
            .map(|(m, products)| {
                let base = self.max_order - m;
                let (s, ds) = products.iter().zip(&rot[base..base + products.len()]).enumerate().fold(
                    (Cx::<T>::zero(), Cx::<T>::zero()),
                    |(s, ds), (i, (p, r))| {
                        let d = T::from_isize(i as isize - *m as isize).unwrap();
                        let term = p * r;
                        (s + term, ds + term * cx(T::zero(), -d))
                    },
                );
                let norm = s.norm();
                if norm > T::zero() {
                    (s.conj() * ds).re / norm
                } else {
                    T::zero()
                }
            })
            .sum()
    }
}

/// Sharpness expected after the next detection with controlled phase `θ`.
pub fn expected_sharpness<T: Real>(
    prior: &PhaseDistribution<T>,
    table: &OutcomeLikelihoodTable<T>,
    theta: T,
) -> T {
    SharpnessObjective::new(prior, table).value(theta)
}

/// The three stationary-point candidates for a single-photon detection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackCandidateSet<T> {
    pub theta0: T,
    pub theta_plus: T,
    pub theta_minus: T,
}

impl<T: Real> FeedbackCandidateSet<T> {
    pub fn as_array(&self) -> [T; 3] {
        [self.theta0, self.theta_plus, self.theta_minus]
    }
}

/// Closed-form candidates, or `None` when the coefficients are degenerate.
///
/// With `a = ⟨e^{iφ}⟩`, `b = ⟨e^{2iφ}⟩/2`, `c = 1/2`:
/// `c₁ = (a*c)² − (ab*)² + 4(|b|² − |c|²) b*c`, `c₂ = −2i Im(a² b* c*)`,
/// `θ₀ = arg(ba* − c*a)`, `θ± = arg √((c₂ ± √(c₂² + |c₁|²)) / c₁)`.
pub fn single_photon_candidates<T: Real>(
    prior: &PhaseDistribution<T>,
) -> Option<FeedbackCandidateSet<T>> {
    let half = T::lit(0.5);
    let a = prior.moment(1);
    let b = prior.moment(2) * half;
    let c = cx(half, T::zero());
    let four = T::lit(4.0);

    let c1 = (a.conj() * c).powi(2) - (a * b.conj()).powi(2)
        + b.conj() * c * (four * (b.norm_sqr() - c.norm_sqr()));
    let c2 = cx(T::zero(), -T::lit(2.0) * (a * a * b.conj() * c.conj()).im);
    if c1.norm() <= T::lit(1e-14) {
        return None;
    }
    let root = (c2 * c2 + cx(c1.norm_sqr(), T::zero())).sqrt();
    let theta0 = wrap_phase((b * a.conj() - c.conj() * a).arg());
    let theta_plus = wrap_phase(((c2 + root) / c1).sqrt().arg());
    let theta_minus = wrap_phase(((c2 - root) / c1).sqrt().arg());
    Some(FeedbackCandidateSet {
        theta0,
        theta_plus,
        theta_minus,
    })
}

fn lossless_single_photon_table<T: Real>() -> OutcomeLikelihoodTable<T> {
    build_likelihood_table(&make_single_photon(), &LossChannel::lossless())
}

fn is_flat<T: Real>(prior: &PhaseDistribution<T>) -> bool {
    (1..=prior.max_harmonic() as isize).all(|j| prior.coefficient(j).is_zero())
}

/// Controlled phase for a single-photon detection.
///
/// Loss only adds a `θ`-independent outcome, so the lossless objective picks
/// the same phase. A flat prior returns 0.
pub fn optimal_theta_single_photon<T: Real>(prior: &PhaseDistribution<T>) -> T {
    if is_flat(prior) {
        return T::zero();
    }
    let table = lossless_single_photon_table();
    match single_photon_candidates(prior) {
        Some(set) => {
            let objective = SharpnessObjective::new(prior, &table);
            pick_best(set.as_array().iter().map(|&t| (t, objective.value(t))))
        }
        None => optimal_theta_numeric(prior, &table),
    }
}

/// Grid search over 64 phases, then golden-section refinement to `1e-6` rad
/// around every local maximum of the grid and a slope-zero polish. Ties go to
/// the smallest phase.
pub fn optimal_theta_numeric<T: Real>(
    prior: &PhaseDistribution<T>,
    table: &OutcomeLikelihoodTable<T>,
) -> T {
    if is_flat(prior) {
        return T::zero();
    }
    let objective = SharpnessObjective::new(prior, table);
    let step = T::TAU() / T::from_count(GRID_POINTS);
    let values: Vec<T> = (0..GRID_POINTS)
        .map(|i| objective.value(T::from_count(i) * step))
        .collect();
    let hi_v = values.iter().copied().fold(T::neg_infinity(), T::max);
    let lo_v = values.iter().copied().fold(T::infinity(), T::min);
    if !exceeds(hi_v, lo_v) {
        return T::zero();
    }
    let peaks = (0..GRID_POINTS).filter(|&i| {
        let prev = values[(i + GRID_POINTS - 1) % GRID_POINTS];
        let next = values[(i + 1) % GRID_POINTS];
        values[i] >= prev && values[i] >= next
    });
    pick_best(peaks.map(|i| {
        let center = T::from_count(i) * step;
        let (theta, value) = golden_section_max(
            |t| objective.value(t),
            center - step,
            center + step,
            T::lit(REFINE_TOL),
        );
        let (theta, value) = if value > values[i] { (theta, value) } else { (center, values[i]) };
        polish(&objective, theta, value)
    }))
}

/// Pins a refined maximum to machine precision by finding the zero of the
/// slope near it. Phases that differ only by rounding in the prior then stay
/// within rounding of each other.
fn polish<T: Real>(objective: &SharpnessObjective<T>, theta: T, value: T) -> (T, T) {
    let h = T::lit(2.0 * REFINE_TOL);
    let polished = find_slope_zero(|t| objective.slope(t), theta - h, theta + h, 100)
        .map(|t| (t, objective.value(t)))
        .filter(|&(_, v)| !exceeds(value, v));
    let (t, v) = polished.unwrap_or((theta, value));
    (wrap_phase(t), v)
}

fn exceeds<T: Real>(v: T, reference: T) -> bool {
    v > reference + T::lit(TIE_TOL) * reference.abs().max(T::one())
}

fn pick_best<T: Real>(candidates: impl Iterator<Item = (T, T)>) -> T {
    let mut best: Option<(T, T)> = None;
    for (t, v) in candidates {
        best = match best {
            Some((bt, bv)) if !exceeds(v, bv) => Some((bt, bv)),
            _ => Some((t, v)),
        };
    }
    best.map_or(T::zero(), |(t, _)| t)
}
