//! Brute-force detection probabilities by explicit Fock-space propagation.
//!
//! Shares only the physical conventions with the coefficient tables: the state is
//! expanded on four modes (two detectors, two loss reservoirs) and probabilities
//! are summed over reservoir occupations.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::{LossChannel, Outcome};
use crate::error::{Error, Result};
use crate::fock::CreationPolynomial;
use crate::scalar::{cis, cx, factorial, Cx, Real};
use crate::state_prep::TwoModeState;

pub const ORACLE_MAX_PHOTONS: usize = 6;

/// `P_{L,k}(φ, θ)` for every outcome, by state-vector simulation.
pub fn oracle_probabilities<T: Real>(
    state: &TwoModeState<T>,
    channel: &LossChannel<T>,
    phi: T,
    theta: T,
) -> Result<BTreeMap<Outcome, T>> {
    let n = state.n_photons();
    if n > ORACLE_MAX_PHOTONS {
        return Err(Error::DimensionGuard {
            n_photons: n,
            max: ORACLE_MAX_PHOTONS,
        });
    }

    // modes: 0,1 = interferometer arms
    let mut arms = CreationPolynomial::zero(2);
    for k in 0..=n {
        let phase = cis(T::from_count(n - k) * phi + T::from_count(k) * theta);
        let norm = (factorial::<T>(n - k) * factorial::<T>(k)).sqrt();
        arms.add_term(vec![(n - k) as u32, k as u32], state.amplitude(k) * phase / norm);
    }

    // loss: bⱼ† → √η bⱼ† + i√(1−η) cⱼ†; modes become [b₁, b₂, c₁, c₂]
    let t = cx(channel.eta().sqrt(), T::zero());
    let r = cx(T::zero(), (T::one() - channel.eta()).sqrt());
    let z = Cx::zero();
    let after_loss = arms.substitute(&[vec![t, z, r, z], vec![z, t, z, r]]);

    // 50/50 splitter on the arms; loss modes pass through
    let h = cx(T::FRAC_1_SQRT_2(), T::zero());
    let one = cx(T::one(), T::zero());
    let out = after_loss.substitute(&[
        vec![h, h, z, z],
        vec![h, -h, z, z],
        vec![z, z, one, z],
        vec![z, z, z, one],
    ]);

    let mut probs: BTreeMap<Outcome, T> = super::outcomes(n).map(|o| (o, T::zero())).collect();
    for (occ, amp) in out.fock_amplitudes() {
        let lost = (occ[2] + occ[3]) as usize;
        let outcome = Outcome::new(lost, occ[1] as usize);
        *probs.get_mut(&outcome).expect("photon number conserved") += amp.norm_sqr();
    }
    Ok(probs)
}
