//! Two-mode input states and the three-port network that heralds them.
//!
//! The loss-resistant family is `[(b₁†)² + χ b₁†b₂† + (b₂†)²]ⁿ |0,0⟩` with
//! `χ ∈ [0, 2]`. It is produced from the dual Fock state `|n,n,0⟩` by three
//! beam splitters and two phase shifters, post-selecting vacuum in the third
//! output mode.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::CreationPolynomial;
use crate::scalar::{cis, cx, Cx, Real};

/// `Σₖ ψₖ |N−k, k⟩`, always normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState<T: Real> {
    amplitudes: Vec<Cx<T>>,
}

impl<T: Real> TwoModeState<T> {
    /// Builds a state from unnormalized amplitudes ordered `k = 0..=N`.
    pub fn new(amplitudes: Vec<Cx<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("a two-mode state needs at least one amplitude"));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("non-finite amplitude"));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        if norm <= T::min_positive_value() {
            return Err(Error::invalid("zero state vector"));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[T]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| cx(a, T::zero())).collect())
    }

    /// Total photon number `N`.
    pub fn n_photons(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Cx<T>] {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> Cx<T> {
        self.amplitudes.get(k).copied().unwrap_or_else(Cx::zero)
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|⟨self|other⟩|`, insensitive to a global phase.
    pub fn fidelity(&self, other: &Self) -> T {
        if self.n_photons() != other.n_photons() {
            return T::zero();
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .fold(Cx::zero(), |acc, z| acc + z)
            .norm()
    }

    /// True when `ψₖ = ψ_{N−k}` to within `tol`.
    pub fn is_symmetric(&self, tol: T) -> bool {
        let n = self.n_photons();
        (0..=n).all(|k| (self.amplitudes[k] - self.amplitudes[n - k]).norm() <= tol)
    }

    /// Copy multiplied by a global phase so that the largest amplitude is real positive.
    pub fn phase_aligned(&self) -> Self {
        let pivot = self
            .amplitudes
            .iter()
            .copied()
            .fold(Cx::zero(), |best: Cx<T>, a| if a.norm() > best.norm() { a } else { best });
        let rot = if pivot.norm() > T::zero() {
            pivot.conj() / pivot.norm()
        } else {
            Cx::one()
        };
        Self {
            amplitudes: self.amplitudes.iter().map(|&a| a * rot).collect(),
        }
    }
}

/// Parameters of the loss-resistant family: `N = 2n` photons and the mixing ratio `χ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossResistantSpec<T> {
    pub half_n: usize,
    pub chi: T,
}

impl<T: Real> LossResistantSpec<T> {
    pub fn new(half_n: usize, chi: T) -> Result<Self> {
        let spec = Self { half_n, chi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_n == 0 {
            return Err(Error::invalid("half_n must be at least 1"));
        }
        if !(self.chi >= T::zero() && self.chi <= T::lit(2.0)) {
            return Err(Error::invalid(format!("chi must lie in [0, 2], got {}", self.chi)));
        }
        Ok(())
    }

    pub fn n_photons(&self) -> usize {
        2 * self.half_n
    }
}

/// Reflectivities and phase shifts of the three-port heralding network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriPortConfig<T> {
    pub r1: T,
    pub r2: T,
    pub r3: T,
    pub phi1: T,
    pub phi2: T,
}

impl<T: Real> TriPortConfig<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("r1", self.r1), ("r2", self.r2), ("r3", self.r3)] {
            if !(r >= T::zero() && r <= T::one()) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {r}")));
            }
        }
        if !self.phi1.is_finite() || !self.phi2.is_finite() {
            return Err(Error::invalid("phase shifts must be finite"));
        }
        Ok(())
    }

    /// Overall mode map `aᵢ† = Σⱼ U[i][j] bⱼ†` of the network.
    ///
    /// Elements in order: splitter R₁ on modes 2,3; phase φ₁ on mode 3;
    /// splitter R₂ on modes 1,2; splitter R₃ on modes 2,3; phase φ₂ on mode 2.
    pub fn mode_map(&self) -> [[Cx<T>; 3]; 3] {
        let bs1 = splitter(1, 2, self.r1);
        let ps1 = phase(2, self.phi1);
        let bs2 = splitter(0, 1, self.r2);
        let bs3 = splitter(1, 2, self.r3);
        let ps2 = phase(1, self.phi2);
        [bs1, ps1, bs2, bs3, ps2]
            .iter()
            .fold(identity(), |acc, m| matmul(&acc, m))
    }
}

/// Four-photon symmetric states with two free real parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactOptimalSpec<T> {
    pub chi1p: T,
    pub chi2p: T,
}

/// Expands `[(b₁†)² + χ b₁†b₂† + (b₂†)²]ⁿ |0,0⟩` in the `|N−k, k⟩` basis.
pub fn make_loss_resistant<T: Real>(spec: &LossResistantSpec<T>) -> Result<TwoModeState<T>> {
    spec.validate()?;
    let mut quadratic = CreationPolynomial::zero(2);
    quadratic.add_term(vec![2, 0], Cx::one());
    quadratic.add_term(vec![1, 1], cx(spec.chi, T::zero()));
    quadratic.add_term(vec![0, 2], Cx::one());
    let poly = quadratic.pow(spec.half_n as u32);
    two_mode_from_polynomial(&poly, spec.n_photons())
}

/// Beam-splitter reflectivities and phases that herald the loss-resistant state for `χ`.
pub fn synthesize_triport<T: Real>(spec: &LossResistantSpec<T>) -> Result<TriPortConfig<T>> {
    spec.validate()?;
    let chi = spec.chi;
    let one = T::one();
    let two = T::lit(2.0);
    let arg = (chi - one) * (two + chi).sqrt() / two;
    // |arg| ≤ 1 on [0, 2]; tolerate rounding at the endpoints only
    let slack = T::epsilon() * T::lit(8.0);
    if arg.abs() > one + slack {
        return Err(Error::invalid(format!("arcsin argument {arg} outside [-1, 1] for chi={chi}")));
    }
    let config = TriPortConfig {
        r1: one / (one + chi),
        r2: one / (two + chi),
        r3: one / (one + chi),
        phi1: arg.max(-one).min(one).asin(),
        phi2: (chi / two).max(-one).min(one).acos(),
    };
    Ok(config)
}

/// Propagates `|n,n,0⟩` through the network and post-selects vacuum in output mode 3.
pub fn forward_simulate_triport<T: Real>(
    config: &TriPortConfig<T>,
    half_n: usize,
) -> Result<TwoModeState<T>> {
    config.validate()?;
    if half_n == 0 {
        return Err(Error::invalid("half_n must be at least 1"));
    }
    let mut input = CreationPolynomial::zero(3);
    input.add_term(vec![half_n as u32, half_n as u32, 0], Cx::one());
    let map: Vec<Vec<Cx<T>>> = config.mode_map().iter().map(|row| row.to_vec()).collect();
    let mut out = input.substitute(&map);
    out.retain(|e| e[2] == 0);
    let two_mode = {
        let mut p = CreationPolynomial::zero(2);
        for (e, &c) in out.terms() {
            p.add_term(vec![e[0], e[1]], c);
        }
        p
    };
    two_mode_from_polynomial(&two_mode, 2 * half_n)
}

/// `|0,4⟩ + χ′₁|1,3⟩ + χ′₂|2,2⟩ + χ′₁|3,1⟩ + |4,0⟩`, normalized.
pub fn make_exact_optimal4<T: Real>(spec: &ExactOptimalSpec<T>) -> Result<TwoModeState<T>> {
    if !spec.chi1p.is_finite() || !spec.chi2p.is_finite() {
        return Err(Error::invalid("exact-optimal parameters must be finite"));
    }
    TwoModeState::from_real(&[T::one(), spec.chi1p, spec.chi2p, spec.chi1p, T::one()])
}

/// `(|1,0⟩ + |0,1⟩)/√2`
pub fn make_single_photon<T: Real>() -> TwoModeState<T> {
    TwoModeState::from_real(&[T::one(), T::one()]).expect("nonzero state")
}

fn two_mode_from_polynomial<T: Real>(
    poly: &CreationPolynomial<T>,
    n_photons: usize,
) -> Result<TwoModeState<T>> {
    let amps = poly.fock_amplitudes();
    let amplitudes = (0..=n_photons)
        .map(|k| {
            let key = vec![(n_photons - k) as u32, k as u32];
            amps.get(&key).copied().unwrap_or_else(Cx::zero)
        })
        .collect();
    TwoModeState::new(amplitudes)
}

fn identity<T: Real>() -> [[Cx<T>; 3]; 3] {
    let mut m = [[Cx::zero(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Cx::one();
    }
    m
}

// prev_p = i√R next_p + √T next_q ; prev_q = √T next_p + i√R next_q
fn splitter<T: Real>(p: usize, q: usize, reflectivity: T) -> [[Cx<T>; 3]; 3] {
    let mut m = identity();
    let r = cx(T::zero(), reflectivity.sqrt());
    let t = cx((T::one() - reflectivity).max(T::zero()).sqrt(), T::zero());
    m[p][p] = r;
    m[p][q] = t;
    m[q][p] = t;
    m[q][q] = r;
    m
}

fn phase<T: Real>(mode: usize, angle: T) -> [[Cx<T>; 3]; 3] {
    let mut m = identity();
    m[mode][mode] = cis(angle);
    m
}

fn matmul<T: Real>(a: &[[Cx<T>; 3]; 3], b: &[[Cx<T>; 3]; 3]) -> [[Cx<T>; 3]; 3] {
    let mut out = [[Cx::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).fold(Cx::zero(), |acc, k| acc + a[i][k] * b[k][j]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn spec(n: usize, chi: f64) -> LossResistantSpec<f64> {
        LossResistantSpec::new(n, chi).unwrap()
    }

    fn assert_real_amps(state: &TwoModeState<f64>, expected_unnormalized: &[f64]) {
        let expected = TwoModeState::from_real(expected_unnormalized).unwrap();
        for (a, b) in state.amplitudes().iter().zip(expected.amplitudes()) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn two_photon_noon_at_zero_chi() {
        let s = make_loss_resistant(&spec(1, 0.0)).unwrap();
        assert_real_amps(&s, &[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]);
    }

    #[test]
    fn two_photon_expansion() {
        let s = make_loss_resistant(&spec(1, 1.7)).unwrap();
        assert_real_amps(&s, &[2f64.sqrt(), 1.7, 2f64.sqrt()]);
    }

    #[test]
    fn four_photon_expansion_at_unit_chi() {
        let s = make_loss_resistant(&spec(2, 1.0)).unwrap();
        assert_real_amps(&s, &[1.0, 1.0, 3.0 / 6f64.sqrt(), 1.0, 1.0]);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(LossResistantSpec::new(1, 2.5).is_err());
        assert!(LossResistantSpec::new(1, -0.1).is_err());
        assert!(LossResistantSpec::new(0, 1.0).is_err());
        assert!(LossResistantSpec::new(1, f64::NAN).is_err());
        let bad = LossResistantSpec { half_n: 1, chi: 3.0 };
        assert!(make_loss_resistant(&bad).is_err());
        assert!(synthesize_triport(&bad).is_err());
    }

    #[test]
    fn triport_parameters() {
        let c = synthesize_triport(&spec(1, 1.0)).unwrap();
        assert!((c.r1 - 0.5).abs() < 1e-15 && (c.r3 - 0.5).abs() < 1e-15);
        assert!((c.r2 - 1.0 / 3.0).abs() < 1e-15);
        assert!(c.phi1.abs() < 1e-15);
        assert!((c.phi2 - FRAC_PI_3).abs() < 1e-15);

        let c = synthesize_triport(&spec(1, 0.0)).unwrap();
        assert_eq!((c.r1, c.r3), (1.0, 1.0));
        assert!((c.r2 - 0.5).abs() < 1e-15);
        assert!((c.phi1 + FRAC_PI_4).abs() < 1e-15);
        assert!((c.phi2 - FRAC_PI_2).abs() < 1e-15);

        let c = synthesize_triport(&spec(1, 2.0)).unwrap();
        assert!((c.r1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.r2 - 0.25).abs() < 1e-15);
        assert!((c.phi1 - FRAC_PI_2).abs() < 1e-12);
        assert!(c.phi2.abs() < 1e-15);
    }

    #[test]
    fn forward_simulation_matches_family() {
        for (n, chi) in [(1, 1.0), (1, 0.0), (2, 1.3), (3, 0.45)] {
            let target = make_loss_resistant(&spec(n, chi)).unwrap();
            let out = forward_simulate_triport(&synthesize_triport(&spec(n, chi)).unwrap(), n).unwrap();
            assert!((out.fidelity(&target) - 1.0).abs() < 1e-10, "n={n} chi={chi}");
        }
        let noon = TwoModeState::from_real(&[1.0, 0.0, 1.0]).unwrap();
        let out = forward_simulate_triport(&synthesize_triport(&spec(1, 0.0)).unwrap(), 1).unwrap();
        assert!((out.fidelity(&noon) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn forward_simulation_preconditions() {
        let c = synthesize_triport(&spec(1, 1.0)).unwrap();
        assert!(forward_simulate_triport(&c, 0).is_err());
        let bad = TriPortConfig { r1: 1.5, ..c };
        assert!(forward_simulate_triport(&bad, 1).is_err());
    }

    #[test]
    fn exact_optimal_family() {
        let noon = make_exact_optimal4(&ExactOptimalSpec { chi1p: 0.0, chi2p: 0.0 }).unwrap();
        assert_real_amps(&noon, &[1.0, 0.0, 0.0, 0.0, 1.0]);

        let flat = make_exact_optimal4(&ExactOptimalSpec { chi1p: 1.0, chi2p: 1.0 }).unwrap();
        for a in flat.amplitudes() {
            assert!((a.re - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        }

        for chi in [0.0, 0.4, 1.3, 2.0] {
            let slice = ExactOptimalSpec { chi1p: chi, chi2p: (2.0 + chi * chi) / 6f64.sqrt() };
            let a = make_exact_optimal4(&slice).unwrap().phase_aligned();
            let b = make_loss_resistant(&spec(2, chi)).unwrap().phase_aligned();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
        assert!(make_exact_optimal4(&ExactOptimalSpec { chi1p: f64::INFINITY, chi2p: 0.0 }).is_err());
    }

    #[test]
    fn single_photon() {
        let s = make_single_photon::<f64>();
        assert_eq!(s.n_photons(), 1);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(s.amplitude(0), s.amplitude(1));
        assert!((s.amplitude(0).re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn fidelity_ignores_global_phase() {
        let a = make_loss_resistant(&spec(2, 0.7)).unwrap();
        let rotated = TwoModeState::new(a.amplitudes().iter().map(|z| z * cis(PI / 3.0)).collect()).unwrap();
        assert!((a.fidelity(&rotated) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let s = make_loss_resistant(&LossResistantSpec::new(2, 1.3f32).unwrap()).unwrap();
        let out = forward_simulate_triport(&synthesize_triport(&LossResistantSpec::new(2, 1.3f32).unwrap()).unwrap(), 2).unwrap();
        assert!((out.fidelity(&s) - 1.0).abs() < 1e-5);
    }
}
