//! Detection statistics of the lossy two-arm interferometer.
//!
//! Each arm carries a phase (`φ` on arm 1, `θ` on arm 2), then a fictitious
//! beam splitter of transmissivity `η`, then both arms meet on a 50/50 splitter
//! with `b₁† → (d₁† + d₂†)/√2`, `b₂† → (d₁† − d₂†)/√2`. An outcome `(L, k)`
//! records `L` photons lost and `k` photons counted in output `d₂`.
//!
//! Every probability is a trigonometric polynomial in `φ − θ`:
//! `P_{L,k} = Σ_d c_d e^{i d (φ−θ)}` with `|d| ≤ N − L`. Tables store the `c_d`.

pub mod oracle;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{binomial, cis, cx, factorial, Cx, Real};
use crate::state_prep::TwoModeState;

pub use oracle::{oracle_probabilities, ORACLE_MAX_PHOTONS};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossChannel<T> {
    eta: T,
}

impl<T: Real> LossChannel<T> {
    pub fn new(eta: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::invalid(format!("efficiency must lie in [0, 1], got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn lossless() -> Self {
        Self { eta: T::one() }
    }

    pub fn eta(&self) -> T {
        self.eta
    }
}

/// `L` photons lost, `k` detected in output port 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Outcome {
    pub lost: usize,
    pub detected: usize,
}

impl Outcome {
    pub const fn new(lost: usize, detected: usize) -> Self {
        Self { lost, detected }
    }

    pub fn is_valid_for(&self, n_photons: usize) -> bool {
        self.lost <= n_photons && self.detected <= n_photons - self.lost
    }
}

/// Number of distinct `(L, k)` outcomes for `N` photons.
pub fn outcome_count(n_photons: usize) -> usize {
    (n_photons + 1) * (n_photons + 2) / 2
}

/// All outcomes ordered by `L`, then `k`.
pub fn outcomes(n_photons: usize) -> impl Iterator<Item = Outcome> {
    (0..=n_photons).flat_map(move |l| (0..=n_photons - l).map(move |k| Outcome::new(l, k)))
}

/// Fourier coefficients of one outcome's probability, `d = −(N−L)..=(N−L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodEntry<T: Real> {
    outcome: Outcome,
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> LikelihoodEntry<T> {
    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn max_harmonic(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coefficients(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// `c_d`, zero beyond the stored band.
    pub fn harmonic(&self, d: isize) -> Cx<T> {
        let m = self.max_harmonic() as isize;
        if d.abs() > m {
            Cx::zero()
        } else {
            self.coeffs[(d + m) as usize]
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Value and `∂/∂φ` of the probability at relative phase `x = φ − θ`.
    pub fn value_and_slope(&self, x: T) -> (T, T) {
        let m = self.max_harmonic() as isize;
        let mut value = Cx::zero();
        let mut slope = Cx::zero();
        for (i, &c) in self.coeffs.iter().enumerate() {
            let d = i as isize - m;
            let term = c * cis(T::from_isize(d).unwrap() * x);
            value += term;
            slope += term * cx(T::zero(), T::from_isize(d).unwrap());
        }
        (value.re, slope.re)
    }

    fn value(&self, x: T) -> Cx<T> {
        let m = self.max_harmonic() as isize;
        self.coeffs
            .iter()
            .enumerate()
            .fold(Cx::zero(), |acc, (i, &c)| {
                acc + c * cis(T::from_isize(i as isize - m).unwrap() * x)
            })
    }
}

/// Complete outcome model for one input state at one efficiency.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeLikelihoodTable<T: Real> {
    n_photons: usize,
    eta: T,
    entries: Vec<LikelihoodEntry<T>>,
}

impl<T: Real> OutcomeLikelihoodTable<T> {
    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn entries(&self) -> &[LikelihoodEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = Outcome> + '_ {
        self.entries.iter().map(|e| e.outcome)
    }

    pub fn index_of(&self, outcome: Outcome) -> Option<usize> {
        if !outcome.is_valid_for(self.n_photons) {
            return None;
        }
        let n = self.n_photons;
        // rows L' < L hold (N − L' + 1) outcomes each
        let before: usize = (0..outcome.lost).map(|l| n - l + 1).sum();
        Some(before + outcome.detected)
    }

    pub fn entry(&self, outcome: Outcome) -> Result<&LikelihoodEntry<T>> {
        self.index_of(outcome)
            .map(|i| &self.entries[i])
            .ok_or(Error::UnknownOutcome {
                lost: outcome.lost,
                detected: outcome.detected,
                n_photons: self.n_photons,
            })
    }

    pub fn to_record(&self) -> TableRecord {
        TableRecord {
            n_photons: self.n_photons,
            eta: self.eta.to_f64_lossy(),
            entries: self
                .entries
                .iter()
                .map(|e| EntryRecord {
                    lost: e.outcome.lost,
                    k: e.outcome.detected,
                    re: e.coeffs.iter().map(|c| c.re.to_f64_lossy()).collect(),
                    im: e.coeffs.iter().map(|c| c.im.to_f64_lossy()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_record(record: &TableRecord) -> Result<Self> {
        let n = record.n_photons;
        let eta = T::from_f64(record.eta).ok_or_else(|| Error::invalid("eta not representable"))?;
        LossChannel::new(eta)?;
        if record.entries.len() != outcome_count(n) {
            return Err(Error::invalid(format!(
                "expected {} entries for N={n}, found {}",
                outcome_count(n),
                record.entries.len()
            )));
        }
        let mut entries = Vec::with_capacity(record.entries.len());
        for (expected, e) in outcomes(n).zip(&record.entries) {
            let outcome = Outcome::new(e.lost, e.k);
            if outcome != expected {
                return Err(Error::invalid(format!(
                    "entries out of order: expected (L={}, k={}), found (L={}, k={})",
                    expected.lost, expected.detected, e.lost, e.k
                )));
            }
            let width = 2 * (n - e.lost) + 1;
            if e.re.len() != width || e.im.len() != width {
                return Err(Error::invalid(format!(
                    "outcome (L={}, k={}) needs {width} coefficients",
                    e.lost, e.k
                )));
            }
            let coeffs = e
                .re
                .iter()
                .zip(&e.im)
                .map(|(&re, &im)| cx(T::lit(re), T::lit(im)))
                .collect();
            entries.push(LikelihoodEntry { outcome, coeffs });
        }
        Ok(Self {
            n_photons: n,
            eta,
            entries,
        })
    }
}

/// JSON form of a table; coefficient arrays run over `d = −(N−L)..=(N−L)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub n_photons: usize,
    pub eta: f64,
    pub entries: Vec<EntryRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    #[serde(rename = "L")]
    pub lost: usize,
    pub k: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Amplitude factor of the loss channel that maps `|N−r−m, r+m⟩` onto
/// `|N−L−r, r⟩` with `m` photons lost from arm 2 and `L − m` from arm 1.
pub fn a_coefficient<T: Real>(n: usize, lost: usize, r: usize, m: usize, eta: T) -> Result<T> {
    if lost > n || m > lost || r > n - lost {
        return Err(Error::invalid(format!(
            "A coefficient indices out of range: N={n}, L={lost}, r={r}, m={m}"
        )));
    }
    LossChannel::new(eta)?;
    Ok(a_unchecked(n, lost, r, m, eta))
}

fn a_unchecked<T: Real>(n: usize, lost: usize, r: usize, m: usize, eta: T) -> T {
    let kept = n - lost;
    let weight = eta.powi(kept as i32)
        * (T::one() - eta).powi(lost as i32)
        * T::lit(binomial(n - r - m, kept - r) as f64)
        * T::lit(binomial(r + m, r) as f64);
    weight.sqrt()
}

/// Output-splitter amplitude `⟨M−k, k| U |M−r, r⟩` without the `2^{−M/2}` factor.
fn splitter_amplitude<T: Real>(kept: usize, r: usize, k: usize) -> T {
    let lo = (k + r).saturating_sub(kept);
    let hi = r.min(k);
    let mut sum = 0i64;
    for r2 in lo..=hi {
        let term = (binomial(kept - r, k - r2) * binomial(r, r2)) as i64;
        sum += if r2 % 2 == 0 { term } else { -term };
    }
    let ratio = factorial::<T>(kept - k) * factorial::<T>(k)
        / (factorial::<T>(kept - r) * factorial::<T>(r));
    T::lit(sum as f64) * ratio.sqrt()
}

/// Fourier-coefficient table of every detection probability.
pub fn build_likelihood_table<T: Real>(
    state: &TwoModeState<T>,
    channel: &LossChannel<T>,
) -> OutcomeLikelihoodTable<T> {
    let n = state.n_photons();
    let eta = channel.eta();
    let mut entries = Vec::with_capacity(outcome_count(n));
    for lost in 0..=n {
        let kept = n - lost;
        let scale = T::lit(0.5).powi(kept as i32);
        for k in 0..=kept {
            let mut coeffs = vec![Cx::zero(); 2 * kept + 1];
            for m in 0..=lost {
                // v_r carries Ψ_{r+m}; Ψ_{r+m} Ψ*_{s+m} oscillates as e^{i(s−r)(φ−θ)}
                let v: Vec<Cx<T>> = (0..=kept)
                    .map(|r| {
                        state.amplitude(r + m)
                            * a_unchecked(n, lost, r, m, eta)
                            * splitter_amplitude::<T>(kept, r, k)
                    })
                    .collect();
                for (r, vr) in v.iter().enumerate() {
                    if vr.is_zero() {
                        continue;
                    }
                    for (s, vs) in v.iter().enumerate() {
                        let d = s + kept - r;
                        coeffs[d] += vr * vs.conj() * scale;
                    }
                }
            }
            entries.push(LikelihoodEntry {
                outcome: Outcome::new(lost, k),
                coeffs,
            });
        }
    }
    OutcomeLikelihoodTable {
        n_photons: n,
        eta,
        entries,
    }
}

/// `P_{L,k}(φ, θ)`, clamped at zero.
pub fn evaluate_outcome<T: Real>(
    table: &OutcomeLikelihoodTable<T>,
    outcome: Outcome,
    phi: T,
    theta: T,
) -> Result<T> {
    let value = table.entry(outcome)?.value(phi - theta);
    debug_assert!(
        value.im.abs() <= T::lit(1e-8),
        "probability has imaginary part {}",
        value.im
    );
    Ok(value.re.max(T::zero()))
}

/// Probabilities of every outcome, in table order.
pub fn evaluate_all<T: Real>(table: &OutcomeLikelihoodTable<T>, phi: T, theta: T) -> Vec<T> {
    let x = phi - theta;
    table
        .entries
        .iter()
        .map(|e| e.value(x).re.max(T::zero()))
        .collect()
}
