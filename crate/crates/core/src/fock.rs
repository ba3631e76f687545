//! Polynomials in bosonic creation operators.
//!
//! A multimode state is written as `p(a₁†, …, a_M†)|0⟩`. Passive linear optics
//! acts by a linear substitution of the creation operators, so beam splitters,
//! phase shifters and loss all reduce to [`CreationPolynomial::substitute`].
//! Fock amplitudes are read off with the `√(Π eᵢ!)` factor of each monomial.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::scalar::{factorial, Cx, Real};

/// Exponent vector of a monomial, one entry per mode.
pub type Exponents = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct CreationPolynomial<T: Real> {
    modes: usize,
    terms: BTreeMap<Exponents, Cx<T>>,
}

impl<T: Real> CreationPolynomial<T> {
    /// The vacuum, i.e. the constant polynomial 1.
    pub fn one(modes: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; modes], Cx::one());
        Self { modes, terms }
    }

    pub fn zero(modes: usize) -> Self {
        Self {
            modes,
            terms: BTreeMap::new(),
        }
    }

    /// `Σᵢ coeffs[i] aᵢ†`
    pub fn linear(coeffs: &[Cx<T>]) -> Self {
        let modes = coeffs.len();
        let mut p = Self::zero(modes);
        for (i, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; modes];
            e[i] = 1;
            p.add_term(e, c);
        }
        p
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Cx<T>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Cx<T> {
        self.terms.get(exps).copied().unwrap_or_else(Cx::zero)
    }

    pub fn add_term(&mut self, exps: Exponents, coeff: Cx<T>) {
        assert_eq!(exps.len(), self.modes, "exponent vector has wrong arity");
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(Cx::zero);
        *slot += coeff;
    }

    pub fn scale(&self, factor: Cx<T>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, &c)| (e.clone(), c * factor))
            .collect();
        Self {
            modes: self.modes,
            terms,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.modes, other.modes);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.modes, other.modes);
        let mut out = Self::zero(self.modes);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.modes);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitutes `aᵢ† → Σⱼ map[i][j] bⱼ†`; the result lives on `map[i].len()` modes.
    pub fn substitute(&self, map: &[Vec<Cx<T>>]) -> Self {
        assert_eq!(map.len(), self.modes, "substitution must cover every mode");
        let out_modes = map.first().map_or(0, Vec::len);
        assert!(map.iter().all(|row| row.len() == out_modes));

        let max_exp = self
            .terms
            .keys()
            .flat_map(|e| e.iter().copied())
            .max()
            .unwrap_or(0);
        // powers[i][p] = (Σⱼ map[i][j] bⱼ†)^p
        let powers: Vec<Vec<Self>> = map
            .iter()
            .map(|row| {
                let lin = Self::linear(row);
                let mut ps = vec![Self::one(out_modes)];
                for p in 1..=max_exp as usize {
                    let next = ps[p - 1].mul(&lin);
                    ps.push(next);
                }
                ps
            })
            .collect();

        let mut out = Self::zero(out_modes);
        for (e, &c) in &self.terms {
            let mut term = Self::one(out_modes).scale(c);
            for (i, &p) in e.iter().enumerate() {
                if p > 0 {
                    term = term.mul(&powers[i][p as usize]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Keeps only the monomials accepted by `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&[u32]) -> bool) {
        self.terms.retain(|e, _| keep(e));
    }

    /// Fock-basis amplitudes: `coeff · √(Π eᵢ!)` per occupation pattern.
    pub fn fock_amplitudes(&self) -> BTreeMap<Exponents, Cx<T>> {
        self.terms
            .iter()
            .map(|(e, &c)| {
                let norm = e.iter().fold(T::one(), |acc, &k| acc * factorial::<T>(k as usize));
                (e.clone(), c * norm.sqrt())
            })
            .collect()
    }
}
