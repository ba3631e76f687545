//! Scalar abstraction shared by every numerical kernel in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point: f32 or f64.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

/// `e^{i x}`
#[inline]
pub(crate) fn cis<T: Real>(x: T) -> Cx<T> {
    Complex::new(x.cos(), x.sin())
}

/// Reduces a phase to `[0, 2π)`.
pub fn wrap_phase<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let mut y = x % two_pi;
    if y < T::zero() {
        y += two_pi;
    }
    if y >= two_pi {
        y -= two_pi;
    }
    y
}

/// Binomial coefficient `n choose k`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u64 / (i as u64 + 1);
    }
    acc
}

pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::from_count(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(16, 8), 12870);
        assert_eq!(binomial(30, 15), 155_117_520);
    }

    #[test]
    fn wrap_into_range() {
        let w: f64 = wrap_phase(-0.5);
        assert!((w - (std::f64::consts::TAU - 0.5)).abs() < 1e-15);
        assert_eq!(wrap_phase(0.0_f64), 0.0);
        assert!(wrap_phase(7.0_f32) < std::f32::consts::TAU);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial::<f64>(0), 1.0);
        assert_eq!(factorial::<f64>(5), 120.0);
        assert_eq!(factorial::<f64>(16), 20_922_789_888_000.0);
    }
}
