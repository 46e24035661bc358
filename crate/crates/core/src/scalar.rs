//! The floating-point abstraction the numerical core is written against.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar: `f32` or `f64`.
pub trait Scalar:
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
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Panics only on NaN-producing conversions,
    /// which cannot happen for `f32`/`f64`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `ln cosh t` written as `|t| - ln 2 + ln(1 + e^{-2|t|})`, finite for all finite `t`.
    #[inline]
    fn ln_cosh(self) -> Self {
        let a = self.abs();
        a - Self::LN_2() + (-(a + a)).exp().ln_1p()
    }

    /// Machine epsilon as used by tolerance formulas.
    #[inline]
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Neumaier (improved Kahan) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// `ln Σ exp(v_i)` with a pairwise summation tree below the max-shift.
/// Returns `-inf` when every entry is `-inf` (or the slice is empty).
pub fn log_sum_exp<T: Scalar>(values: &[T]) -> T {
    let max = values
        .iter()
        .copied()
        .fold(T::neg_infinity(), |m, v| if v > m { v } else { m });
    if !max.is_finite() {
        return max;
    }
    max + pairwise_exp_sum(values, max).ln()
}

fn pairwise_exp_sum<T: Scalar>(values: &[T], shift: T) -> T {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        let mut acc = T::zero();
        for &v in values {
            acc += (v - shift).exp();
        }
        acc
    } else {
        let mid = values.len() / 2;
        pairwise_exp_sum(&values[..mid], shift) + pairwise_exp_sum(&values[mid..], shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_cosh_matches_naive_and_survives_large_arguments() {
        for &t in &[-3.0f64, -0.5, 0.0, 1e-8, 0.7, 5.0] {
            assert!((t.ln_cosh() - t.cosh().ln()).abs() < 1e-15);
        }
        let big = 1.0e4f64;
        assert!((big.ln_cosh() - (big - std::f64::consts::LN_2)).abs() < 1e-12);
        assert!(1.0e4f32.ln_cosh().is_finite());
    }

    #[test]
    fn log_sum_exp_handles_large_and_empty() {
        let v = [1000.0f64, 1000.0];
        assert!((log_sum_exp(&v) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
        let many: Vec<f64> = (0..1000).map(|i| -(i as f64) * 1e-3).collect();
        let naive: f64 = many.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&many) - naive).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::<f64>::new();
        s.add(1e16);
        s.add(1.0);
        s.add(-1e16);
        assert_eq!(s.value(), 1.0);
    }
}
