//! Moment summaries of a normalized sum vector, shared by limit laws,
//! exact finite-N distributions and the Monte-Carlo sampler.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Moments of `x_l = (S_l − N_l μ_l) / N_l^{1−γ_l}`.
///
/// `third`, `fourth` and `cross_fourth` are raw moments about the center
/// (`E[x_l³]`, `E[x_l⁴]`, `E[x_l² x_m²]`); `standardized_fourth` is the
/// central fourth moment over the squared variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MomentReport<T: Scalar> {
    pub mean: Vec<T>,
    pub covariance: Matrix<T>,
    pub third: Vec<T>,
    pub fourth: Vec<T>,
    pub standardized_fourth: Vec<T>,
    pub cross_fourth: Matrix<T>,
    pub center: Vec<T>,
    pub exponents: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_normalizer: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<StandardErrors<T>>,
}

/// Batch-means standard errors matching the fields of a [`MomentReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StandardErrors<T: Scalar> {
    pub mean: Vec<T>,
    /// Standard errors of the raw second moments `E[x_l x_m]`.
    pub second: Matrix<T>,
    pub third: Vec<T>,
    pub fourth: Vec<T>,
    pub batches: usize,
}

/// Raw moments `E[1], E[x_l], E[x_l x_m], E[x_l³], E[x_l⁴], E[x_l² x_m²]`
/// packed in one flat vector, so they can be accumulated or integrated together.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RawLayout {
    pub n: usize,
}

impl RawLayout {
    pub fn len(&self) -> usize {
        1 + 3 * self.n + 2 * self.n * self.n
    }

    fn first(&self, l: usize) -> usize {
        1 + l
    }

    fn second(&self, l: usize, m: usize) -> usize {
        1 + self.n + l * self.n + m
    }

    fn third(&self, l: usize) -> usize {
        1 + self.n + self.n * self.n + l
    }

    fn fourth(&self, l: usize) -> usize {
        1 + 2 * self.n + self.n * self.n + l
    }

    fn cross(&self, l: usize, m: usize) -> usize {
        1 + 3 * self.n + self.n * self.n + l * self.n + m
    }

    /// Adds `w · (monomials of x)` to `acc`.
    pub fn accumulate<T: Scalar>(&self, x: &[T], w: T, acc: &mut [T]) {
        acc[0] += w;
        for l in 0..self.n {
            let wx = w * x[l];
            acc[self.first(l)] += wx;
            acc[self.third(l)] += wx * x[l] * x[l];
            acc[self.fourth(l)] += wx * x[l] * x[l] * x[l];
            for m in 0..self.n {
                acc[self.second(l, m)] += wx * x[m];
                acc[self.cross(l, m)] += wx * x[l] * x[m] * x[m];
            }
        }
    }

    /// Monomials of `x` in layout order.
    pub fn monomials<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        self.accumulate(x, T::one(), &mut out);
        out
    }

    /// Builds a report from unnormalized raw sums; entry 0 is the total mass.
    pub fn report<T: Scalar>(&self, raw: &[T], center: Vec<T>, exponents: Vec<T>) -> MomentReport<T> {
        let n = self.n;
        let z = raw[0];
        let e = |i: usize| raw[i] / z;
        let mean: Vec<T> = (0..n).map(|l| e(self.first(l))).collect();
        let covariance = Matrix::from_fn(n, n, |l, m| e(self.second(l, m)) - mean[l] * mean[m]).symmetrized();
        let third: Vec<T> = (0..n).map(|l| e(self.third(l))).collect();
        let fourth: Vec<T> = (0..n).map(|l| e(self.fourth(l))).collect();
        let cross_fourth = Matrix::from_fn(n, n, |l, m| e(self.cross(l, m))).symmetrized();
        let standardized_fourth = (0..n)
            .map(|l| {
                let m1 = mean[l];
                let m2 = e(self.second(l, l));
                let central4 = fourth[l] - T::of(4.0) * m1 * third[l] + T::of(6.0) * m1 * m1 * m2
                    - T::of(3.0) * m1 * m1 * m1 * m1;
                let var = covariance[(l, l)];
                central4 / (var * var)
            })
            .collect();
        MomentReport {
            mean,
            covariance,
            third,
            fourth,
            standardized_fourth,
            cross_fourth,
            center,
            exponents,
            log_normalizer: None,
            standard_errors: None,
        }
    }

    /// Raw second moment `E[x_l x_m]` index, for standard-error bookkeeping.
    pub fn second_index(&self, l: usize, m: usize) -> usize {
        self.second(l, m)
    }

    pub fn first_index(&self, l: usize) -> usize {
        self.first(l)
    }

    pub fn third_index(&self, l: usize) -> usize {
        self.third(l)
    }

    pub fn fourth_index(&self, l: usize) -> usize {
        self.fourth(l)
    }
}
