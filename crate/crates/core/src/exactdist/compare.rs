//! Normalized moments under a finite-N law and comparison with a limit law.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactdist::joint::{counts_to_sums, flat_to_counts, FiniteDist};
use crate::limits::law::{law_moments, LawKind, LimitLaw};
use crate::moments::{MomentReport, RawLayout};
use crate::scalar::{CompensatedSum, Scalar};

const CHUNK: usize = 1 << 14;

/// `N_l^{1−γ_l}` for each species.
pub fn normalizers<T: Scalar>(sizes: &[u64], exponents: &[T]) -> Vec<T> {
    sizes
        .iter()
        .zip(exponents)
        .map(|(&n, &g)| T::of(n as f64).powf(T::one() - g))
        .collect()
}

/// Moments of `x_l = (S_l − N_l μ_l) / N_l^{1−γ_l}` under `dist`, summed
/// over the grid with compensated accumulation in fixed-size chunks.
pub fn normalized_moments<T: Scalar>(
    dist: &FiniteDist<T>,
    center: &[T],
    exponents: &[T],
) -> Result<MomentReport<T>> {
    let n = dist.shape().len();
    if center.len() != n || exponents.len() != n {
        return Err(Error::Dimension(format!(
            "center/exponents have lengths {}/{}, expected {n}",
            center.len(),
            exponents.len()
        )));
    }
    let sizes = dist.partition().sizes();
    let scale = normalizers(sizes, exponents);
    let layout = RawLayout { n };
    let shape = dist.shape().to_vec();
    let log_z = dist.log_z();
    let weights = dist.log_weights();
    let chunks: Vec<Vec<CompensatedSum<T>>> = weights
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(k, chunk)| {
            let mut acc = vec![CompensatedSum::new(); layout.len()];
            let mut x = vec![T::zero(); n];
            for (i, &w) in chunk.iter().enumerate() {
                if w == T::neg_infinity() {
                    continue;
                }
                let p = (w - log_z).exp();
                let s = counts_to_sums(&flat_to_counts(k * CHUNK + i, &shape), sizes);
                for l in 0..n {
                    x[l] = (T::of(s[l] as f64) - T::of(sizes[l] as f64) * center[l]) / scale[l];
                }
                for (a, m) in acc.iter_mut().zip(layout.monomials(&x)) {
                    a.add(p * m);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![CompensatedSum::new(); layout.len()];
    for chunk in &chunks {
        for (t, c) in total.iter_mut().zip(chunk) {
            t.merge(c);
        }
    }
    let raw: Vec<T> = total.iter().map(|c| c.value()).collect();
    Ok(layout.report(&raw, center.to_vec(), exponents.to_vec()))
}

/// Differences between finite-N moments and the moments of a limit law.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Discrepancy<T: Scalar> {
    pub covariance_max_abs: T,
    /// `max|ΔC| / max|C_law|`.
    pub covariance_rel_max_norm: T,
    /// `max |ΔC_lm| / |C_law,lm|` over entries with nonnegligible law value.
    pub covariance_rel_entrywise: T,
    /// `E[x_l⁴]` (finite N) minus the law's value.
    pub fourth: Vec<T>,
    pub standardized_fourth: Vec<T>,
    /// Discretized total-variation distance (one- and two-dimensional laws with a quartic factor).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_variation: Option<T>,
}

fn check_exponents<T: Scalar>(report: &MomentReport<T>, law: &LimitLaw<T>) -> Result<()> {
    if report.exponents.len() != law.exponents.len() {
        return Err(Error::Dimension(format!(
            "report has {} coordinates, law has {}",
            report.exponents.len(),
            law.exponents.len()
        )));
    }
    for (l, (a, b)) in report.exponents.iter().zip(&law.exponents).enumerate() {
        if (*a - *b).abs() > T::of(1e-12) {
            return Err(Error::ExponentMismatch(format!(
                "coordinate {l}: report uses γ = {a}, law uses γ = {b}"
            )));
        }
    }
    Ok(())
}

pub fn compare_to_law<T: Scalar>(report: &MomentReport<T>, law: &LimitLaw<T>) -> Result<Discrepancy<T>> {
    check_exponents(report, law)?;
    let target = law_moments(law)?;
    Ok(discrepancy(report, &target))
}

fn discrepancy<T: Scalar>(report: &MomentReport<T>, target: &MomentReport<T>) -> Discrepancy<T> {
    let diff = report.covariance.sub(&target.covariance);
    let max_abs = diff.max_abs();
    let law_max = target.covariance.max_abs();
    let mut entrywise = T::zero();
    let n = diff.rows();
    for l in 0..n {
        for m in 0..n {
            let t = target.covariance[(l, m)].abs();
            if t > T::of(1e-12) * law_max {
                entrywise = entrywise.max(diff[(l, m)].abs() / t);
            }
        }
    }
    Discrepancy {
        covariance_max_abs: max_abs,
        covariance_rel_max_norm: max_abs / law_max,
        covariance_rel_entrywise: entrywise,
        fourth: report.fourth.iter().zip(&target.fourth).map(|(&a, &b)| a - b).collect(),
        standardized_fourth: report
            .standardized_fourth
            .iter()
            .zip(&target.standardized_fourth)
            .map(|(&a, &b)| a - b)
            .collect(),
        total_variation: None,
    }
}

/// Moments of `dist` normalized as the law prescribes, their discrepancy
/// and, for one- and two-dimensional laws with a quartic factor, the TV distance.
pub fn compare_dist_to_law<T: Scalar>(
    dist: &FiniteDist<T>,
    law: &LimitLaw<T>,
) -> Result<(MomentReport<T>, Discrepancy<T>)> {
    let report = normalized_moments(dist, &law.center, &law.exponents)?;
    let target = law_moments(law)?;
    let mut d = discrepancy(&report, &target);
    if law.dim() <= 2 && law.kind != LawKind::Gaussian {
        let log_z = target.log_normalizer.unwrap_or_else(T::zero);
        d.total_variation = Some(total_variation(dist, law, log_z)?);
    }
    Ok((report, d))
}

/// `½ Σ_cells |P_N(cell) − P_law(cell)|` plus half the law mass outside the grid.
/// Each grid point owns the cell of width `2/N_l^{1−γ_l}` around its normalized value;
/// law cell masses use 3-point Gauss–Legendre per axis.
pub fn total_variation<T: Scalar>(dist: &FiniteDist<T>, law: &LimitLaw<T>, log_normalizer: T) -> Result<T> {
    let n = dist.shape().len();
    if law.dim() != n || n > 2 {
        return Err(Error::Dimension(format!("total variation needs a law of dimension ≤ 2, got {}", law.dim())));
    }
    let sizes = dist.partition().sizes();
    let scale = normalizers(sizes, &law.exponents);
    let width: Vec<T> = scale.iter().map(|&s| T::of(2.0) / s).collect();
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let gw = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let shape = dist.shape().to_vec();
    let probs = dist.probabilities();
    let parts: Vec<Result<(CompensatedSum<T>, CompensatedSum<T>)>> = probs
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(k, chunk)| {
            let mut tv = CompensatedSum::new();
            let mut mass = CompensatedSum::new();
            for (i, &p) in chunk.iter().enumerate() {
                let s = counts_to_sums(&flat_to_counts(k * CHUNK + i, &shape), sizes);
                let x: Vec<T> = (0..n)
                    .map(|l| (T::of(s[l] as f64) - T::of(sizes[l] as f64) * law.center[l]) / scale[l])
                    .collect();
                let mut cell = T::zero();
                let points = 3usize.pow(n as u32);
                for q in 0..points {
                    let mut y = x.clone();
                    let mut w = T::one();
                    let mut r = q;
                    for l in 0..n {
                        let a = r % 3;
                        r /= 3;
                        y[l] += T::of(0.5 * nodes[a]) * width[l];
                        w *= T::of(0.5 * gw[a]) * width[l];
                    }
                    cell += w * (law.log_density_unnormalized(&y)? - log_normalizer).exp();
                }
                mass.add(cell);
                tv.add((p - cell).abs());
            }
            Ok((tv, mass))
        })
        .collect();
    let mut tv = CompensatedSum::new();
    let mut mass = CompensatedSum::new();
    for part in parts {
        let (t, m) = part?;
        tv.merge(&t);
        mass.merge(&m);
    }
    let outside = (T::one() - mass.value()).max(T::zero());
    Ok(T::of(0.5) * (tv.value() + outside))
}
