//! Exact joint law of the species sums on the count grid.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::distance;
use crate::model::{SpeciesPartition, ValidatedModel};
use crate::scalar::{log_sum_exp, Scalar};

/// Largest grid `∏(N_l+1)` enumerated.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;
/// Boundary cells carrying more than this share of conditional mass are flagged.
pub const BOUNDARY_FLAG: f64 = 0.01;
const CHUNK: usize = 1 << 14;

/// The ball `B(center, radius)` on magnetization vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BallCondition<T: Scalar> {
    pub center: Vec<T>,
    pub radius: T,
    /// Conditional mass of included grid points with a grid neighbour outside the ball.
    pub boundary_mass: T,
    pub boundary_flagged: bool,
}

/// Probabilities of `(c_1, …, c_n)`, `c_l` the number of `+1` spins of
/// species `l`, stored as log-weights with the last species varying fastest.
#[derive(Debug, Clone)]
pub struct FiniteDist<T: Scalar> {
    partition: SpeciesPartition,
    shape: Vec<usize>,
    log_weights: Vec<T>,
    log_z: T,
    condition: Option<BallCondition<T>>,
}

impl<T: Scalar> FiniteDist<T> {
    pub fn partition(&self) -> &SpeciesPartition {
        &self.partition
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn log_weights(&self) -> &[T] {
        &self.log_weights
    }

    pub fn log_z(&self) -> T {
        self.log_z
    }

    pub fn condition(&self) -> Option<&BallCondition<T>> {
        self.condition.as_ref()
    }

    pub fn counts(&self, flat: usize) -> Vec<u64> {
        flat_to_counts(flat, &self.shape)
    }

    pub fn sums(&self, flat: usize) -> Vec<i64> {
        counts_to_sums(&self.counts(flat), self.partition.sizes())
    }

    pub fn magnetizations(&self, flat: usize) -> Vec<T> {
        self.sums(flat)
            .iter()
            .zip(self.partition.sizes())
            .map(|(&s, &n)| T::of(s as f64) / T::of(n as f64))
            .collect()
    }

    pub fn flat_index(&self, counts: &[u64]) -> Option<usize> {
        if counts.len() != self.shape.len() || counts.iter().zip(&self.shape).any(|(&c, &s)| c as usize >= s) {
            return None;
        }
        Some(counts.iter().zip(&self.shape).fold(0, |acc, (&c, &s)| acc * s + c as usize))
    }

    pub fn probability(&self, flat: usize) -> T {
        (self.log_weights[flat] - self.log_z).exp()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.log_weights
            .par_iter()
            .map(|&w| (w - self.log_z).exp())
            .collect()
    }

    /// Writes `c_1…c_n, S_1…S_n, probability` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.shape.len();
        let header: Vec<String> = (1..=n)
            .map(|l| format!("c{l}"))
            .chain((1..=n).map(|l| format!("S{l}")))
            .chain(std::iter::once("probability".to_string()))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for flat in 0..self.len() {
            let c = self.counts(flat);
            let s = counts_to_sums(&c, self.partition.sizes());
            let row: Vec<String> = c
                .iter()
                .map(|v| v.to_string())
                .chain(s.iter().map(|v| v.to_string()))
                .chain(std::iter::once(format!("{:e}", self.probability(flat).to_f64_lossy())))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn summary(&self) -> FiniteDistSummary<T> {
        let n = self.shape.len();
        let probs = self.probabilities();
        let mut mean = vec![T::zero(); n];
        let mut support = 0usize;
        for (flat, &p) in probs.iter().enumerate() {
            if p > T::zero() {
                support += 1;
            }
            for (acc, m) in mean.iter_mut().zip(self.magnetizations(flat)) {
                *acc += p * m;
            }
        }
        FiniteDistSummary {
            sizes: self.partition.sizes().to_vec(),
            states: self.len(),
            support,
            log_z: self.log_z,
            mean_magnetization: mean,
            condition: self.condition.clone(),
        }
    }
}

/// JSON-friendly description of a [`FiniteDist`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FiniteDistSummary<T: Scalar> {
    pub sizes: Vec<u64>,
    pub states: usize,
    pub support: usize,
    pub log_z: T,
    pub mean_magnetization: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<BallCondition<T>>,
}

pub(crate) fn flat_to_counts(mut flat: usize, shape: &[usize]) -> Vec<u64> {
    let mut c = vec![0u64; shape.len()];
    for slot in (0..shape.len()).rev() {
        c[slot] = (flat % shape[slot]) as u64;
        flat /= shape[slot];
    }
    c
}

pub(crate) fn counts_to_sums(counts: &[u64], sizes: &[u64]) -> Vec<i64> {
    counts
        .iter()
        .zip(sizes)
        .map(|(&c, &n)| 2 * c as i64 - n as i64)
        .collect()
}

/// `ln C(n, c)`, symmetric in `c ↔ n − c` bit for bit.
fn ln_binomial_table(n: u64) -> Vec<f64> {
    let top = ln_gamma(n as f64 + 1.0);
    (0..=n)
        .map(|c| top - (ln_gamma(c as f64 + 1.0) + ln_gamma((n - c) as f64 + 1.0)))
        .collect()
}

/// Grid size `∏(N_l+1)`, checked against the enumeration budget.
pub fn grid_states(partition: &SpeciesPartition) -> Result<usize> {
    let states = partition
        .sizes()
        .iter()
        .fold(1u128, |acc, &n| acc.saturating_mul(n as u128 + 1));
    if states > ENUMERATION_BUDGET as u128 {
        return Err(Error::BudgetExceeded {
            states,
            budget: ENUMERATION_BUDGET,
        });
    }
    Ok(states as usize)
}

/// Exact law of `(S_1, …, S_n)` for the model's couplings on `partition`:
/// `weight(c) = Σ_l ln C(N_l, c_l) + (1/2N) Σ J_ls S_l S_s + Σ h_l S_l`.
pub fn exact_joint<T: Scalar>(model: &ValidatedModel<T>, partition: &SpeciesPartition) -> Result<FiniteDist<T>> {
    let n = model.n();
    if partition.n() != n {
        return Err(Error::Dimension(format!(
            "partition has {} species, model has {n}",
            partition.n()
        )));
    }
    let total = grid_states(partition)?;
    let shape: Vec<usize> = partition.sizes().iter().map(|&s| s as usize + 1).collect();
    let binomials: Vec<Vec<T>> = partition
        .sizes()
        .iter()
        .map(|&s| ln_binomial_table(s).into_iter().map(T::of).collect())
        .collect();
    let j = model.coupling();
    let h = model.field();
    let inv_two_n = T::one() / (T::of(2.0) * T::of(partition.total() as f64));
    let sizes = partition.sizes();

    let log_weights: Vec<T> = (0..total)
        .into_par_iter()
        .with_min_len(CHUNK)
        .map(|flat| {
            let c = flat_to_counts(flat, &shape);
            let s: Vec<T> = counts_to_sums(&c, sizes).iter().map(|&v| T::of(v as f64)).collect();
            let mut quad = T::zero();
            for l in 0..n {
                for m in 0..n {
                    quad += j[(l, m)] * s[l] * s[m];
                }
            }
            let mut w = quad * inv_two_n;
            for l in 0..n {
                w += h[l] * s[l];
            }
            for l in 0..n {
                w += binomials[l][c[l] as usize];
            }
            w
        })
        .collect();
    let log_z = log_sum_exp(&log_weights);
    Ok(FiniteDist {
        partition: partition.clone(),
        shape,
        log_weights,
        log_z,
        condition: None,
    })
}

/// The exact law conditioned on the magnetization vector `(S_l/N_l)` lying
/// in the closed Euclidean ball `B(center, radius)`.
pub fn conditional_joint<T: Scalar>(
    model: &ValidatedModel<T>,
    partition: &SpeciesPartition,
    center: &[T],
    radius: T,
) -> Result<FiniteDist<T>> {
    if center.len() != model.n() {
        return Err(Error::Dimension(format!(
            "ball center has length {}, expected {}",
            center.len(),
            model.n()
        )));
    }
    if !(radius > T::zero() && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid ball radius {radius}")));
    }
    let full = exact_joint(model, partition)?;
    full.restrict_to_ball(center, radius)
}

impl<T: Scalar> FiniteDist<T> {
    fn restrict_to_ball(mut self, center: &[T], radius: T) -> Result<Self> {
        let shape = self.shape.clone();
        let sizes = self.partition.sizes().to_vec();
        let inside = |counts: &[u64]| {
            let m: Vec<T> = counts_to_sums(counts, &sizes)
                .iter()
                .zip(&sizes)
                .map(|(&s, &n)| T::of(s as f64) / T::of(n as f64))
                .collect();
            distance(&m, center) <= radius
        };
        let flags: Vec<(bool, bool)> = (0..self.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|flat| {
                let c = flat_to_counts(flat, &shape);
                if !inside(&c) {
                    return (false, false);
                }
                let mut boundary = false;
                for l in 0..c.len() {
                    for step in [-1i64, 1] {
                        let v = c[l] as i64 + step;
                        if v < 0 || v as usize >= shape[l] {
                            continue;
                        }
                        let mut nb = c.clone();
                        nb[l] = v as u64;
                        if !inside(&nb) {
                            boundary = true;
                        }
                    }
                }
                (true, boundary)
            })
            .collect();
        if !flags.iter().any(|f| f.0) {
            return Err(Error::EmptySupport);
        }
        for (w, f) in self.log_weights.iter_mut().zip(&flags) {
            if !f.0 {
                *w = T::neg_infinity();
            }
        }
        self.log_z = log_sum_exp(&self.log_weights);
        let boundary: Vec<T> = self
            .log_weights
            .iter()
            .zip(&flags)
            .filter(|(_, f)| f.1)
            .map(|(&w, _)| w)
            .collect();
        let boundary_mass = if boundary.is_empty() {
            T::zero()
        } else {
            (log_sum_exp(&boundary) - self.log_z).exp()
        };
        self.condition = Some(BallCondition {
            center: center.to_vec(),
            radius,
            boundary_mass,
            boundary_flagged: boundary_mass > T::of(BOUNDARY_FLAG),
        });
        Ok(self)
    }
}
