//! Multi-start search for the global minima of `G` and their
//! classification by homogeneous type.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::functional::{eval_g, grad_g, hess_g, mean_field_residual, taylor4_g};
use crate::landscape::solver::solve_mean_field;
use crate::linalg::{distance, norm2, Matrix};
use crate::model::ValidatedModel;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub const DEFAULT_GRID: usize = 21;
pub const MAX_STARTS: u64 = 10_000_000;
/// Target mean-field residual of every located stationary point.
pub const SOLVER_TOL: f64 = 1e-12;
/// Stationary points within `VALUE_TOL · scale` of the least value count as global minima.
pub const VALUE_TOL: f64 = 1e-9;
pub const DEDUP_DIST: f64 = 1e-6;
/// Zero-eigenvalue threshold `τ = ZERO_EIG_TOL · max(1, ‖H‖)`.
pub const ZERO_EIG_TOL: f64 = 1e-8;
/// Third-order partials along null directions must be below `THIRD_TOL · max(1, max|∂⁴G|)`.
pub const THIRD_TOL: f64 = 1e-6;
/// Quartic form must exceed `QUARTIC_TOL · max(1, max|∂⁴G|)` on every sampled unit direction.
pub const QUARTIC_TOL: f64 = 1e-8;
pub const SPHERE_SAMPLES: usize = 1000;

/// Homogeneous type of a minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HomogeneousType {
    /// Nondegenerate Hessian: Gaussian fluctuations.
    Type1,
    /// Vanishing Hessian, positive quartic term.
    Type2,
    /// Mixed spectrum on a block-decoupled model: quartic on the null block,
    /// Gaussian on the rest.
    NonHomogeneousSeparable,
    Unclassified,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CriticalPoint<T: Scalar> {
    pub mu: Vec<T>,
    pub value: T,
    pub grad_norm: T,
    pub hessian: Matrix<T>,
    pub k: HomogeneousType,
    /// Fourth-order partials `∂⁴G(μ)`; present when the Hessian has a null direction.
    pub quartic: Option<Tensor<T>>,
    pub third_order_norm: T,
    /// Coordinates of the null block (all coordinates for Type2).
    #[serde(default)]
    pub null_coords: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MinimaSet<T: Scalar> {
    pub points: Vec<CriticalPoint<T>>,
    pub f_min: T,
    /// Minimum pairwise distance between distinct minima; `+∞` (JSON `null`) when unique.
    #[serde(with = "infinite_as_null")]
    pub delta_bar: T,
}

impl<T: Scalar> MinimaSet<T> {
    pub fn is_unique(&self) -> bool {
        self.points.len() == 1
    }

    /// The minimum closest to `x`.
    pub fn nearest(&self, x: &[T]) -> &CriticalPoint<T> {
        self.points
            .iter()
            .min_by(|a, b| {
                distance(&a.mu, x)
                    .partial_cmp(&distance(&b.mu, x))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("minima set is nonempty")
    }
}

mod infinite_as_null {
    use super::Scalar;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(s)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        Ok(Option::<T>::deserialize(d)?.unwrap_or_else(T::infinity))
    }
}

/// Uniform grid of start points on `[−1,1]ⁿ`.
fn start_grid<T: Scalar>(n: usize, per_axis: usize) -> Vec<Vec<T>> {
    let axis: Vec<T> = (0..per_axis)
        .map(|i| T::of(-1.0) + T::of(2.0) * T::of_usize(i) / T::of_usize(per_axis - 1))
        .collect();
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut flat| {
            let mut x = vec![T::zero(); n];
            for slot in (0..n).rev() {
                x[slot] = axis[flat % per_axis];
                flat /= per_axis;
            }
            x
        })
        .collect()
}

fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Finds all global minima of `G` by multi-start mean-field solving from a
/// `grid_points_per_axis`ⁿ grid on `[−1,1]ⁿ`.
pub fn find_global_minima<T: Scalar>(
    model: &ValidatedModel<T>,
    grid_points_per_axis: usize,
) -> Result<MinimaSet<T>> {
    model.require_positive_definite()?;
    if grid_points_per_axis < 5 {
        return Err(Error::InvalidParameter(format!(
            "grid_points_per_axis must be at least 5, got {grid_points_per_axis}"
        )));
    }
    let n = model.n();
    let starts_count = (grid_points_per_axis as u128).checked_pow(n as u32);
    if starts_count.map_or(true, |c| c > u128::from(MAX_STARTS)) {
        return Err(Error::BudgetExceeded {
            states: starts_count.unwrap_or(u128::MAX),
            budget: MAX_STARTS,
        });
    }
    let tol = T::of(SOLVER_TOL);
    let starts = start_grid::<T>(n, grid_points_per_axis);
    let results: Vec<Result<Vec<T>>> = starts
        .par_iter()
        .map(|x0| solve_mean_field(x0, model, tol))
        .collect();

    let mut last_err = None;
    let mut solved: Vec<Vec<T>> = Vec::new();
    for r in results {
        match r {
            Ok(mu) => solved.push(mu),
            Err(e) => last_err = Some(e),
        }
    }
    if solved.is_empty() {
        return Err(last_err.unwrap_or(Error::NonConvergence {
            residual: f64::NAN,
            iterations: 0,
        }));
    }
    solved.sort_by(|a, b| lex_cmp(a, b));

    let scale = model.scale();
    let candidates: Vec<(Vec<T>, T, T)> = solved
        .into_iter()
        .map(|mu| {
            let v = eval_g(&mu, model);
            let g = norm2(&grad_g(&mu, model));
            (mu, v, g)
        })
        .collect();
    let least = candidates
        .iter()
        .fold(T::infinity(), |m, c| if c.1 < m { c.1 } else { m });
    let value_tol = T::of(VALUE_TOL) * scale.max(least.abs());

    let mut reps: Vec<(Vec<T>, T, T)> = Vec::new();
    for cand in candidates {
        if cand.1 > least + value_tol {
            continue;
        }
        let hess = hess_g(&cand.0, model);
        let eig = hess.sym_eigen();
        let tau = T::of(ZERO_EIG_TOL) * T::one().max(eig.spectral_radius());
        if eig.values[0] < -tau {
            continue;
        }
        match reps
            .iter_mut()
            .find(|r| distance(&r.0, &cand.0) <= T::of(DEDUP_DIST))
        {
            Some(rep) => {
                let better = cand.2 < rep.2 || (cand.2 == rep.2 && norm2(&cand.0) < norm2(&rep.0));
                if better {
                    *rep = cand;
                }
            }
            None => reps.push(cand),
        }
    }
    if reps.is_empty() {
        return Err(Error::Degenerate(
            "no stationary point with positive semidefinite Hessian at the least value".into(),
        ));
    }
    reps.sort_by(|a, b| lex_cmp(&a.0, &b.0));

    let points = reps
        .into_iter()
        .map(|(mu, _, _)| classify_unchecked(&mu, model))
        .collect::<Vec<_>>();
    let f_min = points
        .iter()
        .fold(T::infinity(), |m, p| if p.value < m { p.value } else { m });
    let mut delta_bar = T::infinity();
    for (i, p) in points.iter().enumerate() {
        for q in &points[..i] {
            delta_bar = delta_bar.min(distance(&p.mu, &q.mu));
        }
    }
    Ok(MinimaSet {
        points,
        f_min,
        delta_bar,
    })
}

/// Classifies a stationary point `mu` of `G` by the spectrum of its Hessian
/// and, on null directions, its third- and fourth-order Taylor data.
pub fn classify_minimum<T: Scalar>(mu: &[T], model: &ValidatedModel<T>) -> Result<CriticalPoint<T>> {
    if mu.len() != model.n() {
        return Err(Error::Dimension(format!("mu has length {}, expected {}", mu.len(), model.n())));
    }
    let residual = mean_field_residual(mu, model);
    let limit = T::of(1e-8) * model.scale();
    if !(residual <= limit) {
        return Err(Error::Domain(format!(
            "point is not stationary: mean-field residual {:e}",
            residual.to_f64_lossy()
        )));
    }
    Ok(classify_unchecked(mu, model))
}

fn classify_unchecked<T: Scalar>(mu: &[T], model: &ValidatedModel<T>) -> CriticalPoint<T> {
    let n = model.n();
    let hessian = hess_g(mu, model);
    let eig = hessian.sym_eigen();
    let tau = T::of(ZERO_EIG_TOL) * T::one().max(eig.spectral_radius());
    let null_count = eig.values.iter().filter(|&&v| v <= tau).count();
    let mut point = CriticalPoint {
        mu: mu.to_vec(),
        value: eval_g(mu, model),
        grad_norm: norm2(&grad_g(mu, model)),
        hessian: hessian.clone(),
        k: HomogeneousType::Type1,
        quartic: None,
        third_order_norm: T::zero(),
        null_coords: Vec::new(),
    };
    if null_count == 0 {
        return point;
    }

    let taylor = taylor4_g(mu, model);
    let t4_scale = T::one().max(taylor.fourth.max_abs());
    let third_tol = T::of(THIRD_TOL) * t4_scale;
    point.quartic = Some(taylor.fourth.clone());

    // Null eigenvectors for the third-order norm.
    let mut third_norm = T::zero();
    for k in 0..null_count {
        let v = eig.vector(k);
        third_norm = third_norm.max(taylor.third.contract_first(&v).max_abs());
    }
    point.third_order_norm = third_norm;

    let null_coords: Vec<usize> = if null_count == n {
        (0..n).collect()
    } else {
        (0..n)
            .filter(|&i| (0..n).all(|k| hessian[(i, k)].abs() <= tau))
            .collect()
    };
    if null_coords.len() != null_count {
        point.k = HomogeneousType::Unclassified;
        return point;
    }
    point.null_coords = null_coords.clone();

    let restricted_third = taylor.third.restrict(&null_coords);
    let restricted_fourth = taylor.fourth.restrict(&null_coords);
    let quartic_ok = restricted_third.max_abs() <= third_tol
        && third_norm <= third_tol
        && quartic_positive(&restricted_fourth, T::of(QUARTIC_TOL) * t4_scale);
    if !quartic_ok {
        point.k = HomogeneousType::Unclassified;
        return point;
    }
    if null_count == n {
        point.k = HomogeneousType::Type2;
        return point;
    }
    let j = model.coupling();
    let decoupled = null_coords.iter().all(|&l| {
        (0..n)
            .filter(|s| !null_coords.contains(s))
            .all(|s| j[(l, s)] == T::zero())
    });
    point.k = if decoupled {
        HomogeneousType::NonHomogeneousSeparable
    } else {
        HomogeneousType::Unclassified
    };
    point
}

/// `(1/24) ∂⁴G(u,u,u,u) > tol` on coordinate axes and quasi-uniform sphere directions.
fn quartic_positive<T: Scalar>(fourth: &Tensor<T>, tol: T) -> bool {
    sphere_directions::<T>(fourth.dim(), SPHERE_SAMPLES)
        .iter()
        .all(|u| fourth.form(u) / T::of(24.0) > tol)
}

/// Coordinate axes (both signs) followed by `count` quasi-uniform unit vectors.
pub fn sphere_directions<T: Scalar>(dim: usize, count: usize) -> Vec<Vec<T>> {
    let mut dirs = Vec::with_capacity(2 * dim + count);
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut e = vec![T::zero(); dim];
            e[i] = T::of(sign);
            dirs.push(e);
        }
    }
    match dim {
        0 | 1 => {}
        2 => {
            for i in 0..count {
                let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / count as f64;
                dirs.push(vec![T::of(theta.cos()), T::of(theta.sin())]);
            }
        }
        _ => {
            // Halton points pushed through Box–Muller give quasi-uniform
            // Gaussian vectors; normalizing maps them onto the sphere.
            const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
            let pairs = dim.div_ceil(2);
            for i in 1..=count as u64 {
                let mut g = Vec::with_capacity(2 * pairs);
                for p in 0..pairs {
                    let u1 = halton(i, PRIMES[(2 * p) % PRIMES.len()]).max(1e-12);
                    let u2 = halton(i, PRIMES[(2 * p + 1) % PRIMES.len()]);
                    let r = (-2.0 * u1.ln()).sqrt();
                    let th = 2.0 * std::f64::consts::PI * u2;
                    g.push(r * th.cos());
                    g.push(r * th.sin());
                }
                g.truncate(dim);
                let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    dirs.push(g.into_iter().map(|x| T::of(x / norm)).collect());
                }
            }
        }
    }
    dirs
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}
