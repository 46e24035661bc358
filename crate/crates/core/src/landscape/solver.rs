//! Solver for the mean-field equations `μ = tanh(α J μ + h)`.
//!
//! Damped fixed-point iteration gets close, then Newton steps on `∇G`
//! polish the root. Since `∇G = D J D (μ − tanh y)` with `D = diag(α)`
//! invertible, roots of `∇G` are exactly the fixed points.

use crate::error::{Error, Result};
use crate::landscape::functional::{grad_g, hess_g, mean_field_map, mean_field_residual};
use crate::linalg::norm2;
use crate::model::ValidatedModel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Weight λ of the new iterate: `x ← (1−λ)x + λ tanh(y)`.
    pub damping: f64,
    pub max_damped: usize,
    pub max_newton: usize,
    /// Residual at which the damped phase hands over to Newton.
    pub newton_switch: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_damped: 100_000,
            max_newton: 50,
            newton_switch: 1e-6,
        }
    }
}

/// Solves the mean-field equations from `x0` to `‖μ − tanh(αJμ+h)‖_∞ ≤ tol`.
pub fn solve_mean_field<T: Scalar>(x0: &[T], model: &ValidatedModel<T>, tol: T) -> Result<Vec<T>> {
    solve_mean_field_with(x0, model, tol, &SolverOptions::default())
}

pub fn solve_mean_field_with<T: Scalar>(
    x0: &[T],
    model: &ValidatedModel<T>,
    tol: T,
    opts: &SolverOptions,
) -> Result<Vec<T>> {
    let n = model.n();
    if x0.len() != n {
        return Err(Error::Dimension(format!("x0 has length {}, expected {n}", x0.len())));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("x0 is not finite".into()));
    }
    let lambda = T::of(opts.damping);
    let switch = T::of(opts.newton_switch).max(tol);
    let mut x = x0.to_vec();
    let mut residual = mean_field_residual(&x, model);
    let mut iterations = 0usize;
    let mut polished = false;

    loop {
        if residual == T::zero() {
            return Ok(clamp_unit(x));
        }
        if !polished && (residual <= switch || iterations >= opts.max_damped) {
            x = newton_polish(x, model, opts.max_newton, &mut residual);
            polished = true;
            if residual <= tol {
                return Ok(clamp_unit(x));
            }
        }
        if iterations >= opts.max_damped {
            break;
        }
        let t = mean_field_map(&x, model);
        for (xi, ti) in x.iter_mut().zip(t) {
            *xi = (T::one() - lambda) * *xi + lambda * ti;
        }
        residual = mean_field_residual(&x, model);
        iterations += 1;
        if polished && residual <= tol {
            return Ok(clamp_unit(x));
        }
    }
    if residual <= tol {
        return Ok(clamp_unit(x));
    }
    Err(Error::NonConvergence {
        residual: residual.to_f64_lossy(),
        iterations,
    })
}

/// Newton on `∇G`; steps are kept only while they do not increase the residual.
/// Runs past the tolerance so that flat (degenerate) minima are located
/// in position, not just in residual.
fn newton_polish<T: Scalar>(
    mut x: Vec<T>,
    model: &ValidatedModel<T>,
    max_steps: usize,
    residual: &mut T,
) -> Vec<T> {
    for _ in 0..max_steps {
        if *residual == T::zero() {
            break;
        }
        let g = grad_g(&x, model);
        if g.iter().all(|v| *v == T::zero()) {
            break;
        }
        let Some(lu) = hess_g(&x, model).lu(T::eps()) else {
            break;
        };
        let step = lu.solve(&g);
        let trial: Vec<T> = x.iter().zip(&step).map(|(&xi, &si)| xi - si).collect();
        if trial.iter().any(|v| !v.is_finite()) {
            break;
        }
        let r = mean_field_residual(&trial, model);
        if r > *residual {
            break;
        }
        let step_norm = norm2(&step);
        x = trial;
        *residual = r;
        if step_norm <= T::eps() * (T::one() + norm2(&x)) {
            break;
        }
    }
    x
}

fn clamp_unit<T: Scalar>(x: Vec<T>) -> Vec<T> {
    x.into_iter().map(|v| v.max(-T::one()).min(T::one())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_model, ModelSpec};

    fn model(sizes: Vec<u64>, j: &[&[f64]], h: &[f64]) -> ValidatedModel<f64> {
        let rows: Vec<Vec<f64>> = j.iter().map(|r| r.to_vec()).collect();
        validate_model(ModelSpec::new(sizes, &rows, h.to_vec()).unwrap()).unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo).signum() == f(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn origin_is_exact_fixed_point_without_field() {
        let m = model(vec![1, 1], &[&[0.8, 0.3], &[0.3, 0.8]], &[0.0, 0.0]);
        assert_eq!(solve_mean_field(&[0.0, 0.0], &m, 1e-12).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_root_matches_bisection() {
        let m = model(vec![1], &[&[1.5]], &[0.0]);
        let mu = solve_mean_field(&[0.5], &m, 1e-12).unwrap()[0];
        let oracle = bisect(|x| x - (1.5 * x).tanh(), 0.1, 1.0);
        assert!((mu - oracle).abs() < 1e-12, "{mu} vs {oracle}");
        assert!((mu - 0.858).abs() < 1e-3);
    }

    #[test]
    fn symmetric_field_gives_symmetric_solution() {
        let m = model(vec![1, 1], &[&[0.8, 0.3], &[0.3, 0.8]], &[0.1, 0.1]);
        let mu = solve_mean_field(&[0.0, 0.0], &m, 1e-12).unwrap();
        assert!(mean_field_residual(&mu, &m) <= 1e-12);
        assert!((mu[0] - mu[1]).abs() < 1e-14);
    }

    #[test]
    fn degenerate_minimum_is_located_in_position() {
        let m = model(vec![1, 1], &[&[2.0, 0.0], &[0.0, 2.0]], &[0.0, 0.0]);
        let mu = solve_mean_field(&[0.7, -0.4], &m, 1e-12).unwrap();
        assert!(mu.iter().all(|v| v.abs() < 1e-6), "{mu:?}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let m = model(vec![1], &[&[1.5]], &[0.0]);
        assert!(solve_mean_field(&[0.5], &m, 0.0).is_err());
        assert!(solve_mean_field(&[0.5, 0.1], &m, 1e-12).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let m = model(vec![1], &[&[1.0]], &[0.0]);
        let opts = SolverOptions {
            max_damped: 3,
            max_newton: 0,
            ..SolverOptions::default()
        };
        match solve_mean_field_with(&[0.9], &m, 1e-14, &opts) {
            Err(Error::NonConvergence { iterations, .. }) => assert_eq!(iterations, 3),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
