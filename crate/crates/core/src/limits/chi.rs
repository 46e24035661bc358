//! The limiting covariance `χ̃` of the √N-normalized sums, by implicit
//! differentiation of the mean-field equations and by the Hessian identity
//! `χ̃ = H̃⁻¹ − A⁻¹`.

use crate::error::{Error, Result};
use crate::landscape::functional::hess_g;
use crate::linalg::Matrix;
use crate::model::ValidatedModel;
use crate::scalar::Scalar;

/// Pivot threshold (relative to the largest entry) below which a linear
/// system is treated as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

fn all_coords(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// `∂μ/∂h = (I − D M)⁻¹ D` with `D = diag(1−μ²)`, `M_ls = α_s J_ls`,
/// restricted to the coordinates in `coords`.
///
/// Restriction is exact only when `coords` is a decoupled block of `J`.
pub fn response_jacobian_on<T: Scalar>(
    mu: &[T],
    model: &ValidatedModel<T>,
    coords: &[usize],
) -> Result<Matrix<T>> {
    if mu.len() != model.n() {
        return Err(Error::Dimension(format!("mu has length {}, expected {}", mu.len(), model.n())));
    }
    let a = model.alphas();
    let j = model.coupling();
    let k = coords.len();
    let d: Vec<T> = coords.iter().map(|&l| T::one() - mu[l] * mu[l]).collect();
    let i_minus_dm = Matrix::from_fn(k, k, |r, c| {
        let (l, s) = (coords[r], coords[c]);
        let delta = if r == c { T::one() } else { T::zero() };
        delta - d[r] * a[s] * j[(l, s)]
    });
    let lu = i_minus_dm.lu(T::of(SINGULAR_REL_TOL)).ok_or_else(|| {
        Error::Degenerate("I − D·M is singular: the point is critical, not Type1".into())
    })?;
    Ok(lu.inverse().scale_rows_cols(&vec![T::one(); k], &d))
}

pub fn response_jacobian<T: Scalar>(mu: &[T], model: &ValidatedModel<T>) -> Result<Matrix<T>> {
    response_jacobian_on(mu, model, &all_coords(model.n()))
}

/// `χ̃` on a decoupled coordinate block, assembled from the response
/// Jacobian: `χ̃_ll = ∂μ_l/∂h_l`, `χ̃_lm = sign(∂μ_l/∂h_m)·√|∂μ_l/∂h_m · ∂μ_m/∂h_l|`.
pub fn susceptibility_chi_on<T: Scalar>(
    mu: &[T],
    model: &ValidatedModel<T>,
    coords: &[usize],
) -> Result<Matrix<T>> {
    let r = response_jacobian_on(mu, model, coords)?;
    let k = coords.len();
    let sign_tol = T::of(1e-10) * r.max_abs();
    let mut chi = Matrix::zeros(k, k);
    for l in 0..k {
        chi[(l, l)] = r[(l, l)];
        for m in 0..l {
            let (p, q) = (r[(l, m)], r[(m, l)]);
            if p * q < T::zero() && p.abs().min(q.abs()) > sign_tol {
                return Err(Error::Degenerate(format!(
                    "cross-derivatives ∂μ_{l}/∂h_{m} = {p} and ∂μ_{m}/∂h_{l} = {q} differ in sign"
                )));
            }
            let dominant = if p.abs() >= q.abs() { p } else { q };
            let v = (p * q).abs().sqrt();
            let v = if dominant < T::zero() { -v } else { v };
            chi[(l, m)] = v;
            chi[(m, l)] = v;
        }
    }
    Ok(chi)
}

pub fn susceptibility_chi<T: Scalar>(mu: &[T], model: &ValidatedModel<T>) -> Result<Matrix<T>> {
    susceptibility_chi_on(mu, model, &all_coords(model.n()))
}

/// `χ̃ = H̃⁻¹ − A⁻¹` with `H̃ = D_α⁻¹ H_G D_α⁻¹`, `D_α = diag(√α)`.
pub fn chi_via_hessian<T: Scalar>(mu: &[T], model: &ValidatedModel<T>) -> Result<Matrix<T>> {
    if mu.len() != model.n() {
        return Err(Error::Dimension(format!("mu has length {}, expected {}", mu.len(), model.n())));
    }
    let inv_sqrt: Vec<T> = model.alphas().iter().map(|a| a.sqrt().recip()).collect();
    let h_tilde = hess_g(mu, model).scale_rows_cols(&inv_sqrt, &inv_sqrt);
    let tol = T::of(SINGULAR_REL_TOL);
    let h_inv = h_tilde
        .inverse(tol)
        .ok_or_else(|| Error::Degenerate("rescaled Hessian is singular: the point is not Type1".into()))?;
    let a_inv = model
        .a_matrix()
        .inverse(tol)
        .ok_or_else(|| Error::Degenerate("A = D_α J D_α is singular".into()))?;
    Ok(h_inv.sub(&a_inv).symmetrized())
}
