//! `G`, the pressure functional `p̄ = ln 2 - G`, the convex function `Φ`,
//! and analytic derivatives of `G` up to fourth order.
//!
//! With `y_l(x) = Σ_s α_s J_ls x_s + h_l` and `B_ls = α_s J_ls`:
//!
//! ```text
//! G(x)        = ½ Σ α_l α_s J_ls x_l x_s − Σ_l α_l ln cosh y_l
//! ∂_i G       = Σ_s α_i α_s J_is x_s − Σ_l α_l tanh(y_l) B_li
//! ∂_ij G      = α_i α_j J_ij − Σ_l α_l sech²(y_l) B_li B_lj
//! ∂_ijk G     = −Σ_l α_l f'''(y_l) B_li B_lj B_lk
//! ∂_ijkl G    = −Σ_l α_l f''''(y_l) B_li B_lj B_lk B_lm
//! ```
//!
//! where `f = ln cosh`, `f''' = −2t(1−t²)`, `f'''' = (6t²−2)(1−t²)`, `t = tanh y`.

use crate::linalg::Matrix;
use crate::model::ValidatedModel;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Effective fields `y_l = Σ_s α_s J_ls x_s + h_l`.
pub fn effective_fields<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> Vec<T> {
    let n = model.n();
    let a = model.alphas();
    let j = model.coupling();
    let h = model.field();
    (0..n)
        .map(|l| (0..n).map(|s| a[s] * j[(l, s)] * x[s]).sum::<T>() + h[l])
        .collect()
}

/// `½ Σ α_l α_s J_ls x_l x_s`.
pub fn quadratic_part<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> T {
    let n = model.n();
    let a = model.alphas();
    let j = model.coupling();
    let mut q = T::zero();
    for l in 0..n {
        for s in 0..n {
            q += a[l] * a[s] * j[(l, s)] * x[l] * x[s];
        }
    }
    q * T::of(0.5)
}

/// `Φ(x) = Σ_l α_l ln cosh y_l(x)`, strictly convex.
pub fn eval_phi<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> T {
    let a = model.alphas();
    effective_fields(x, model)
        .into_iter()
        .zip(a)
        .map(|(y, &al)| al * y.ln_cosh())
        .sum()
}

pub fn eval_g<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> T {
    quadratic_part(x, model) - eval_phi(x, model)
}

/// `p̄(x) = ln 2 − ½ Σ α_l α_s J_ls x_l x_s + Σ α_l ln cosh y_l`.
pub fn eval_pressure_functional<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> T {
    T::LN_2() - quadratic_part(x, model) + eval_phi(x, model)
}

/// The mean-field map `x ↦ tanh(y(x))`.
pub fn mean_field_map<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> Vec<T> {
    effective_fields(x, model).into_iter().map(T::tanh).collect()
}

/// `‖x − tanh(y(x))‖_∞`.
pub fn mean_field_residual<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> T {
    x.iter()
        .zip(mean_field_map(x, model))
        .fold(T::zero(), |m, (&xi, ti)| m.max((xi - ti).abs()))
}

fn b_matrix<T: Scalar>(model: &ValidatedModel<T>) -> Matrix<T> {
    let a = model.alphas();
    let j = model.coupling();
    Matrix::from_fn(model.n(), model.n(), |l, s| a[s] * j[(l, s)])
}

pub fn grad_g<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> Vec<T> {
    let n = model.n();
    let a = model.alphas();
    let j = model.coupling();
    let b = b_matrix(model);
    let t = mean_field_map(x, model);
    (0..n)
        .map(|i| {
            let quad: T = (0..n).map(|s| a[i] * a[s] * j[(i, s)] * x[s]).sum();
            let lc: T = (0..n).map(|l| a[l] * t[l] * b[(l, i)]).sum();
            quad - lc
        })
        .collect()
}

pub fn hess_g<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> Matrix<T> {
    let n = model.n();
    let a = model.alphas();
    let j = model.coupling();
    let b = b_matrix(model);
    let w: Vec<T> = mean_field_map(x, model)
        .into_iter()
        .zip(a)
        .map(|(t, &al)| al * (T::one() - t * t))
        .collect();
    Matrix::from_fn(n, n, |i, k| {
        let curv: T = (0..n).map(|l| w[l] * b[(l, i)] * b[(l, k)]).sum();
        a[i] * a[k] * j[(i, k)] - curv
    })
}

/// Hessian of `Φ`; positive semidefinite everywhere.
pub fn hess_phi<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> Matrix<T> {
    let n = model.n();
    let a = model.alphas();
    let b = b_matrix(model);
    let w: Vec<T> = mean_field_map(x, model)
        .into_iter()
        .zip(a)
        .map(|(t, &al)| al * (T::one() - t * t))
        .collect();
    Matrix::from_fn(n, n, |i, k| (0..n).map(|l| w[l] * b[(l, i)] * b[(l, k)]).sum())
}

/// Third- and fourth-order partial derivatives of `G` at a point.
#[derive(Debug, Clone)]
pub struct Taylor4<T> {
    pub third: Tensor<T>,
    pub fourth: Tensor<T>,
}

impl<T: Scalar> Taylor4<T> {
    /// The quartic Taylor term `G₄(u) = (1/24) Σ ∂⁴G_ijkl u_i u_j u_k u_l`.
    pub fn quartic_term(&self, u: &[T]) -> T {
        self.fourth.form(u) / T::of(24.0)
    }
}

/// Analytic third and fourth derivatives of `G` at `x` (normally a stationary point).
pub fn taylor4_g<T: Scalar>(x: &[T], model: &ValidatedModel<T>) -> Taylor4<T> {
    let n = model.n();
    let a = model.alphas();
    let b = b_matrix(model);
    let t = mean_field_map(x, model);
    let two = T::of(2.0);
    let d3: Vec<T> = t
        .iter()
        .zip(a)
        .map(|(&t, &al)| al * (-two * t * (T::one() - t * t)))
        .collect();
    let d4: Vec<T> = t
        .iter()
        .zip(a)
        .map(|(&t, &al)| al * ((T::of(6.0) * t * t - two) * (T::one() - t * t)))
        .collect();
    let mut third = Tensor::zeros(n, 3);
    let mut fourth = Tensor::zeros(n, 4);
    for i in 0..n {
        for jj in 0..n {
            for k in 0..n {
                let v3: T = (0..n)
                    .map(|l| d3[l] * b[(l, i)] * b[(l, jj)] * b[(l, k)])
                    .sum();
                third.set(&[i, jj, k], -v3);
                for m in 0..n {
                    let v4: T = (0..n)
                        .map(|l| d4[l] * b[(l, i)] * b[(l, jj)] * b[(l, k)] * b[(l, m)])
                        .sum();
                    fourth.set(&[i, jj, k, m], -v4);
                }
            }
        }
    }
    Taylor4 { third, fourth }
}
