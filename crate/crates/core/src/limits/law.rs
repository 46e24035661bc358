//! Limit laws of the normalized sum vector and their moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::minima::{sphere_directions, CriticalPoint, HomogeneousType};
use crate::landscape::functional::taylor4_g;
use crate::limits::chi::{susceptibility_chi, susceptibility_chi_on, SINGULAR_REL_TOL};
use crate::limits::quadrature::{integrate_box, QuadratureOptions};
use crate::linalg::Matrix;
use crate::model::ValidatedModel;
use crate::moments::{MomentReport, RawLayout};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Tail mass allowed outside the quadrature box.
pub const TAIL_MASS: f64 = 1e-14;
/// Largest dimension of a non-separable quartic block integrated by nested quadrature.
pub const MAX_NESTED_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawKind {
    Gaussian,
    Quartic,
    Product,
}

/// One factor of a product law, acting on the coordinates `coords`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LawBlock<T: Scalar> {
    pub coords: Vec<usize>,
    pub kind: LawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<Matrix<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quartic: Option<Tensor<T>>,
}

/// The limiting distribution of `x_l = (S_l − N_l μ_l) / N_l^{1−γ_l}`.
///
/// A Gaussian law has covariance `chi`. A quartic law has density
/// proportional to `exp(−Σ Q_ijkl x_i x_j x_k x_l)` with `Q` stored in `quartic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LimitLaw<T: Scalar> {
    pub kind: LawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<Matrix<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quartic: Option<Tensor<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_coordinate: Option<Vec<LawBlock<T>>>,
    pub exponents: Vec<T>,
    pub center: Vec<T>,
}

impl<T: Scalar> LimitLaw<T> {
    pub fn gaussian(chi: Matrix<T>, center: Vec<T>) -> Self {
        let n = chi.rows();
        Self {
            kind: LawKind::Gaussian,
            chi: Some(chi),
            quartic: None,
            per_coordinate: None,
            exponents: vec![T::of(0.5); n],
            center,
        }
    }

    pub fn quartic(q: Tensor<T>, center: Vec<T>) -> Self {
        let n = q.dim();
        Self {
            kind: LawKind::Quartic,
            chi: None,
            quartic: Some(q),
            per_coordinate: None,
            exponents: vec![T::of(0.25); n],
            center,
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Blocks of independent coordinates (a single block unless `Product`).
    pub fn blocks(&self) -> Vec<LawBlock<T>> {
        match self.kind {
            LawKind::Product => self.per_coordinate.clone().unwrap_or_default(),
            kind => vec![LawBlock {
                coords: (0..self.dim()).collect(),
                kind,
                chi: self.chi.clone(),
                quartic: self.quartic.clone(),
            }],
        }
    }

    /// Unnormalized log-density at `x`.
    pub fn log_density_unnormalized(&self, x: &[T]) -> Result<T> {
        let mut total = T::zero();
        for block in self.blocks() {
            let xb: Vec<T> = block.coords.iter().map(|&i| x[i]).collect();
            total += block_log_density(&block, &xb)?;
        }
        Ok(total)
    }
}

fn block_log_density<T: Scalar>(block: &LawBlock<T>, x: &[T]) -> Result<T> {
    match block.kind {
        LawKind::Gaussian => {
            let chi = block.chi.as_ref().ok_or_else(|| Error::InvalidParameter("Gaussian block without chi".into()))?;
            let lu = chi
                .lu(T::of(SINGULAR_REL_TOL))
                .ok_or_else(|| Error::Degenerate("covariance is singular".into()))?;
            let y = lu.solve(x);
            Ok(-T::of(0.5) * x.iter().zip(&y).map(|(&a, &b)| a * b).sum::<T>())
        }
        LawKind::Quartic => {
            let q = block
                .quartic
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("quartic block without coefficients".into()))?;
            Ok(-q.form(x))
        }
        LawKind::Product => Err(Error::InvalidParameter("nested product block".into())),
    }
}

/// Coefficients of `G₄(x / α^{1/4})` from the fourth-order partials of `G`.
pub fn rescaled_quartic<T: Scalar>(fourth: &Tensor<T>, alphas: &[T]) -> Tensor<T> {
    let quarter: Vec<T> = alphas.iter().map(|a| a.powf(T::of(0.25))).collect();
    fourth.map(|idx, v| {
        let s = idx.iter().fold(T::one(), |acc, &i| acc * quarter[i]);
        v / (T::of(24.0) * s)
    })
}

/// The limit law predicted for a classified minimum.
pub fn build_limit_law<T: Scalar>(pt: &CriticalPoint<T>, model: &ValidatedModel<T>) -> Result<LimitLaw<T>> {
    let n = model.n();
    let alphas = model.alphas();
    let fourth = || {
        pt.quartic
            .clone()
            .unwrap_or_else(|| taylor4_g(&pt.mu, model).fourth)
    };
    match pt.k {
        HomogeneousType::Type1 => Ok(LimitLaw::gaussian(susceptibility_chi(&pt.mu, model)?, pt.mu.clone())),
        HomogeneousType::Type2 => Ok(LimitLaw::quartic(rescaled_quartic(&fourth(), alphas), pt.mu.clone())),
        HomogeneousType::NonHomogeneousSeparable => {
            let null = pt.null_coords.clone();
            let rest: Vec<usize> = (0..n).filter(|i| !null.contains(i)).collect();
            if null.is_empty() || rest.is_empty() {
                return Err(Error::Unclassified("separable minimum without two blocks".into()));
            }
            let q = rescaled_quartic(&fourth(), alphas).restrict(&null);
            let chi = susceptibility_chi_on(&pt.mu, model, &rest)?;
            let mut exponents = vec![T::of(0.5); n];
            for &i in &null {
                exponents[i] = T::of(0.25);
            }
            let mut blocks = vec![
                LawBlock {
                    coords: null,
                    kind: LawKind::Quartic,
                    chi: None,
                    quartic: Some(q),
                },
                LawBlock {
                    coords: rest,
                    kind: LawKind::Gaussian,
                    chi: Some(chi),
                    quartic: None,
                },
            ];
            blocks.sort_by_key(|b| b.coords[0]);
            Ok(LimitLaw {
                kind: LawKind::Product,
                chi: None,
                quartic: None,
                per_coordinate: Some(blocks),
                exponents,
                center: pt.mu.clone(),
            })
        }
        HomogeneousType::Unclassified => Err(Error::Unclassified(format!(
            "no limit law for the minimum at {:?}",
            pt.mu.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>()
        ))),
    }
}

/// Block moments: (mean, covariance, third, fourth, cross-fourth, log-normalizer).
struct BlockMoments<T> {
    raw: Vec<T>,
    log_z: T,
}

fn gaussian_block<T: Scalar>(chi: &Matrix<T>) -> Result<BlockMoments<T>> {
    let k = chi.rows();
    let layout = RawLayout { n: k };
    let mut raw = vec![T::zero(); layout.len()];
    raw[0] = T::one();
    for l in 0..k {
        raw[layout.fourth_index(l)] = T::of(3.0) * chi[(l, l)] * chi[(l, l)];
        for m in 0..k {
            raw[layout.second_index(l, m)] = chi[(l, m)];
        }
    }
    let lu = chi
        .lu(T::of(SINGULAR_REL_TOL))
        .ok_or_else(|| Error::Degenerate("covariance is singular".into()))?;
    let log_z = T::of(0.5) * ((T::TAU()).ln() * T::of_usize(k) + lu.det().ln());
    let mut cross = Vec::new();
    for l in 0..k {
        for m in 0..k {
            cross.push(chi[(l, l)] * chi[(m, m)] + T::of(2.0) * chi[(l, m)] * chi[(l, m)]);
        }
    }
    let base = 1 + 3 * k + k * k;
    raw[base..].copy_from_slice(&cross);
    Ok(BlockMoments { raw, log_z })
}

/// Smallest value of the quartic form on sampled unit directions.
fn quartic_min_on_sphere<T: Scalar>(q: &Tensor<T>) -> T {
    sphere_directions::<T>(q.dim(), 1000)
        .iter()
        .fold(T::infinity(), |m, u| m.min(q.form(u)))
}

fn quartic_block<T: Scalar>(q: &Tensor<T>) -> Result<BlockMoments<T>> {
    let k = q.dim();
    let layout = RawLayout { n: k };
    let c_min = quartic_min_on_sphere(q);
    if !(c_min > T::zero()) {
        return Err(Error::Degenerate("quartic exponent is not positive on the sphere".into()));
    }
    let opts = QuadratureOptions::default();
    let length = |c: T| T::of(1.2) * ((T::one() / T::of(TAIL_MASS)).ln() / c).powf(T::of(0.25));

    if q.is_diagonal(T::zero()) && k > 1 {
        // Independent coordinates: combine one-dimensional integrals.
        let mut per: Vec<Vec<T>> = Vec::with_capacity(k);
        for i in 0..k {
            let c = q.get(&[i, i, i, i]);
            let l = length(c);
            let v = integrate_box(
                &|x: &[T]| {
                    let w = (-c * x[0] * x[0] * x[0] * x[0]).exp();
                    (0..5).map(|p| w * x[0].powi(p)).collect()
                },
                1,
                l,
                &opts,
            )?;
            per.push(v.iter().map(|&m| m / v[0]).chain(std::iter::once(v[0])).collect());
        }
        let mut raw = vec![T::zero(); layout.len()];
        raw[0] = T::one();
        for l in 0..k {
            raw[layout.first_index(l)] = per[l][1];
            raw[layout.third_index(l)] = per[l][3];
            raw[layout.fourth_index(l)] = per[l][4];
            for m in 0..k {
                raw[layout.second_index(l, m)] = if l == m { per[l][2] } else { per[l][1] * per[m][1] };
            }
        }
        let base = 1 + 3 * k + k * k;
        for l in 0..k {
            for m in 0..k {
                raw[base + l * k + m] = if l == m { per[l][4] } else { per[l][2] * per[m][2] };
            }
        }
        let log_z = per.iter().map(|p| p[5].ln()).sum();
        return Ok(BlockMoments { raw, log_z });
    }
    if k > MAX_NESTED_DIM {
        return Err(Error::Quadrature(format!(
            "non-separable quartic law of dimension {k} exceeds the nested quadrature limit {MAX_NESTED_DIM}"
        )));
    }
    let l = length(c_min);
    let v = integrate_box(
        &|x: &[T]| {
            let w = (-q.form(x)).exp();
            layout.monomials(x).into_iter().map(|m| m * w).collect()
        },
        k,
        l,
        &opts,
    )?;
    let z = v[0];
    let raw = v.iter().map(|&m| m / z).collect();
    Ok(BlockMoments { raw, log_z: z.ln() })
}

/// Moments of a limit law: exact for Gaussian blocks, by quadrature for quartic ones.
pub fn law_moments<T: Scalar>(law: &LimitLaw<T>) -> Result<MomentReport<T>> {
    let n = law.dim();
    let layout = RawLayout { n };
    let mut raw = vec![T::zero(); layout.len()];
    raw[0] = T::one();
    let blocks = law.blocks();
    let mut log_z = T::zero();
    let mut block_of = vec![0usize; n];
    let mut pos_in = vec![0usize; n];
    let mut block_raw = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.iter().enumerate() {
        let moments = match block.kind {
            LawKind::Gaussian => gaussian_block(block.chi.as_ref().ok_or_else(|| {
                Error::InvalidParameter("Gaussian block without chi".into())
            })?)?,
            LawKind::Quartic => quartic_block(block.quartic.as_ref().ok_or_else(|| {
                Error::InvalidParameter("quartic block without coefficients".into())
            })?)?,
            LawKind::Product => return Err(Error::InvalidParameter("nested product block".into())),
        };
        log_z += moments.log_z;
        for (p, &c) in block.coords.iter().enumerate() {
            block_of[c] = b;
            pos_in[c] = p;
        }
        block_raw.push((RawLayout { n: block.coords.len() }, moments.raw));
    }
    let first = |c: usize| {
        let (lay, r) = &block_raw[block_of[c]];
        r[lay.first_index(pos_in[c])]
    };
    let second = |c: usize, d: usize| {
        let (lay, r) = &block_raw[block_of[c]];
        r[lay.second_index(pos_in[c], pos_in[d])]
    };
    for l in 0..n {
        let (lay, r) = &block_raw[block_of[l]];
        let pl = pos_in[l];
        raw[layout.first_index(l)] = r[lay.first_index(pl)];
        raw[layout.third_index(l)] = r[lay.third_index(pl)];
        raw[layout.fourth_index(l)] = r[lay.fourth_index(pl)];
        let base = 1 + 3 * lay.n + lay.n * lay.n;
        let cross_base = 1 + 3 * n + n * n;
        for m in 0..n {
            if block_of[l] == block_of[m] {
                raw[layout.second_index(l, m)] = r[lay.second_index(pl, pos_in[m])];
                raw[cross_base + l * n + m] = r[base + pl * lay.n + pos_in[m]];
            } else {
                raw[layout.second_index(l, m)] = first(l) * first(m);
                raw[cross_base + l * n + m] = second(l, l) * second(m, m);
            }
        }
    }
    let mut report = layout.report(&raw, law.center.clone(), law.exponents.clone());
    report.log_normalizer = Some(log_z);
    Ok(report)
}
