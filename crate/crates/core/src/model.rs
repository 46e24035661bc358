//! Model parameters: species partition, reduced interaction matrix `J`,
//! external fields `h`, and the two equivalent forms of the Hamiltonian.

use std::path::Path;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Asymmetry up to this size is averaged away on ingestion; larger is an error.
pub const SYMMETRIZE_TOL: f64 = 1e-12;

/// Relative threshold on the smallest eigenvalue of `J` for positive definiteness.
pub const PD_REL_TOL: f64 = 1e-10;

/// Per-species particle counts with exact proportions `α_l = N_l / N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeciesPartition {
    sizes: Vec<u64>,
    alphas: Vec<Ratio<u64>>,
}

impl SpeciesPartition {
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidModel("at least one species required".into()));
        }
        if let Some(l) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidModel(format!("species {l} has size 0")));
        }
        let total: u64 = sizes.iter().sum();
        let alphas = sizes.iter().map(|&s| Ratio::new(s, total)).collect();
        Ok(Self { sizes, alphas })
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn total(&self) -> u64 {
        self.sizes.iter().sum()
    }

    pub fn alphas(&self) -> &[Ratio<u64>] {
        &self.alphas
    }

    pub fn alpha<T: Scalar>(&self, l: usize) -> T {
        let a = self.alphas[l];
        T::from_u64(*a.numer()).unwrap() / T::from_u64(*a.denom()).unwrap()
    }

    pub fn alpha_vec<T: Scalar>(&self) -> Vec<T> {
        (0..self.n()).map(|l| self.alpha(l)).collect()
    }

    /// Species index of every site, in block order.
    pub fn site_species(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(l, &s)| std::iter::repeat(l).take(s as usize))
            .collect()
    }

    /// True when both partitions have identical proportions α.
    pub fn same_proportions(&self, other: &Self) -> bool {
        self.alphas == other.alphas
    }

    /// Smallest integer weights with the same proportions (sizes divided by their gcd).
    pub fn reduced_weights(&self) -> Vec<u64> {
        let g = self.sizes.iter().fold(0u64, |g, &s| g.gcd(&s));
        self.sizes.iter().map(|&s| s / g).collect()
    }
}

/// On-disk model document: `{"sizes": [...], "J": [[...]], "h": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelFile {
    pub sizes: Vec<u64>,
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

/// Raw model parameters. Invariants are checked by [`validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    pub partition: SpeciesPartition,
    pub coupling: Matrix<T>,
    pub field: Vec<T>,
}

impl<T: Scalar> ModelSpec<T> {
    /// Builds a model from sizes, rows of `J`, and `h`. Applies the
    /// ingestion rule: asymmetry ≤ [`SYMMETRIZE_TOL`] is averaged, larger is rejected.
    pub fn new(sizes: Vec<u64>, j_rows: &[Vec<T>], h: Vec<T>) -> Result<Self> {
        let partition = SpeciesPartition::new(sizes)?;
        let n = partition.n();
        if j_rows.len() != n || j_rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidModel(format!("J must be {n}x{n}")));
        }
        if h.len() != n {
            return Err(Error::InvalidModel(format!(
                "h has length {}, expected {n}",
                h.len()
            )));
        }
        let j = Matrix::from_rows(j_rows).expect("shape checked");
        for l in 0..n {
            for s in 0..n {
                if !j[(l, s)].is_finite() {
                    return Err(Error::InvalidModel(format!("J[{l}][{s}] is not finite")));
                }
            }
            if !h[l].is_finite() {
                return Err(Error::InvalidModel(format!("h[{l}] is not finite")));
            }
        }
        let mut coupling = j;
        for l in 0..n {
            for s in 0..l {
                let d = (coupling[(l, s)] - coupling[(s, l)]).abs();
                if d > T::of(SYMMETRIZE_TOL) {
                    return Err(Error::InvalidModel(format!(
                        "J is not symmetric: J[{l}][{s}]={} vs J[{s}][{l}]={}",
                        coupling[(l, s)],
                        coupling[(s, l)]
                    )));
                }
                if d > T::zero() {
                    let avg = (coupling[(l, s)] + coupling[(s, l)]) * T::of(0.5);
                    coupling[(l, s)] = avg;
                    coupling[(s, l)] = avg;
                }
            }
        }
        Ok(Self {
            partition,
            coupling,
            field: h,
        })
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        let rows: Vec<Vec<T>> = file
            .j
            .iter()
            .map(|r| r.iter().map(|&x| T::of(x)).collect())
            .collect();
        Self::new(
            file.sizes.clone(),
            &rows,
            file.h.iter().map(|&x| T::of(x)).collect(),
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        Self::from_file(&file)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            sizes: self.partition.sizes().to_vec(),
            j: self
                .coupling
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(Scalar::to_f64_lossy).collect())
                .collect(),
            h: self.field.iter().map(|x| x.to_f64_lossy()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    /// Same couplings and fields on a different partition.
    pub fn with_partition(&self, partition: SpeciesPartition) -> Result<Self> {
        if partition.n() != self.n() {
            return Err(Error::Dimension(format!(
                "partition has {} species, model has {}",
                partition.n(),
                self.n()
            )));
        }
        Ok(Self {
            partition,
            coupling: self.coupling.clone(),
            field: self.field.clone(),
        })
    }

    /// Relabels species: new species `i` is old species `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let sizes = perm.iter().map(|&p| self.partition.sizes()[p]).collect();
        let rows: Vec<Vec<T>> = perm
            .iter()
            .map(|&p| perm.iter().map(|&q| self.coupling[(p, q)]).collect())
            .collect();
        Self::new(sizes, &rows, perm.iter().map(|&p| self.field[p]).collect())
    }
}

/// A model that passed validation, with its convexity verdict and the
/// matrix `A = D_α J D_α`, `D_α = diag(√α_l)`.
#[derive(Debug, Clone)]
pub struct ValidatedModel<T> {
    spec: ModelSpec<T>,
    alphas: Vec<T>,
    positive_definite: bool,
    a_matrix: Matrix<T>,
    smallest_eigenvalue: T,
}

impl<T: Scalar> ValidatedModel<T> {
    pub fn spec(&self) -> &ModelSpec<T> {
        &self.spec
    }

    pub fn partition(&self) -> &SpeciesPartition {
        &self.spec.partition
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }

    pub fn coupling(&self) -> &Matrix<T> {
        &self.spec.coupling
    }

    pub fn field(&self) -> &[T] {
        &self.spec.field
    }

    pub fn positive_definite(&self) -> bool {
        self.positive_definite
    }

    pub fn a_matrix(&self) -> &Matrix<T> {
        &self.a_matrix
    }

    pub fn smallest_eigenvalue(&self) -> T {
        self.smallest_eigenvalue
    }

    /// Magnitude scale used by relative tolerances: `max(1, max|J|, max|h|)`.
    pub fn scale(&self) -> T {
        let h = self
            .spec
            .field
            .iter()
            .fold(T::zero(), |m, &x| if x.abs() > m { x.abs() } else { m });
        T::one().max(self.spec.coupling.max_abs()).max(h)
    }

    /// Errors unless `J` is positive definite.
    pub fn require_positive_definite(&self) -> Result<()> {
        if self.positive_definite {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite {
                smallest_eigenvalue: self.smallest_eigenvalue.to_f64_lossy(),
            })
        }
    }
}

/// Validates `spec` and decides positive definiteness of `J` by a full
/// symmetric eigen-decomposition.
pub fn validate_model<T: Scalar>(spec: ModelSpec<T>) -> Result<ValidatedModel<T>> {
    let n = spec.n();
    let j = &spec.coupling;
    if j.rows() != n || j.cols() != n {
        return Err(Error::InvalidModel(format!("J must be {n}x{n}")));
    }
    if spec.field.len() != n {
        return Err(Error::InvalidModel(format!("h must have length {n}")));
    }
    for l in 0..n {
        for s in 0..l {
            if j[(l, s)] != j[(s, l)] {
                return Err(Error::InvalidModel(format!(
                    "J is not symmetric: J[{l}][{s}]={} vs J[{s}][{l}]={}",
                    j[(l, s)],
                    j[(s, l)]
                )));
            }
        }
    }
    for l in 0..n {
        if !(j[(l, l)] > T::zero()) {
            return Err(Error::InvalidModel(format!(
                "diagonal entry J[{l}][{l}]={} must be positive",
                j[(l, l)]
            )));
        }
    }
    let eig = j.sym_eigen();
    let smallest = eig.values[0];
    let norm = eig.spectral_radius();
    let positive_definite = smallest > T::of(PD_REL_TOL) * T::one().max(norm);
    let alphas = spec.partition.alpha_vec::<T>();
    let sqrt_a: Vec<T> = alphas.iter().map(|a| a.sqrt()).collect();
    let a_matrix = j.scale_rows_cols(&sqrt_a, &sqrt_a).symmetrized();
    Ok(ValidatedModel {
        spec,
        alphas,
        positive_definite,
        a_matrix,
        smallest_eigenvalue: smallest,
    })
}

/// A spin configuration laid out in species blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    spins: Vec<i8>,
}

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(i) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!("spin {i} is {} (must be ±1)", spins[i])));
        }
        Ok(Self { spins })
    }

    /// Configuration number `bits` of `n_sites` spins: bit i set ⇔ σ_i = +1.
    pub fn from_bits(bits: u64, n_sites: usize) -> Self {
        Self {
            spins: (0..n_sites)
                .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
                .collect(),
        }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn flipped(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|&s| -s).collect(),
        }
    }

    fn check(&self, partition: &SpeciesPartition) -> Result<()> {
        if self.spins.len() as u64 != partition.total() {
            return Err(Error::Dimension(format!(
                "configuration has {} spins, partition has {}",
                self.spins.len(),
                partition.total()
            )));
        }
        Ok(())
    }

    /// Per-species spin sums S_l.
    pub fn sums(&self, partition: &SpeciesPartition) -> Result<Vec<i64>> {
        self.check(partition)?;
        let mut sums = vec![0i64; partition.n()];
        for (s, l) in self.spins.iter().zip(partition.site_species()) {
            sums[l] += i64::from(*s);
        }
        Ok(sums)
    }

    /// Per-species magnetizations m_l = S_l / N_l.
    pub fn magnetizations<T: Scalar>(&self, partition: &SpeciesPartition) -> Result<Vec<T>> {
        Ok(self
            .sums(partition)?
            .into_iter()
            .zip(partition.sizes())
            .map(|(s, &n)| T::from_i64(s).unwrap() / T::from_u64(n).unwrap())
            .collect())
    }
}

/// Hamiltonian as the explicit pair sum over all sites (self-terms i=j included):
/// `H = -(1/2N) Σ_{i,j} J_ij σ_i σ_j - Σ_i h_i σ_i`.
pub fn energy_quadratic<T: Scalar>(config: &SpinConfig, model: &ValidatedModel<T>) -> Result<T> {
    let partition = model.partition();
    config.check(partition)?;
    let species = partition.site_species();
    let j = model.coupling();
    let h = model.field();
    let mut pair = T::zero();
    for (i, &si) in config.spins.iter().enumerate() {
        let li = species[i];
        let mut row = T::zero();
        for (k, &sk) in config.spins.iter().enumerate() {
            row += j[(li, species[k])] * T::from_i8(sk).unwrap();
        }
        pair += row * T::from_i8(si).unwrap();
    }
    let mut field = T::zero();
    for (i, &si) in config.spins.iter().enumerate() {
        field += h[species[i]] * T::from_i8(si).unwrap();
    }
    let n = T::from_u64(partition.total()).unwrap();
    Ok(-pair / (n + n) - field)
}

/// Per-spin energy density `g(m) = ½ Σ α_l α_s J_ls m_l m_s + Σ α_l h_l m_l`.
pub fn g_per_spin<T: Scalar>(m: &[T], model: &ValidatedModel<T>) -> Result<T> {
    let n = model.n();
    if m.len() != n {
        return Err(Error::Dimension(format!("m has length {}, expected {n}", m.len())));
    }
    if let Some(l) = m.iter().position(|x| !(x.abs() <= T::one())) {
        return Err(Error::Domain(format!("|m[{l}]| = {} exceeds 1", m[l].abs())));
    }
    let a = model.alphas();
    let j = model.coupling();
    let h = model.field();
    let mut quad = T::zero();
    for l in 0..n {
        for s in 0..n {
            quad += a[l] * a[s] * j[(l, s)] * m[l] * m[s];
        }
    }
    let lin: T = (0..n).map(|l| a[l] * h[l] * m[l]).sum();
    Ok(quad * T::of(0.5) + lin)
}
