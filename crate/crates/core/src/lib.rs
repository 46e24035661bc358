//! Multi-species Curie–Weiss models: mean-field equations, classification
//! of the minima of `G`, limit laws of the normalized spin sums, and exact
//! finite-N verification.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); species
//! proportions are exact rationals. The aliases below fix `f64`.

pub mod error;
pub mod exactdist;
pub mod landscape;
pub mod limits;
pub mod linalg;
pub mod model;
pub mod moments;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ModelSpec = model::ModelSpec<f64>;
pub type ValidatedModel = model::ValidatedModel<f64>;
pub type CriticalPoint = landscape::CriticalPoint<f64>;
pub type MinimaSet = landscape::MinimaSet<f64>;
pub type LimitLaw = limits::LimitLaw<f64>;
pub type FiniteDist = exactdist::FiniteDist<f64>;
pub type MomentReport = moments::MomentReport<f64>;
pub type Matrix = linalg::Matrix<f64>;

pub type ModelSpecF32 = model::ModelSpec<f32>;
pub type ValidatedModelF32 = model::ValidatedModel<f32>;
pub type MinimaSetF32 = landscape::MinimaSet<f32>;
pub type LimitLawF32 = limits::LimitLaw<f32>;
