//! The function `G`, the mean-field equations and the global minima of `G`.

pub mod functional;
pub mod minima;
pub mod solver;

pub use functional::{
    effective_fields, eval_g, eval_phi, eval_pressure_functional, grad_g, hess_g, hess_phi,
    mean_field_map, mean_field_residual, quadratic_part, taylor4_g, Taylor4,
};
pub use minima::{
    classify_minimum, find_global_minima, sphere_directions, CriticalPoint, HomogeneousType,
    MinimaSet, DEFAULT_GRID,
};
pub use solver::{solve_mean_field, solve_mean_field_with, SolverOptions};
