//! Exact finite-N laws of the species sums, optionally conditioned on a
//! magnetization ball, and a Monte-Carlo cross-check.

pub mod compare;
pub mod glauber;
pub mod joint;

pub use compare::{
    compare_dist_to_law, compare_to_law, normalized_moments, normalizers, total_variation, Discrepancy,
};
pub use glauber::{glauber_sample, GlauberOptions};
pub use joint::{
    conditional_joint, exact_joint, grid_states, BallCondition, FiniteDist, FiniteDistSummary,
    ENUMERATION_BUDGET,
};
