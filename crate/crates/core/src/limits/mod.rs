//! Limit laws of the normalized sums at a classified minimum.

pub mod chi;
pub mod law;
pub mod quadrature;

pub use chi::{chi_via_hessian, response_jacobian, susceptibility_chi, susceptibility_chi_on};
pub use law::{build_limit_law, law_moments, rescaled_quartic, LawBlock, LawKind, LimitLaw};
