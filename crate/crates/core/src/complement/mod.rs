//! Operator norms, minimal projections, the pushout construction and the
//! Hilbertian projection constants.

pub mod constants;
mod lp;
pub mod opnorm;
pub mod projection;
pub mod pushout;

pub use constants::{c2_formula, c2n_l1, parse_grid, scan_c2, C2Row, C2Table};
pub use opnorm::{interpolation_bound, op_norm, op_norm_with, OpNorm};
pub use projection::{
    duality_image_is_linear, is_one_complemented, min_projection_norm, ComplementationVerdict,
    ProjectionSearchResult, SearchConfig, SearchMethod,
};
pub use pushout::{pushout, screen_pushout, PushoutReport, PushoutScreen, QuotientSpace};
