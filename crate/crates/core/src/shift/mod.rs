//! Filippov shifts driven by the discontinuous velocity field, and the constants behind it.

pub mod filippov;
pub mod trajectory;
pub mod velocity;
pub mod weights;

pub use filippov::{adjacent_traces, advance_frozen, default_mollification, offset_traces, FrozenStep, FrozenVelocity};
pub use trajectory::{
    dissipation_lhs, indicator_case, integrate_filippov, rh_invariant, verify_dissipation, DissipationReport,
    DissipationSample, ShiftTrajectory,
};
pub use velocity::{indicator_margin, indicator_on, shift_velocity};
pub use weights::{
    build_weights, compute_c_star, fit_c1, fit_c4, lipschitz_l_star, C1Fit, C4Fit, ContractionWeights, DriftBound,
    WeightOptions,
};
