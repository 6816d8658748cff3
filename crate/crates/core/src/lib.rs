//! Positive harmonic functions on planes slit along the negative real axis
//! (Kjellberg's class K), their Riesz measures, the entire functions obtained
//! by discretizing those measures, and numerical checks of their growth.

pub mod entire;
pub mod error;
pub mod growth;
pub mod hyperbolic;
pub mod intervals;
mod legendre;
pub mod measure;
pub mod numeric;
pub mod potential;
pub mod wos;

pub use entire::{
    approx_error, approx_error_with, discretize, positivity_set, ApproxErrorReport, EntireProduct,
    PositivitySet, ZeroSequence,
};
pub use error::{Error, Result};
pub use growth::{
    bracket, check_annulus_harnack, check_barry, check_beurling, check_min_type, order_fit, profile,
    CheckRecord, GrowthReport, OrderFit,
};
pub use hyperbolic::{beta_d, density_upper, e_prime, harnack_check, rho_upper, BoundGeometry, BoundProfile};
pub use intervals::{
    build_corollary, build_example_sodin, build_kjellberg, build_thick, dist_to_e, in_d1,
    log_densities, log_integral, window_fraction, DensityEstimate, Family, Interval, IntervalSet,
};
pub use measure::{MeasurePiece, RieszMeasure};
pub use potential::{
    oracle_green_segment, oracle_halfline, solve, HarmonicApprox, SolveDiagnostics,
    SolveOptions,
};
pub use wos::{verify_example_decay, wos_measure, WosConfig, WosEstimate};
