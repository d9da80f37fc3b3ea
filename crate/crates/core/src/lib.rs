//! Pseudo-spectral simulation of the dissipative quasi-geostrophic equation
//!
//! ```text
//! θ_t + u·∇θ + κ(−Δ)^{γ/2}θ = 0,   u = (−R₂θ, R₁θ)
//! ```
//!
//! on a periodic square, together with the regularity diagnostics used to
//! check its qualitative behaviour: a concave modulus of continuity and a
//! runtime monitor for it, Sobolev norm series, and decay-exponent fits.
//!
//! Inner loops (FFT rows, pointwise products, modulus offsets, oracle cases)
//! run on rayon when the default `parallel` feature is enabled and fall back
//! to sequential loops otherwise; both paths give the same results.

// Negated float comparisons are used on purpose so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod initial;
pub mod modulus;
pub mod norms;
pub mod oracles;
pub mod par;
pub mod random;
pub mod spectral;

pub use decay::{check_boundedness, fit_decay_exponent, Boundedness, DecayFit, SingularEnd};
pub use dynamics::{adapt_dt, nonlinear_term, run_until, step, Cadence, SolverConfig, SolverState};
pub use error::{Result, SqgError};
pub use field::{forward_transform, inverse_transform, RealField, SpectralField, VelocityField};
pub use grid::Grid;
pub use initial::{make_initial, InitialCondition, Preset};
pub use modulus::{
    build_knv_modulus, check_modulus, find_scaling, gradient_bound_check, BreachReport,
    GradientBound, LatticeOffset, ModulusOfContinuity,
};
pub use norms::{record_norms, NormColumn, NormRow, NormSeries};
pub use oracles::OracleReport;
pub use spectral::{
    dealias, fractional_laplacian, gradient_sup, l2_norm, linf_norm, riesz_velocity, sobolev_norm,
};
