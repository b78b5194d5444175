//! Heat-trace coefficients and spectral zeta residues from finite partial
//! spectra.
//!
//! The central quantity is the regularized partial trace
//! `ε(Λ)^{s_k} Σ_{0<λ≤Λ} F(λ ε(Λ))` with `ε(Λ) = m ln Λ / Λ`, where `F` is
//! the Laplace transform of a filter whose moments vanish at the poles above
//! `s_k`. As `Λ → ∞` it converges to the heat coefficient
//! `c_k = res_{s=s_k} Γ(s) ζ(Δ, s)`.

// Negated float comparisons are deliberate: they send NaN down the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Series coefficients and reference values are kept at full printed precision.
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod estimator;
pub mod filters;
pub mod format;
pub mod linalg;
pub mod localized;
pub mod models;
pub mod quadrature;
pub mod special_functions;
pub mod summation;

pub use error::{Error, Result};
pub use estimator::{
    convergence_slope, dixmier_baseline, epsilon_schedule, estimate_coefficient, estimate_with_epsilon, sweep,
    to_zeta_residue, EstimateResult,
};
pub use filters::{basis_moment, build_filter, Filter, FilterRecord, PoleSet};
pub use localized::{
    circle_projection_weights, estimate_localized, load_weighted_spectrum, Parity, WeightedEntry, WeightedSpectrum,
};
pub use models::{
    circle_spectrum, load_spectrum, sphere_spectrum, torus2_spectrum, Model, OracleData, SpectralEntry, Spectrum,
};
pub use special_functions::{gamma, upper_gamma};
