//! Fock-space random wave model: windowed eigenstate covariances, their
//! semiclassical Bessel-product form, classical level densities and
//! Gaussian-ensemble averages.

mod bessel;
mod covariance;
mod dos;
mod gaussian;
mod semiclassical;
mod window;

pub use bessel::{bessel_j_orders, signed_order};
pub use covariance::{
    exact_covariance, normalized_correlator, occupation_ball, pearson, CovarianceMatrix,
    NormalizedCorrelator, Provenance, MIN_WINDOW_STATES,
};
pub use dos::{classical_dos, shell_energy, DosEstimate, ShellSymbol};
pub use gaussian::{gaussian_average, sample_gaussian_average, Monomial, SampledAverage};
pub use semiclassical::{
    semiclassical_covariance, semiclassical_matrix, SemiclassicalModel, SemiclassicalOptions,
};
pub use window::GaussianWindow;
