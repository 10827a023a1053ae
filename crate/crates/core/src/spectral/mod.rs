//! Random-matrix diagnostics: unfolding, spacing statistics and the
//! spectral form factor.

mod form_factor;
mod stats;
mod unfold;

pub use form_factor::{
    diagonal_ramp, form_factor, goe_form_factor, ramp_slope, SymmetryClass, MIN_REALIZATIONS,
};
pub use stats::{ks_test, poisson_spacing_cdf, wigner_surmise_cdf, KsResult};
pub use unfold::{unfold, UnfoldMethod, UnfoldedSpectrum, MIN_LEVELS};
