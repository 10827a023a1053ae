//! Exact quantum dynamics in Fock space.

mod cbs;
mod coherent;
mod dynamics;
mod krylov;
mod otoc;
mod series;
mod spectrum;

pub use cbs::{background_states, cbs_experiment, Background, CbsOptions, CbsPoint};
pub use coherent::{
    coherent_state, CoherentState, HamiltonianFamily, MultiSectorState, TruncationStatus,
    TRUNCATION_FAIL, TRUNCATION_WARN,
};
pub use dynamics::{
    autocorrelation, transition_probabilities, transition_probability, weighted_spectrum,
    Autocorrelation,
};
pub use krylov::{propagate, KrylovOptions, PropagationStats, Propagator};
pub use otoc::{otoc, SectorOperator};
pub use series::{check_grid, uniform_grid, TimeSeries};
pub use spectrum::{diagonalize, diagonalize_with_caps, DenseCaps, Spectrum};
