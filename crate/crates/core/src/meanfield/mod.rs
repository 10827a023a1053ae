//! The classical mean-field limit: discrete Gross-Pitaevskii flow, tangent
//! dynamics, Lyapunov exponents, relative equilibria and actions.

mod field;
mod flow;
mod integrate;
mod stability;

pub use field::{classical_hamiltonian, gradient, gradient_variation, number, velocity, ClassicalField};
pub use flow::{action_integral, gpe_flow, tangent_flow, FlowOptions, Integrator, Trajectory};
pub use stability::{
    find_fixed_point, lyapunov, stability_exponents, FixedPoint, LyapunovEstimate, LyapunovOptions,
    NewtonOptions,
};

pub(crate) use flow::augmented_rhs;
pub(crate) use integrate::{advance, Gauss6};
