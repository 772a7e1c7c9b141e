//! The model zoo: each model simulates `Z` on a grid and continues it from a
//! restart node given the realized history of its drivers.

mod sim;
mod spec;
mod validate;

pub(crate) use sim::Continuation;
pub use sim::{
    bridge_reference, continue_conditional, simulate, Conditioning, ConditioningContext, Model, Realization,
};
pub use spec::{Integrand, ModelKind, ModelSpec, ModelTag, PathCoefficient, Profile, VolDriver};
pub use validate::{validate_spec, CheckStatus, SpecCheck, ValidationReport};
