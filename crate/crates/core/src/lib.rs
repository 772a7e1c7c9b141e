//! Path simulation, stochastic integration and Monte Carlo small-ball
//! estimation for testing conditional full support of continuous processes.
//!
//! The path machinery ([`grid`], [`gaussian`], [`jumps`], [`integrate`]) is
//! generic over [`Scalar`] (`f32` or `f64`); the model zoo, estimators and
//! reports work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussian;
pub mod grid;
pub mod integrate;
pub mod jumps;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod smallball;
pub mod stats;
pub mod suite;

pub use error::{Error, Result};
pub use grid::{sup_deviation, Path, TimeGrid};
pub use rng::RngStream;
pub use scalar::{CompensatedSum, Scalar};
pub use stats::{wilson_interval, Classification, Estimate, ZeroReason};

pub type TimeGrid64 = TimeGrid<f64>;
pub type TimeGrid32 = TimeGrid<f32>;
pub type Path64 = Path<f64>;
pub type Path32 = Path<f32>;

/// Grid on `[t_start, t_end]` with `n_steps` uniform cells.
pub fn make_grid<T: Scalar>(t_start: T, t_end: T, n_steps: usize) -> Result<TimeGrid<T>> {
    TimeGrid::new(t_start, t_end, n_steps)
}
