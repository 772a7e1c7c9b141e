//! Subordinator-driven and Markov-chain volatility generators.

mod bns;
mod ctmc;
mod subordinator;

pub use bns::{bns_forward, gen_bns_vol, BnsSpec};
pub use ctmc::{gen_ctmc_vol, CtmcSpec};
pub use subordinator::{gen_subordinator, SubordinatorSpec};
