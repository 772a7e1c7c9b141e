//! Exact-in-law Gaussian path generators.

mod bridge;
mod brownian;
mod fbm;
mod fou;

pub(crate) use bridge::bridge_into;
pub use bridge::gen_bridge_continuation;
pub use brownian::{brownian_from_normals, gen_brownian, gen_brownian_alt};
pub use fbm::{fbm_covariance, gen_fbm, FbmFactor, FbmSpec};
pub use fou::{fou_from_fbm, gen_fou, FouSpec};
