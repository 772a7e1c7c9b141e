use crate::error::{Error, Result};
use crate::gaussian::fbm::{FbmFactor, FbmSpec};
use crate::grid::{Path, TimeGrid};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Fractional Ornstein–Uhlenbeck process
/// `dV = −α V dt + σ dB^h`, `V(0) = v0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FouSpec {
    pub hurst: f64,
    pub mean_reversion: f64,
    pub vol: f64,
    pub initial: f64,
}

impl FouSpec {
    pub fn validate(&self) -> Result<()> {
        FbmSpec::new(self.hurst)?;
        if !(self.mean_reversion > 0.0) || !self.mean_reversion.is_finite() {
            return Err(Error::BadParams(format!("fOU mean reversion must be > 0, got {}", self.mean_reversion)));
        }
        if !(self.vol >= 0.0) || !self.vol.is_finite() {
            return Err(Error::BadParams(format!("fOU vol must be >= 0, got {}", self.vol)));
        }
        if !self.initial.is_finite() {
            return Err(Error::BadParams("fOU initial value must be finite".into()));
        }
        Ok(())
    }

    pub fn fbm(&self) -> FbmSpec {
        FbmSpec { hurst: self.hurst }
    }
}

/// Maps an fBm path to the fOU path it drives, pathwise:
///
/// `∫₀ᵗ e^{−α(t−s)} dB(s) = B(t) − α ∫₀ᵗ e^{−α(t−s)} B(s) ds`,
///
/// with the Riemann integral accumulated by the trapezoidal rule in the
/// discounted form `J_j = e^{−αΔ} J_{j−1} + Δ/2 (e^{−αΔ} B_{j−1} + B_j)`.
pub fn fou_from_fbm<T: Scalar>(spec: &FouSpec, fbm: &Path<T>) -> Result<Path<T>> {
    spec.validate()?;
    let grid = *fbm.grid();
    let alpha = T::lit(spec.mean_reversion);
    let sigma = T::lit(spec.vol);
    let v0 = T::lit(spec.initial);
    let dt = grid.dt();
    let decay = (-alpha * dt).exp();
    let half_dt = T::lit(0.5) * dt;
    let b = fbm.values();
    let mut values = Vec::with_capacity(grid.len());
    let mut j = T::zero();
    values.push(v0 * (-alpha * (grid.node(0) - grid.t_start())).exp() + sigma * b[0]);
    for i in 1..grid.len() {
        j = decay * j + half_dt * (decay * b[i - 1] + b[i]);
        let t = grid.node(i) - grid.t_start();
        values.push(v0 * (-alpha * t).exp() + sigma * (b[i] - alpha * j));
    }
    Path::new(grid, values)
}

/// fOU path on a grid starting at 0.
pub fn gen_fou<T: Scalar>(grid: &TimeGrid<T>, spec: FouSpec, rng: &mut RngStream) -> Result<Path<T>> {
    spec.validate()?;
    let factor = FbmFactor::new(grid, spec.fbm())?;
    fou_from_fbm(&spec, &factor.sample(rng))
}
