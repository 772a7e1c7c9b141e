use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};
use crate::jumps::subordinator::{gamma_draw, SubordinatorSpec};
use crate::rng::RngStream;
use crate::scalar::Scalar;

const GAMMA_WINDOW_CELLS: usize = 4096;

/// Stationary OU process driven by a subordinator run at speed `decay`:
/// `V(t) = ∫_{−∞}^t e^{−λ(t−s)} dL(λs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnsSpec {
    pub subordinator: SubordinatorSpec,
    pub decay: f64,
    /// Truncation of the stationary integral to `[−window, 0]`; `None` means `20/λ`.
    pub window: Option<f64>,
}

impl BnsSpec {
    pub fn validate(&self) -> Result<()> {
        self.subordinator.validate()?;
        if !(self.decay > 0.0) || !self.decay.is_finite() {
            return Err(Error::BadParams(format!("BNS decay must be > 0, got {}", self.decay)));
        }
        if let Some(m) = self.window {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::BadParams(format!("BNS window must be > 0, got {m}")));
            }
        }
        Ok(())
    }

    pub fn window(&self) -> f64 {
        self.window.unwrap_or(20.0 / self.decay)
    }

    /// Stationary mean `E V = E L(1)`.
    pub fn stationary_mean(&self) -> f64 {
        self.subordinator.mean_per_unit_time()
    }

    /// `V(0) = ∫_{−M}^0 e^{λs} dL(λs)`.
    pub fn stationary_start(&self, rng: &mut RngStream) -> f64 {
        let lambda = self.decay;
        let window = self.window();
        match self.subordinator.time_scaled(lambda) {
            SubordinatorSpec::CompoundPoissonExp { jump_rate, size_rate } => {
                if jump_rate == 0.0 {
                    return 0.0;
                }
                // arrivals walking backwards from 0
                let mut v = 0.0;
                let mut age = rng.exponential(jump_rate);
                while age <= window {
                    v += (-lambda * age).exp() * rng.exponential(size_rate);
                    age += rng.exponential(jump_rate);
                }
                v
            }
            SubordinatorSpec::Gamma { shape_rate, rate } => {
                let d = window / GAMMA_WINDOW_CELLS as f64;
                (0..GAMMA_WINDOW_CELLS)
                    .map(|c| (-lambda * (c as f64 + 0.5) * d).exp() * gamma_draw(shape_rate * d, rate, rng))
                    .sum()
            }
        }
    }
}

/// Evolves `V` forward from `start` at `grid.t_start()`:
/// `V(t) = e^{−λ(t − t₀)} start + Σ_{jumps τ ≤ t} e^{−λ(t−τ)} J`.
///
/// Compound Poisson jumps are placed at their arrival times. Gamma increments
/// are per cell, discounted from the cell midpoint. The decay term is computed
/// in closed form so that `V(t) ≥ e^{−λ(T − t₀)} start` holds exactly.
pub fn bns_forward<T: Scalar>(grid: &TimeGrid<T>, spec: &BnsSpec, start: f64, rng: &mut RngStream) -> Result<Path<T>> {
    spec.validate()?;
    let lambda = spec.decay;
    let t0 = grid.t_start().as_f64();
    let dt = grid.dt().as_f64();
    let cell_decay = (-lambda * dt).exp();
    let mut values = Vec::with_capacity(grid.len());
    values.push(T::lit(start));
    let mut jumps = 0.0;
    match spec.subordinator.time_scaled(lambda) {
        SubordinatorSpec::CompoundPoissonExp { jump_rate, size_rate } => {
            let mut next = if jump_rate > 0.0 { t0 + rng.exponential(jump_rate) } else { f64::INFINITY };
            for i in 1..grid.len() {
                let t = grid.node(i).as_f64();
                jumps *= cell_decay;
                while next <= t {
                    jumps += (-lambda * (t - next)).exp() * rng.exponential(size_rate);
                    next += rng.exponential(jump_rate);
                }
                values.push(T::lit((-lambda * (t - t0)).exp() * start + jumps));
            }
        }
        SubordinatorSpec::Gamma { shape_rate, rate } => {
            let mid_decay = (-lambda * 0.5 * dt).exp();
            for i in 1..grid.len() {
                let t = grid.node(i).as_f64();
                jumps = cell_decay * jumps + mid_decay * gamma_draw(shape_rate * dt, rate, rng);
                values.push(T::lit((-lambda * (t - t0)).exp() * start + jumps));
            }
        }
    }
    Path::new(*grid, values)
}

/// BNS variance path on a grid starting at 0, started from the (truncated)
/// stationary law.
pub fn gen_bns_vol<T: Scalar>(grid: &TimeGrid<T>, spec: &BnsSpec, rng: &mut RngStream) -> Result<Path<T>> {
    spec.validate()?;
    if grid.t_start() != T::zero() {
        return Err(Error::GridNotAtOrigin(grid.t_start().as_f64()));
    }
    let start = spec.stationary_start(rng);
    bns_forward(grid, spec, start, rng)
}
