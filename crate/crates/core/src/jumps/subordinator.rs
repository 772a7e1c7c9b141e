use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Driftless nondecreasing Lévy process with `L(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubordinatorSpec {
    /// Poisson arrivals at `jump_rate` per unit time, jump sizes `Exp(size_rate)`
    /// (mean `1/size_rate`).
    CompoundPoissonExp { jump_rate: f64, size_rate: f64 },
    /// Gamma process: `L(t) ~ Gamma(shape_rate·t, rate)`.
    Gamma { shape_rate: f64, rate: f64 },
}

impl SubordinatorSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SubordinatorSpec::CompoundPoissonExp { jump_rate, size_rate } => {
                jump_rate >= 0.0 && jump_rate.is_finite() && size_rate > 0.0 && size_rate.is_finite()
            }
            SubordinatorSpec::Gamma { shape_rate, rate } => {
                shape_rate > 0.0 && shape_rate.is_finite() && rate > 0.0 && rate.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadParams(format!("subordinator parameters must be positive: {self:?}")))
        }
    }

    /// `E L(1)`.
    pub fn mean_per_unit_time(&self) -> f64 {
        match *self {
            SubordinatorSpec::CompoundPoissonExp { jump_rate, size_rate } => jump_rate / size_rate,
            SubordinatorSpec::Gamma { shape_rate, rate } => shape_rate / rate,
        }
    }

    /// `P[L(1) = 0] < 1`, i.e. the process is not identically zero.
    pub fn is_nondegenerate(&self) -> bool {
        match *self {
            SubordinatorSpec::CompoundPoissonExp { jump_rate, .. } => jump_rate > 0.0,
            SubordinatorSpec::Gamma { .. } => true,
        }
    }

    /// Same process run at clock speed `speed`: `t ↦ L(speed·t)`.
    pub fn time_scaled(&self, speed: f64) -> Self {
        match *self {
            SubordinatorSpec::CompoundPoissonExp { jump_rate, size_rate } => {
                SubordinatorSpec::CompoundPoissonExp { jump_rate: jump_rate * speed, size_rate }
            }
            SubordinatorSpec::Gamma { shape_rate, rate } => {
                SubordinatorSpec::Gamma { shape_rate: shape_rate * speed, rate }
            }
        }
    }
}

pub(crate) fn gamma_draw(shape: f64, rate: f64, rng: &mut RngStream) -> f64 {
    if shape <= 0.0 {
        return 0.0;
    }
    Gamma::new(shape, 1.0 / rate).expect("validated gamma parameters").sample(rng)
}

/// Subordinator path read at the grid nodes. Compound Poisson jumps are placed
/// at their exact arrival times; Gamma increments are exact per cell.
pub fn gen_subordinator<T: Scalar>(grid: &TimeGrid<T>, spec: SubordinatorSpec, rng: &mut RngStream) -> Result<Path<T>> {
    spec.validate()?;
    let mut values = Vec::with_capacity(grid.len());
    values.push(T::zero());
    match spec {
        SubordinatorSpec::CompoundPoissonExp { jump_rate, size_rate } => {
            let t0 = grid.t_start().as_f64();
            let mut next = if jump_rate > 0.0 { t0 + rng.exponential(jump_rate) } else { f64::INFINITY };
            let mut level = 0.0;
            for i in 1..grid.len() {
                let t = grid.node(i).as_f64();
                while next <= t {
                    level += rng.exponential(size_rate);
                    next += rng.exponential(jump_rate);
                }
                values.push(T::lit(level));
            }
        }
        SubordinatorSpec::Gamma { shape_rate, rate } => {
            let dt = grid.dt().as_f64();
            let mut level = 0.0;
            for _ in 0..grid.n_steps() {
                level += gamma_draw(shape_rate * dt, rate, rng);
                values.push(T::lit(level));
            }
        }
    }
    Path::new(*grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_var;

    #[test]
    fn no_jumps_means_zero_path() {
        let g = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let spec = SubordinatorSpec::CompoundPoissonExp { jump_rate: 0.0, size_rate: 1.0 };
        let p: Path<f64> = gen_subordinator(&g, spec, &mut RngStream::new(0, 0)).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn compound_poisson_mean() {
        // E L(1) = η/θ = 3/2
        let g = TimeGrid::new(0.0, 1.0, 8).unwrap();
        let spec = SubordinatorSpec::CompoundPoissonExp { jump_rate: 3.0, size_rate: 2.0 };
        let base = RngStream::new(3, 0);
        let n = 100_000;
        let xs: Vec<f64> =
            (0..n).map(|r| gen_subordinator(&g, spec, &mut base.replication(r)).unwrap().last()).collect();
        let (mean, var) = mean_var(&xs);
        assert!((mean - 1.5).abs() < 4.0 * (var / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn gamma_mean() {
        let g = TimeGrid::new(0.0, 2.0, 16).unwrap();
        let spec = SubordinatorSpec::Gamma { shape_rate: 1.5, rate: 3.0 };
        let base = RngStream::new(4, 0);
        let n = 50_000;
        let xs: Vec<f64> =
            (0..n).map(|r| gen_subordinator(&g, spec, &mut base.replication(r)).unwrap().last()).collect();
        let (mean, var) = mean_var(&xs);
        assert!((mean - 1.0).abs() < 4.0 * (var / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let bad = SubordinatorSpec::CompoundPoissonExp { jump_rate: 1.0, size_rate: 0.0 };
        assert!(matches!(gen_subordinator::<f64>(&g, bad, &mut RngStream::new(0, 0)), Err(Error::BadParams(_))));
        let bad = SubordinatorSpec::Gamma { shape_rate: -1.0, rate: 1.0 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn paths_are_nondecreasing() {
        let g = TimeGrid::new(0.0, 1.0, 64).unwrap();
        for spec in [
            SubordinatorSpec::CompoundPoissonExp { jump_rate: 5.0, size_rate: 1.0 },
            SubordinatorSpec::Gamma { shape_rate: 2.0, rate: 1.0 },
        ] {
            for seed in 0..200 {
                let p: Path<f64> = gen_subordinator(&g, spec, &mut RngStream::new(seed, 1)).unwrap();
                assert_eq!(p.first(), 0.0);
                assert!(p.values().windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
