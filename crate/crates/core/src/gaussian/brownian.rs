use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Brownian motion started at 0 by summing independent `N(0, Δ)` increments.
pub fn gen_brownian<T: Scalar>(grid: &TimeGrid<T>, rng: &mut RngStream) -> Path<T> {
    let sd = grid.dt().sqrt();
    let mut values = Vec::with_capacity(grid.len());
    let mut w = T::zero();
    values.push(w);
    for _ in 0..grid.n_steps() {
        w += sd * T::lit(rng.normal());
        values.push(w);
    }
    Path::new(*grid, values).expect("finite Gaussian increments")
}

/// Brownian motion from a caller-supplied vector of standard normals.
pub fn brownian_from_normals<T: Scalar>(grid: &TimeGrid<T>, normals: &[T]) -> Result<Path<T>> {
    if normals.len() != grid.n_steps() {
        return Err(Error::LengthMismatch { expected: grid.n_steps(), found: normals.len() });
    }
    let sd = grid.dt().sqrt();
    let mut values = Vec::with_capacity(grid.len());
    let mut w = T::zero();
    values.push(w);
    for &z in normals {
        w += sd * z;
        values.push(w);
    }
    Path::new(*grid, values)
}

/// Brownian motion by Lévy midpoint refinement: draw the endpoint, then fill
/// dyadic midpoints from their conditional (bridge) laws. Same law as
/// [`gen_brownian`], different algorithm.
pub fn gen_brownian_alt<T: Scalar>(grid: &TimeGrid<T>, rng: &mut RngStream) -> Result<Path<T>> {
    let n = grid.n_steps();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let dt = grid.dt();
    let half = T::lit(0.5);
    let mut values = vec![T::zero(); n + 1];
    values[n] = grid.span().sqrt() * T::lit(rng.normal());
    let mut width = n;
    while width > 1 {
        let mid = width / 2;
        // midpoint variance given both ends: (mid·Δ)(mid·Δ)/(width·Δ)
        let sd = (T::from_usize_exact(mid) * dt * half).sqrt();
        for left in (0..n).step_by(width) {
            let right = left + width;
            values[left + mid] = half * (values[left] + values[right]) + sd * T::lit(rng.normal());
        }
        width = mid;
    }
    Path::new(*grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_two_sample, mean_var};

    #[test]
    fn starts_at_zero_and_repeats() {
        let g = TimeGrid::new(0.0, 1.0, 64).unwrap();
        let a = gen_brownian(&g, &mut RngStream::new(1, 2));
        let b = gen_brownian(&g, &mut RngStream::new(1, 2));
        assert_eq!(a.first(), 0.0);
        assert_eq!(a, b);
        let alt = gen_brownian_alt(&g, &mut RngStream::new(1, 2)).unwrap();
        assert_eq!(alt.first(), 0.0);
    }

    #[test]
    fn terminal_variance_is_t() {
        // Var W_1 = 1; 10^5 reps, 4 standard errors of a variance ≈ 4·sqrt(2/n)
        let g = TimeGrid::new(0.0, 1.0, 16).unwrap();
        let base = RngStream::new(42, 0);
        let xs: Vec<f64> = (0..100_000).map(|r| gen_brownian(&g, &mut base.replication(r)).last()).collect();
        let (_, var) = mean_var(&xs);
        assert!((var - 1.0).abs() < 0.02, "var = {var}");
    }

    #[test]
    fn alt_covariance_is_min() {
        let g = TimeGrid::new(0.0, 1.0, 8).unwrap();
        let base = RngStream::new(43, 0);
        let n = 100_000;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for r in 0..n {
            let p = gen_brownian_alt(&g, &mut base.replication(r)).unwrap();
            sxy += p.value(2) * p.value(6);
            sxx += p.value(2) * p.value(2);
        }
        let cov = sxy / n as f64;
        let var = sxx / n as f64;
        // Cov(W_.25, W_.75) = 0.25, sd of the product estimator ≈ sqrt(0.25·0.75 + 0.25²)/sqrt(n)
        let se = (0.25f64 * 0.75 + 0.0625).sqrt() / (n as f64).sqrt();
        assert!((cov - 0.25).abs() < 4.0 * se, "cov = {cov}");
        assert!((var - 0.25).abs() < 4.0 * 0.25 * (2.0 / n as f64).sqrt(), "var = {var}");
    }

    #[test]
    fn alt_rejects_non_dyadic() {
        let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
        assert_eq!(gen_brownian_alt(&g, &mut RngStream::new(0, 0)), Err(Error::NotPowerOfTwo(3)));
    }

    #[test]
    fn constructions_agree_in_law() {
        let g = TimeGrid::new(0.0, 1.0, 32).unwrap();
        let a = RngStream::new(100, 0);
        let b = RngStream::new(101, 0);
        let n = 10_000;
        let inc: Vec<Path<f64>> = (0..n).map(|r| gen_brownian(&g, &mut a.replication(r))).collect();
        let alt: Vec<Path<f64>> = (0..n).map(|r| gen_brownian_alt(&g, &mut b.replication(r)).unwrap()).collect();
        for node in [16, 32] {
            let xs: Vec<f64> = inc.iter().map(|p| p.value(node)).collect();
            let ys: Vec<f64> = alt.iter().map(|p| p.value(node)).collect();
            let (_, pval) = ks_two_sample(&xs, &ys);
            assert!(pval > 0.01, "node {node}: p = {pval}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let g = TimeGrid::new(0.0f32, 2.0, 8).unwrap();
        let p = gen_brownian(&g, &mut RngStream::new(3, 3));
        assert_eq!(p.values().len(), 9);
    }
}
