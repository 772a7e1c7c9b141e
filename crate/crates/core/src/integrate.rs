//! Discrete stochastic and pathwise integration on a grid.

use crate::error::Result;
use crate::grid::{ensure_same_grid, Path, TimeGrid};
use crate::scalar::{CompensatedSum, Scalar};

/// Left-point Itô sums `I(t_j) = Σ_{i<j} k(t_i)(w(t_{i+1}) − w(t_i))`.
pub fn ito_integral<T: Scalar>(k: &Path<T>, w: &Path<T>) -> Result<Path<T>> {
    ensure_same_grid(k.grid(), w.grid())?;
    Path::new(*k.grid(), left_point_sums(k.values(), w.values()))
}

/// Pathwise Riemann–Stieltjes integral `∫ k dx` of a finite-variation
/// integrand. On a grid this is the left-point sum, which equals the
/// summation-by-parts form `k(t_j)x(t_j) − k(t_0)x(t_0) − Σ_{i<j} x(t_{i+1})Δk_i`
/// term for term.
pub fn rs_integral<T: Scalar>(k: &Path<T>, x: &Path<T>) -> Result<Path<T>> {
    ensure_same_grid(k.grid(), x.grid())?;
    Path::new(*k.grid(), left_point_sums(k.values(), x.values()))
}

fn left_point_sums<T: Scalar>(k: &[T], x: &[T]) -> Vec<T> {
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(x.len());
    out.push(T::zero());
    for i in 0..x.len() - 1 {
        acc.add(k[i] * (x[i + 1] - x[i]));
        out.push(acc.value());
    }
    out
}

/// Discrete total variation `Σ |k(t_{i+1}) − k(t_i)|`.
pub fn total_variation<T: Scalar>(k: &Path<T>) -> T {
    let mut acc = CompensatedSum::new();
    for w in k.values().windows(2) {
        acc.add((w[1] - w[0]).abs());
    }
    acc.value()
}

/// Quadratic-variation clock `g(t_j) = Σ_{i<j} k(t_i)²Δ` of a Wiener integral.
#[derive(Debug, Clone, PartialEq)]
pub struct QvClock<T> {
    grid: TimeGrid<T>,
    g: Vec<T>,
}

impl<T: Scalar> QvClock<T> {
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.g
    }

    /// `K = g(T)`.
    pub fn total(&self) -> T {
        self.g[self.g.len() - 1]
    }

    /// `g⁻¹(u)` by linear interpolation of the discrete clock. On a plateau
    /// (a cell where `k = 0`) the earliest time with `g = u` is returned.
    pub fn inverse(&self, u: T) -> T {
        let g = &self.g;
        if u <= T::zero() {
            return self.grid.t_start();
        }
        let j = g.partition_point(|&v| v < u);
        if j >= g.len() {
            return self.grid.t_end();
        }
        let (t0, t1) = (self.grid.node(j - 1), self.grid.node(j));
        let (g0, g1) = (g[j - 1], g[j]);
        let frac = ((u - g0) / (g1 - g0)).min(T::one());
        t0 + (t1 - t0) * frac
    }
}

/// Clock of `∫ k dW` on the grid of `k`. Accumulated with plain running sums of
/// non-negative terms, so `g` is nondecreasing in floating point.
pub fn qv_clock<T: Scalar>(k: &Path<T>) -> QvClock<T> {
    let dt = k.grid().dt();
    let v = k.values();
    let mut g = Vec::with_capacity(v.len());
    let mut acc = T::zero();
    g.push(acc);
    for &ki in &v[..v.len() - 1] {
        acc += ki * ki * dt;
        g.push(acc);
    }
    QvClock { grid: *k.grid(), g }
}

/// Doléans exponential `exp(w(t) − w(t_0) − (t − t_0)/2)`. Underflow is clamped
/// to the smallest positive normal so every node stays strictly positive.
pub fn doleans_exp<T: Scalar>(w: &Path<T>) -> Result<Path<T>> {
    let grid = *w.grid();
    let w0 = w.first();
    let t0 = grid.t_start();
    let half = T::lit(0.5);
    let values = w
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - w0 - half * (grid.node(i) - t0)).exp().max(T::min_positive_value()))
        .collect();
    Path::new(grid, values)
}

/// Per-path diagnostics for the uniform quadratic-variation bound and the
/// integrands whose exponential moments the Girsanov argument needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgCfsReport {
    /// `∫ k² ds`.
    pub int_k2: f64,
    /// `∫ k⁻² ds`.
    pub int_inv_k2: f64,
    /// `∫ k⁻² h² ds`.
    pub int_h2_over_k2: f64,
    /// `∫ k² ds ≤ K̄`.
    pub qv_bounded: bool,
    /// `k` nonvanishing at every node and all three integrals finite.
    pub integrands_finite: bool,
}

impl ProgCfsReport {
    pub fn passed(&self) -> bool {
        self.qv_bounded && self.integrands_finite
    }
}

/// Left-point Riemann sums of `k²`, `k⁻²` and `k⁻²h²`, checked against `k_bar`
/// with an 8-ulp allowance for rounding in the sum. Never fails: bad input is
/// reported through the flags.
pub fn check_progcfs_conditions<T: Scalar>(k: &Path<T>, h: &Path<T>, k_bar: f64) -> ProgCfsReport {
    let dt = k.grid().dt().as_f64();
    let vanishes = k.values().iter().any(|&x| x == T::zero());
    let (mut k2, mut inv, mut ratio) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    let n = k.grid().n_steps();
    let aligned = ensure_same_grid(k.grid(), h.grid()).is_ok();
    for i in 0..n {
        let ki = k.value(i).as_f64();
        let k2i = ki * ki;
        k2.add(k2i * dt);
        inv.add(dt / k2i);
        let hi = if aligned { h.value(i).as_f64() } else { f64::NAN };
        ratio.add(hi * hi / k2i * dt);
    }
    let (int_k2, int_inv_k2, int_h2_over_k2) = (k2.value(), inv.value(), ratio.value());
    let integrands_finite = !vanishes && int_inv_k2.is_finite() && int_h2_over_k2.is_finite() && int_k2.is_finite();
    ProgCfsReport {
        int_k2,
        int_inv_k2,
        int_h2_over_k2,
        qv_bounded: int_k2 <= k_bar * (1.0 + 8.0 * f64::EPSILON),
        integrands_finite,
    }
}
