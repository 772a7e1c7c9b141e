//! Uniform time grids and sample paths living on them.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniform discretization of `[t_start, t_end]` into `n_steps` cells.
///
/// Node `i` sits at `t_start + i·Δ` with `Δ = (t_end − t_start)/n_steps`; the
/// last node is `t_end` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t_start: T,
    t_end: T,
    n_steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(t_start: T, t_end: T, n_steps: usize) -> Result<Self> {
        if !t_start.is_finite() || t_start < T::zero() {
            return Err(Error::NegativeStart(t_start.as_f64()));
        }
        if !(t_end > t_start) || !t_end.is_finite() {
            return Err(Error::NonPositiveSpan { t_start: t_start.as_f64(), t_end: t_end.as_f64() });
        }
        if n_steps == 0 {
            return Err(Error::ZeroSteps);
        }
        Ok(Self { t_start, t_end, n_steps })
    }

    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> T {
        self.t_end - self.t_start
    }

    pub fn dt(&self) -> T {
        self.span() / T::from_usize_exact(self.n_steps)
    }

    pub fn node(&self, i: usize) -> T {
        assert!(i <= self.n_steps, "node {i} outside grid of {} steps", self.n_steps);
        if i == self.n_steps {
            self.t_end
        } else {
            self.t_start + self.dt() * T::from_usize_exact(i)
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// The grid restricted to `[node(index), t_end]`, sharing the nodes of `self`.
    pub fn tail(&self, index: usize) -> Result<Self> {
        if index >= self.n_steps {
            return Err(Error::ZeroSteps);
        }
        Ok(Self { t_start: self.node(index), t_end: self.t_end, n_steps: self.n_steps - index })
    }

    /// The grid restricted to `[t_start, node(index)]`.
    pub fn head(&self, index: usize) -> Result<Self> {
        if index == 0 || index > self.n_steps {
            return Err(Error::ZeroSteps);
        }
        Ok(Self { t_start: self.t_start, t_end: self.node(index), n_steps: index })
    }

    /// Index of the node closest to `t_start + fraction·span`.
    pub fn index_of_fraction(&self, fraction: f64) -> usize {
        let raw = (fraction * self.n_steps as f64).round();
        raw.clamp(0.0, self.n_steps as f64) as usize
    }
}

/// A real-valued sample path on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    grid: TimeGrid<T>,
    values: Vec<T>,
}

impl<T: Scalar> Path<T> {
    pub fn new(grid: TimeGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), found: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    /// Builds a path by evaluating `f` at every node.
    pub fn from_fn(grid: TimeGrid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: TimeGrid<T>, value: T) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn first(&self) -> T {
        self.values[0]
    }

    pub fn last(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn value(&self, i: usize) -> T {
        self.values[i]
    }

    /// Restriction to `[node(index), t_end]`.
    pub fn tail(&self, index: usize) -> Result<Self> {
        let grid = self.grid.tail(index)?;
        Ok(Self { grid, values: self.values[index..].to_vec() })
    }

    /// Restriction to `[t_start, node(index)]`.
    pub fn head(&self, index: usize) -> Result<Self> {
        let grid = self.grid.head(index)?;
        Ok(Self { grid, values: self.values[..=index].to_vec() })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Node-wise combination of two paths on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.grid, values)
    }

    pub fn ensure_grid(&self, grid: &TimeGrid<T>) -> Result<()> {
        ensure_same_grid(&self.grid, grid)
    }
}

pub(crate) fn ensure_same_grid<T: Scalar>(a: &TimeGrid<T>, b: &TimeGrid<T>) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `max_i |x(t_i) − offset − f(t_i)|` over the shared grid.
pub fn sup_deviation<T: Scalar>(x: &Path<T>, f: &Path<T>, offset: T) -> Result<T> {
    ensure_same_grid(&x.grid, &f.grid)?;
    Ok(sup_deviation_slices(&x.values, &f.values, offset))
}

#[inline]
pub(crate) fn sup_deviation_slices<T: Scalar>(x: &[T], f: &[T], offset: T) -> T {
    x.iter().zip(f).map(|(&xv, &fv)| (xv - offset - fv).abs()).fold(T::zero(), |acc, d| if d > acc { d } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_step_unit_grid() {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.dt(), 0.25);
    }

    #[test]
    fn minimal_grid() {
        let g = TimeGrid::new(0.0, 1.0, 1).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_reversed_span_and_zero_steps() {
        assert!(matches!(TimeGrid::new(0.5, 0.25, 4), Err(Error::NonPositiveSpan { .. })));
        assert!(matches!(TimeGrid::new(0.0, 0.0, 4), Err(Error::NonPositiveSpan { .. })));
        assert_eq!(TimeGrid::new(0.0, 1.0, 0), Err(Error::ZeroSteps));
        assert!(matches!(TimeGrid::new(-1.0, 1.0, 2), Err(Error::NegativeStart(_))));
    }

    #[test]
    fn tail_shares_nodes() {
        let g = TimeGrid::new(0.0, 2.0, 8).unwrap();
        let t = g.tail(3).unwrap();
        assert_eq!(t.n_steps(), 5);
        assert_eq!(t.node(0), g.node(3));
        assert_eq!(t.t_end(), 2.0);
        assert_eq!(g.head(3).unwrap().t_end(), t.t_start());
        assert!(g.tail(8).is_err());
    }

    #[test]
    fn path_validation() {
        let g = TimeGrid::new(0.0, 1.0, 2).unwrap();
        assert!(matches!(Path::new(g, vec![0.0, 1.0]), Err(Error::LengthMismatch { .. })));
        assert_eq!(Path::new(g, vec![0.0, f64::NAN, 1.0]), Err(Error::NonFinite { index: 1 }));
    }

    #[test]
    fn sup_deviation_examples() {
        let g = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let f = Path::new(g, vec![0.0, 0.5, -0.25]).unwrap();
        let shifted = f.map(|v| v + 1.5).unwrap();
        assert_eq!(sup_deviation(&shifted, &f, 1.5).unwrap(), 0.0);

        let zero = Path::constant(g, 0.0).unwrap();
        assert_eq!(sup_deviation(&zero, &zero, 0.3).unwrap(), 0.3);

        let peak = Path::new(g, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(sup_deviation(&peak, &zero, 0.0).unwrap(), 1.0);

        let other = Path::constant(TimeGrid::new(0.0, 2.0, 2).unwrap(), 0.0).unwrap();
        assert_eq!(sup_deviation(&peak, &other, 0.0), Err(Error::GridMismatch));
    }

    proptest! {
        #[test]
        fn sup_deviation_triangle_inequality(
            xs in proptest::collection::vec(-10.0f64..10.0, 9),
            ys in proptest::collection::vec(-10.0f64..10.0, 9),
            fs in proptest::collection::vec(-10.0f64..10.0, 9),
            offset in -5.0f64..5.0,
        ) {
            let g = TimeGrid::new(0.0, 1.0, 8).unwrap();
            let x = Path::new(g, xs).unwrap();
            let y = Path::new(g, ys).unwrap();
            let f = Path::new(g, fs).unwrap();
            let sum = x.zip_with(&y, |a, b| a + b).unwrap();
            let zero = Path::constant(g, 0.0).unwrap();
            let lhs = sup_deviation(&sum, &f, offset).unwrap();
            let rhs = sup_deviation(&x, &f, offset).unwrap() + sup_deviation(&y, &zero, 0.0).unwrap();
            // one rounding per node on each side
            prop_assert!(lhs <= rhs * (1.0 + 4.0 * f64::EPSILON));
        }
    }
}
