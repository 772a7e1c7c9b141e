use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Fractional Brownian motion with Hurst index in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmSpec {
    pub hurst: f64,
}

impl FbmSpec {
    pub fn new(hurst: f64) -> Result<Self> {
        let spec = Self { hurst };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hurst > 0.0 && self.hurst < 1.0 {
            Ok(())
        } else {
            Err(Error::HurstOutOfRange(self.hurst))
        }
    }
}

/// `R(s, t) = ½(s^{2h} + t^{2h} − |t − s|^{2h})`.
pub fn fbm_covariance<T: Scalar>(hurst: T, s: T, t: T) -> T {
    let two_h = hurst + hurst;
    T::lit(0.5) * (s.powf(two_h) + t.powf(two_h) - (t - s).abs().powf(two_h))
}

/// Lower Cholesky factor of the fBm covariance on the nonzero nodes of a grid.
///
/// Factor once per `(spec, grid)` and reuse across replications; sampling is a
/// triangular matrix–vector product.
#[derive(Debug, Clone)]
pub struct FbmFactor<T> {
    grid: TimeGrid<T>,
    spec: FbmSpec,
    // row-major packed lower triangle; row i holds i + 1 entries
    lower: Vec<T>,
}

impl<T: Scalar> FbmFactor<T> {
    pub fn new(grid: &TimeGrid<T>, spec: FbmSpec) -> Result<Self> {
        spec.validate()?;
        if grid.t_start() != T::zero() {
            return Err(Error::GridNotAtOrigin(grid.t_start().as_f64()));
        }
        let n = grid.n_steps();
        let hurst = T::lit(spec.hurst);
        let times: Vec<T> = (1..=n).map(|i| grid.node(i)).collect();
        let mut lower = vec![T::zero(); n * (n + 1) / 2];
        for i in 0..n {
            let row_i = row_offset(i);
            for j in 0..=i {
                let row_j = row_offset(j);
                let dot = dot(&lower[row_i..row_i + j], &lower[row_j..row_j + j]);
                let s = fbm_covariance(hurst, times[i], times[j]) - dot;
                if i == j {
                    if !(s > T::zero()) {
                        return Err(Error::CovarianceNotPD { row: i + 1, pivot: s.as_f64() });
                    }
                    lower[row_i + i] = s.sqrt();
                } else {
                    lower[row_i + j] = s / lower[row_j + j];
                }
            }
        }
        Ok(Self { grid: *grid, spec, lower })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn spec(&self) -> FbmSpec {
        self.spec
    }

    /// Number of normals one sample consumes (`n_steps`).
    pub fn dim(&self) -> usize {
        self.grid.n_steps()
    }

    /// Row for node `i + 1` of the grid: `L[i][0..=i]`.
    pub fn row(&self, i: usize) -> &[T] {
        let off = row_offset(i);
        &self.lower[off..off + i + 1]
    }

    pub fn sample(&self, rng: &mut RngStream) -> Path<T> {
        let normals: Vec<T> = (0..self.dim()).map(|_| T::lit(rng.normal())).collect();
        self.sample_from_normals(&normals)
    }

    /// Path whose node `i + 1` value is `Σ_{j ≤ i} L[i][j]·z_j`; node 0 is 0.
    pub fn sample_from_normals(&self, normals: &[T]) -> Path<T> {
        assert_eq!(normals.len(), self.dim(), "one normal per nonzero node");
        let mut values = Vec::with_capacity(self.grid.len());
        values.push(T::zero());
        for i in 0..self.dim() {
            values.push(dot(self.row(i), &normals[..=i]));
        }
        Path::new(self.grid, values).expect("finite fBm sample")
    }

    /// Recomputes nodes `from..=n_steps` in place from `normals`; earlier nodes
    /// are left untouched. `values` holds all `n_steps + 1` nodes.
    pub fn resample_tail(&self, normals: &[T], from: usize, values: &mut [T]) {
        assert_eq!(values.len(), self.grid.len());
        for node in from.max(1)..=self.dim() {
            values[node] = dot(self.row(node - 1), &normals[..node]);
        }
    }
}

#[inline]
fn row_offset(i: usize) -> usize {
    i * (i + 1) / 2
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// Fractional Brownian motion on a grid starting at 0. Factors the covariance
/// on every call; use [`FbmFactor`] directly for repeated sampling.
pub fn gen_fbm<T: Scalar>(grid: &TimeGrid<T>, spec: FbmSpec, rng: &mut RngStream) -> Result<Path<T>> {
    Ok(FbmFactor::new(grid, spec)?.sample(rng))
}
