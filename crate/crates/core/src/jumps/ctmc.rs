use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};
use crate::rng::RngStream;
use crate::scalar::Scalar;

const ROW_SUM_TOL: f64 = 1e-12;

/// Continuous-time Markov chain with one volatility level per state.
#[derive(Debug, Clone, PartialEq)]
pub struct CtmcSpec {
    /// Generator matrix `Q`, row-major: off-diagonals ≥ 0, rows sum to 0.
    pub generator: Vec<Vec<f64>>,
    /// Volatility level `σ_i > 0` of each state.
    pub levels: Vec<f64>,
    pub initial: usize,
}

impl CtmcSpec {
    pub fn n_states(&self) -> usize {
        self.levels.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.levels.len();
        if n < 2 {
            return Err(Error::BadGenerator(format!("need at least 2 states, got {n}")));
        }
        if self.generator.len() != n || self.generator.iter().any(|row| row.len() != n) {
            return Err(Error::BadGenerator(format!("generator must be {n}x{n}")));
        }
        for (i, row) in self.generator.iter().enumerate() {
            if row.iter().any(|q| !q.is_finite()) {
                return Err(Error::BadGenerator(format!("row {i} has a non-finite rate")));
            }
            if row.iter().enumerate().any(|(j, &q)| j != i && q < 0.0) {
                return Err(Error::BadGenerator(format!("row {i} has a negative off-diagonal rate")));
            }
            let sum: f64 = row.iter().sum();
            if sum.abs() > ROW_SUM_TOL {
                return Err(Error::BadGenerator(format!("row {i} sums to {sum}, not 0")));
            }
        }
        if let Some(bad) = self.levels.iter().find(|&&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::BadParams(format!("volatility levels must be > 0, got {bad}")));
        }
        if self.initial >= n {
            return Err(Error::BadParams(format!("initial state {} out of range", self.initial)));
        }
        Ok(())
    }

    /// Exit rate `−Q_ii`.
    fn exit_rate(&self, i: usize) -> f64 {
        -self.generator[i][i]
    }

    fn next_state(&self, i: usize, rng: &mut RngStream) -> usize {
        let total = self.exit_rate(i);
        let mut u = rng.uniform() * total;
        let mut last = i;
        for (j, &q) in self.generator[i].iter().enumerate() {
            if j == i || q <= 0.0 {
                continue;
            }
            last = j;
            if u < q {
                return j;
            }
            u -= q;
        }
        last
    }

    /// State at each node, starting from `start` at `grid.t_start()`. Holding
    /// times are exact exponentials; a node records the state in force just
    /// before it (left-continuous).
    pub fn simulate_states<T: Scalar>(&self, grid: &TimeGrid<T>, start: usize, rng: &mut RngStream) -> Vec<usize> {
        let mut state = start;
        let mut t = grid.t_start().as_f64();
        let mut next = self.next_jump(state, t, rng);
        let mut states = Vec::with_capacity(grid.len());
        states.push(state);
        for i in 1..grid.len() {
            let node = grid.node(i).as_f64();
            while next < node {
                t = next;
                state = self.next_state(state, rng);
                next = self.next_jump(state, t, rng);
            }
            states.push(state);
        }
        states
    }

    fn next_jump(&self, state: usize, now: f64, rng: &mut RngStream) -> f64 {
        let rate = self.exit_rate(state);
        if rate > 0.0 {
            now + rng.exponential(rate)
        } else {
            f64::INFINITY
        }
    }
}

/// Piecewise-constant volatility path `σ_{state(t)}` read at the nodes.
pub fn gen_ctmc_vol<T: Scalar>(grid: &TimeGrid<T>, spec: &CtmcSpec, rng: &mut RngStream) -> Result<Path<T>> {
    spec.validate()?;
    let states = spec.simulate_states(grid, spec.initial, rng);
    Path::new(*grid, states.into_iter().map(|s| T::lit(spec.levels[s])).collect())
}
