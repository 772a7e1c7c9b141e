use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Brownian bridge from `(t̲, history.last())` to `(T, terminal_value)` on
/// `grid_tail`, sampled node by node from the conditional law given the
/// current node and the pinned end: mean `x + (b − x)·d/r`, variance
/// `d(r − d)/r` for a step `d` with remaining time `r`. The last node is set
/// to `terminal_value` exactly.
pub fn gen_bridge_continuation<T: Scalar>(
    history: &Path<T>,
    terminal_value: T,
    grid_tail: &TimeGrid<T>,
    rng: &mut RngStream,
) -> Result<Path<T>> {
    if grid_tail.t_start() != history.grid().t_end() {
        return Err(Error::GridMismatch);
    }
    if !terminal_value.is_finite() {
        return Err(Error::BadParams("bridge terminal value must be finite".into()));
    }
    let mut values = Vec::with_capacity(grid_tail.len());
    bridge_into(history.last(), terminal_value, grid_tail, rng, &mut values);
    Path::new(*grid_tail, values)
}

pub(crate) fn bridge_into<T: Scalar>(
    start: T,
    terminal_value: T,
    grid: &TimeGrid<T>,
    rng: &mut RngStream,
    out: &mut Vec<T>,
) {
    out.clear();
    let n = grid.n_steps();
    let t_end = grid.t_end();
    let mut x = start;
    out.push(x);
    for i in 0..n - 1 {
        let t = grid.node(i);
        let remaining = t_end - t;
        let step = grid.node(i + 1) - t;
        let var = step * (remaining - step) / remaining;
        x = x + (terminal_value - x) * step / remaining + var.max(T::zero()).sqrt() * T::lit(rng.normal());
        out.push(x);
    }
    out.push(terminal_value);
}
