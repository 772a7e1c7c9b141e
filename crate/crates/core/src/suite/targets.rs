use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};

/// Shape of a piecewise-linear target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetStyle {
    Flat,
    RampUp,
    RampDown,
    /// `+a, −a, +a, …` at the segment breakpoints.
    Zigzag,
    /// A single triangle of height `a` on the middle breakpoint.
    Spike,
}

impl TargetStyle {
    pub const ALL: [TargetStyle; 5] =
        [TargetStyle::Flat, TargetStyle::RampUp, TargetStyle::RampDown, TargetStyle::Zigzag, TargetStyle::Spike];

    pub fn as_str(&self) -> &'static str {
        match self {
            TargetStyle::Flat => "flat",
            TargetStyle::RampUp => "ramp-up",
            TargetStyle::RampDown => "ramp-down",
            TargetStyle::Zigzag => "zigzag",
            TargetStyle::Spike => "spike",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Values at the breakpoints `j/n_segments`, `j = 0..=n_segments`.
    fn breakpoints(&self, amplitude: f64, n_segments: usize) -> Vec<f64> {
        let n = n_segments;
        (0..=n)
            .map(|j| match self {
                TargetStyle::Flat => 0.0,
                TargetStyle::RampUp => amplitude * j as f64 / n as f64,
                TargetStyle::RampDown => -amplitude * j as f64 / n as f64,
                TargetStyle::Zigzag if j == 0 => 0.0,
                TargetStyle::Zigzag if j % 2 == 1 => amplitude,
                TargetStyle::Zigzag => -amplitude,
                TargetStyle::Spike if j == n.div_ceil(2) => amplitude,
                TargetStyle::Spike => 0.0,
            })
            .collect()
    }
}

impl fmt::Display for TargetStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One member of a [`TargetFamily`].
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub style: TargetStyle,
    pub amplitude: f64,
    pub path: Path<f64>,
}

/// Piecewise-linear targets on `[t̲, T]`, each starting at 0: every style at
/// amplitudes `a` and `a/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFamily {
    pub amplitude: f64,
    pub n_segments: usize,
    pub members: Vec<Target>,
}

impl TargetFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn build_targets(grid_tail: &TimeGrid<f64>, amplitude: f64, n_segments: usize) -> Result<TargetFamily> {
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::BadParams(format!("target amplitude must be > 0, got {amplitude}")));
    }
    if n_segments == 0 {
        return Err(Error::BadParams("targets need at least one segment".into()));
    }
    let t0 = grid_tail.t_start();
    let span = grid_tail.span();
    let mut members = Vec::with_capacity(TargetStyle::ALL.len() * 2);
    for style in TargetStyle::ALL {
        for a in [amplitude, amplitude / 2.0] {
            let knots = style.breakpoints(a, n_segments);
            let mut path = Path::from_fn(*grid_tail, |t| {
                let s = ((t - t0) / span).clamp(0.0, 1.0) * n_segments as f64;
                let j = (s.floor() as usize).min(n_segments - 1);
                let w = s - j as f64;
                knots[j] + (knots[j + 1] - knots[j]) * w
            })?
            .into_values();
            path[0] = 0.0;
            members.push(Target { style, amplitude: a, path: Path::new(*grid_tail, path)? });
        }
    }
    Ok(TargetFamily { amplitude, n_segments, members })
}
