//! Binomial reporting and the two-sample tests used by the property checks.

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// z for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

/// Wilson score interval for `hits` successes out of `reps` trials.
pub fn wilson_interval(hits: u64, reps: u64, z: f64) -> Result<(f64, f64)> {
    if reps == 0 {
        return Err(Error::ZeroReps);
    }
    if hits > reps {
        return Err(Error::BadParams(format!("hits {hits} exceed reps {reps}")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::BadParams(format!("z must be positive, got {z}")));
    }
    let n = reps as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let mut low = (center - half).max(0.0);
    let mut high = (center + half).min(1.0);
    if hits == 0 {
        low = 0.0;
    }
    if hits == reps {
        high = 1.0;
    }
    Ok((low.min(p), high.max(p)))
}

/// How a small-ball estimate is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    /// At least one hit: the Wilson lower bound is strictly positive.
    Positive,
    /// No hits; the Wilson upper bound bounds the residual probability.
    ZeroConsistent,
    /// The tube event is provably empty for this model and context.
    AnalyticZero,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Positive => "POSITIVE",
            Classification::ZeroConsistent => "ZERO_CONSISTENT",
            Classification::AnalyticZero => "ANALYTIC_ZERO",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "POSITIVE" => Some(Classification::Positive),
            "ZERO_CONSISTENT" => Some(Classification::ZeroConsistent),
            "ANALYTIC_ZERO" => Some(Classification::AnalyticZero),
            _ => None,
        }
    }
}

/// Why a tube event is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ZeroReason {
    /// The tube leaves the half-line a strictly positive process lives on.
    Positivity,
    /// The terminal value is pinned outside the tube.
    EndpointPin,
}

impl ZeroReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZeroReason::Positivity => "POSITIVITY",
            ZeroReason::EndpointPin => "ENDPOINT_PIN",
        }
    }
}

/// Monte Carlo estimate of a tube probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub hits: u64,
    pub reps: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub classification: Classification,
    pub reason: Option<ZeroReason>,
}

impl Estimate {
    pub fn from_counts(hits: u64, reps: u64, analytic_zero: Option<ZeroReason>) -> Result<Self> {
        let (ci_low, ci_high) = wilson_interval(hits, reps, Z_95)?;
        let classification = match analytic_zero {
            Some(_) => Classification::AnalyticZero,
            None if hits == 0 => Classification::ZeroConsistent,
            None => Classification::Positive,
        };
        Ok(Self {
            hits,
            reps,
            p_hat: hits as f64 / reps as f64,
            ci_low,
            ci_high,
            classification,
            reason: analytic_zero,
        })
    }

    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.reps as f64).sqrt()
    }

    /// True when the two 95% intervals intersect.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    // erfc is accurate to full relative precision only for positive arguments
    if x >= 0.0 {
        1.0 - 0.5 * erfc(x / std::f64::consts::SQRT_2)
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// Two-sample Kolmogorov–Smirnov test: `(D, asymptotic p-value)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty(), "KS test needs non-empty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    (d, kolmogorov_q(lambda))
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = sign * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
