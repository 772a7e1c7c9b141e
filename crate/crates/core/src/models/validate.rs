use std::fmt;

use crate::grid::TimeGrid;
use crate::models::sim::Model;
use crate::models::spec::{ModelKind, ModelSpec, ModelTag};
use crate::rng::RngStream;

const SAMPLE_PATHS: u64 = 100;
const SAMPLE_STEPS: usize = 256;
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Uncheckable,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Uncheckable => "UNCHECKABLE",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

/// Hypotheses of the full-support theorems that can be tested on sampled paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub label: String,
    pub checks: Vec<SpecCheck>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&SpecCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// No check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.label)?;
        for c in &self.checks {
            writeln!(f, "  {:<12} {:<24} {}", c.status.as_str(), c.name, c.detail)?;
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        Ok(())
    }
}

/// Checklist for `spec` on `[0, 1]` with 256 steps and 100 sampled paths
/// (fixed seed). Never fails; problems are reported as `FAIL`.
pub fn validate_spec(spec: &ModelSpec) -> ValidationReport {
    let grid = TimeGrid::new(0.0, 1.0, SAMPLE_STEPS).expect("valid default grid");
    let mut report = ValidationReport { label: spec.label(), checks: Vec::new(), warnings: Vec::new() };
    let model = match Model::new(spec.clone(), grid) {
        Ok(m) => m,
        Err(e) => {
            report.checks.push(SpecCheck { name: "parameters", status: CheckStatus::Fail, detail: e.to_string() });
            return report;
        }
    };
    report.checks.push(SpecCheck {
        name: "parameters",
        status: CheckStatus::Pass,
        detail: "within stated ranges".into(),
    });
    report.warnings.extend(model.warnings().iter().cloned());

    let base = RngStream::new(0, 0x7a11_da7e);
    let mut paths = Vec::with_capacity(SAMPLE_PATHS as usize);
    for r in 0..SAMPLE_PATHS {
        match model.simulate(&mut base.replication(r)) {
            Ok(p) => paths.push(p),
            Err(e) => {
                report.checks.push(SpecCheck { name: "simulation", status: CheckStatus::Fail, detail: e.to_string() });
                return report;
            }
        }
    }

    let tag = spec.tag();
    if paths[0].integrand().is_some() && tag != ModelTag::DoleansCe {
        let mut zeros = 0usize;
        let mut inf_abs = f64::INFINITY;
        for p in &paths {
            let k = p.integrand().expect("plan present");
            zeros += k.iter().filter(|&&v| v == 0.0).count();
            inf_abs = k.iter().fold(inf_abs, |m, v| m.min(v.abs()));
        }
        report.checks.push(SpecCheck {
            name: "k zero set empty",
            status: CheckStatus::from_bool(zeros == 0),
            detail: format!("{zeros} grid cells with k = 0 over {SAMPLE_PATHS} paths"),
        });
        report.checks.push(SpecCheck {
            name: "inf |k| > 0",
            status: CheckStatus::from_bool(inf_abs > 0.0),
            detail: format!("min |k| = {inf_abs:e}"),
        });
    }

    match &spec.kind {
        ModelKind::SvPrice { .. } | ModelKind::BnsPrice { .. } | ModelKind::ComteRenaultPrice { .. } => {
            report.checks.push(SpecCheck {
                name: "exponential moments",
                status: CheckStatus::Uncheckable,
                detail: "E exp(c∫k⁻²ds) < ∞ cannot be verified from finitely many paths".into(),
            });
        }
        _ => {}
    }

    match &spec.kind {
        ModelKind::BnsPrice { bns, .. } => {
            let ok = paths.iter().all(|p| {
                let v = p.vol().expect("BNS stores V");
                let floor = (-bns.decay * grid.t_end()).exp() * v[0];
                v.iter().all(|&x| x >= floor && x > 0.0)
            });
            report.checks.push(SpecCheck {
                name: "V ≥ e^{−λT}V₀ > 0",
                status: CheckStatus::from_bool(ok),
                detail: "variance bounded below along every sampled path".into(),
            });
        }
        ModelKind::SdePrice { mu, sigma, mu_bar, sigma_bar, .. } => {
            let nodes = grid.nodes();
            let (mut drift_ok, mut diff_ok) = (true, true);
            let (mut worst_m, mut lo_s, mut hi_s) = (0.0f64, f64::INFINITY, 0.0f64);
            for p in &paths {
                let x = p.x();
                let mut running_max = f64::NEG_INFINITY;
                for i in 0..grid.n_steps() {
                    let price = x[i].exp();
                    running_max = running_max.max(price);
                    let m = mu.ratio(nodes[i], price, running_max).abs();
                    let s = sigma.ratio(nodes[i], price, running_max).abs();
                    worst_m = worst_m.max(m);
                    lo_s = lo_s.min(s);
                    hi_s = hi_s.max(s);
                    drift_ok &= m <= mu_bar * (1.0 + BOUND_SLACK);
                    diff_ok &= s >= (1.0 - BOUND_SLACK) / sigma_bar && s <= sigma_bar * (1.0 + BOUND_SLACK);
                }
            }
            report.checks.push(SpecCheck {
                name: "|μ| ≤ μ̄x",
                status: CheckStatus::from_bool(drift_ok),
                detail: format!("max |μ|/x = {worst_m} against μ̄ = {mu_bar}"),
            });
            report.checks.push(SpecCheck {
                name: "σ̄⁻¹x ≤ |σ| ≤ σ̄x",
                status: CheckStatus::from_bool(diff_ok),
                detail: format!("|σ|/x in [{lo_s}, {hi_s}] against [{}, {sigma_bar}]", 1.0 / sigma_bar),
            });
        }
        ModelKind::DoleansCe => {
            let positive = paths.iter().all(|p| p.z().values().iter().all(|&v| v > 0.0));
            report.checks.push(SpecCheck {
                name: "support",
                status: CheckStatus::Fail,
                detail: format!(
                    "Z strictly positive{}; CFS in ℝ impossible",
                    if positive { " on every sampled path" } else { "" }
                ),
            });
        }
        ModelKind::BridgeCe => {
            report.checks.push(SpecCheck {
                name: "support",
                status: CheckStatus::Fail,
                detail: "Z(T) = B_T is known at time 0 in the enlarged filtration; CFS impossible".into(),
            });
        }
        _ => {}
    }

    if spec.positive_output() && tag != ModelTag::DoleansCe {
        report.warnings.push("observed in natural space: paths are positive, so support is relative to (0, ∞)".into());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::spec::{Integrand, PathCoefficient, Profile};

    #[test]
    fn doleans_reports_its_failure_mode() {
        let r = validate_spec(&ModelSpec::new(ModelKind::DoleansCe));
        let c = r.check("support").unwrap();
        assert_eq!(c.status, CheckStatus::Fail);
        assert!(c.detail.contains("Z strictly positive"));
        assert!(c.detail.contains("CFS in ℝ impossible"));
    }

    #[test]
    fn sde_within_bounds_passes() {
        let spec = ModelSpec::new(ModelKind::SdePrice {
            p0: 1.0,
            mu: PathCoefficient::Constant(0.05),
            sigma: PathCoefficient::Constant(0.3),
            mu_bar: 0.05,
            sigma_bar: 10.0 / 3.0,
        });
        let r = validate_spec(&spec);
        assert!(r.passed(), "{r}");
        assert_eq!(r.check("|μ| ≤ μ̄x").unwrap().status, CheckStatus::Pass);
        assert_eq!(r.check("σ̄⁻¹x ≤ |σ| ≤ σ̄x").unwrap().status, CheckStatus::Pass);
    }

    #[test]
    fn sde_custom_coefficient_violation_is_caught() {
        let spec = ModelSpec::new(ModelKind::SdePrice {
            p0: 1.0,
            mu: PathCoefficient::Custom(std::sync::Arc::new(|_, x, _| 0.2 * x)),
            sigma: PathCoefficient::Constant(0.3),
            mu_bar: 0.05,
            sigma_bar: 10.0 / 3.0,
        });
        assert_eq!(validate_spec(&spec).check("|μ| ≤ μ̄x").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn mixed_fbm_zero_set_passes() {
        let r = validate_spec(&ModelSpec::new(ModelKind::MixedFbm { hurst: 0.75, fbm_scale: 1.0 }));
        assert_eq!(r.check("k zero set empty").unwrap().status, CheckStatus::Pass);
        assert!(r.passed());
    }

    #[test]
    fn plateau_integrand_fails() {
        let spec = ModelSpec::new(ModelKind::WienerIntegral {
            drift: Profile::Constant(0.0),
            integrand: Integrand::Deterministic(Profile::Plateau { level: 1.0, from: 0.25, to: 0.5 }),
        });
        let r = validate_spec(&spec);
        assert_eq!(r.check("k zero set empty").unwrap().status, CheckStatus::Fail);
        assert_eq!(r.check("inf |k| > 0").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn bad_parameters_are_reported() {
        let r = validate_spec(&ModelSpec::new(ModelKind::MixedFbm { hurst: 1.5, fbm_scale: 1.0 }));
        assert_eq!(r.check("parameters").unwrap().status, CheckStatus::Fail);
    }
}
