use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gaussian::{FbmSpec, FouSpec};
use crate::jumps::{BnsSpec, CtmcSpec};

/// The ten model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelTag {
    MixedFbm,
    WienerIntegral,
    SvPrice,
    BnsPrice,
    ComteRenaultPrice,
    RegimePrice,
    SdePrice,
    DoleansCe,
    BridgeCe,
    ExpDriftPrice,
}

impl ModelTag {
    pub const ALL: [ModelTag; 10] = [
        ModelTag::MixedFbm,
        ModelTag::WienerIntegral,
        ModelTag::SvPrice,
        ModelTag::BnsPrice,
        ModelTag::ComteRenaultPrice,
        ModelTag::RegimePrice,
        ModelTag::SdePrice,
        ModelTag::DoleansCe,
        ModelTag::BridgeCe,
        ModelTag::ExpDriftPrice,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelTag::MixedFbm => "MIXED_FBM",
            ModelTag::WienerIntegral => "WIENER_INTEGRAL",
            ModelTag::SvPrice => "SV_PRICE",
            ModelTag::BnsPrice => "BNS_PRICE",
            ModelTag::ComteRenaultPrice => "COMTE_RENAULT_PRICE",
            ModelTag::RegimePrice => "REGIME_PRICE",
            ModelTag::SdePrice => "SDE_PRICE",
            ModelTag::DoleansCe => "DOLEANS_CE",
            ModelTag::BridgeCe => "BRIDGE_CE",
            ModelTag::ExpDriftPrice => "EXP_DRIFT_PRICE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// One-line description of the process.
    pub fn description(&self) -> &'static str {
        match self {
            ModelTag::MixedFbm => "Brownian motion plus an independent scaled fractional Brownian motion",
            ModelTag::WienerIntegral => "H + ∫k dW with (H, k) independent of W",
            ModelTag::SvPrice => "stochastic-volatility price dP = P(μ dt + ρg dB + √(1−ρ²)g dW), constant or Heston g",
            ModelTag::BnsPrice => "price with variance a subordinator-driven OU process (BNS)",
            ModelTag::ComteRenaultPrice => "price with volatility e^V, V a fractional OU process, ρ = 0",
            ModelTag::RegimePrice => "price with volatility switched by a continuous-time Markov chain",
            ModelTag::SdePrice => "price SDE with path-dependent coefficients |μ| ≤ μ̄x, σ̄⁻¹x ≤ |σ| ≤ σ̄x",
            ModelTag::DoleansCe => "Doléans exponential of W: strictly positive, no full support in ℝ",
            ModelTag::BridgeCe => "Brownian motion seen in the filtration enlarged by its terminal value",
            ModelTag::ExpDriftPrice => "exp(f(t) + ∫g dW) with deterministic f and g",
        }
    }

    /// Configuration keys, with defaults where one exists.
    pub fn parameters(&self) -> &'static str {
        match self {
            ModelTag::MixedFbm => "hurst, fbm_scale=1",
            ModelTag::WienerIntegral => "drift=0, k=1, k_slope=0 | k_hurst + k_vol (k = exp(k_vol·B^h))",
            ModelTag::SvPrice => "p0=1, mu=0, rho=0, sigma | kappa, theta, xi, v0",
            ModelTag::BnsPrice => "p0=1, mu=0, lambda, jump_rate + jump_size_rate | gamma_shape + gamma_rate, window",
            ModelTag::ComteRenaultPrice => "p0=1, mu=0, hurst, alpha, vol, v0=0",
            ModelTag::RegimePrice => "p0=1, mu=0, levels, generator, initial=0",
            ModelTag::SdePrice => "p0=1, mu_ratio, sigma_ratio | sigma_base + sigma_slope, mu_bar, sigma_bar",
            ModelTag::DoleansCe => "(none)",
            ModelTag::BridgeCe => "(none)",
            ModelTag::ExpDriftPrice => "f=0, g=1",
        }
    }

    /// Price models are exponentials of a semimartingale and may be simulated
    /// in log space.
    pub fn is_price(&self) -> bool {
        matches!(
            self,
            ModelTag::SvPrice
                | ModelTag::BnsPrice
                | ModelTag::ComteRenaultPrice
                | ModelTag::RegimePrice
                | ModelTag::SdePrice
                | ModelTag::ExpDriftPrice
        )
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Deterministic function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `intercept + slope·t`.
    Affine {
        intercept: f64,
        slope: f64,
    },
    /// `base + amplitude·sin(2π·frequency·t)`.
    Sine {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `level` outside `[from, to)`, zero inside.
    Plateau {
        level: f64,
        from: f64,
        to: f64,
    },
}

impl Profile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant(c) => c,
            Profile::Affine { intercept, slope } => intercept + slope * t,
            Profile::Sine { base, amplitude, frequency } => {
                base + amplitude * (2.0 * std::f64::consts::PI * frequency * t).sin()
            }
            Profile::Plateau { level, from, to } => {
                if t >= from && t < to {
                    0.0
                } else {
                    level
                }
            }
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        let finite = match *self {
            Profile::Constant(c) => c.is_finite(),
            Profile::Affine { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            Profile::Sine { base, amplitude, frequency } => {
                base.is_finite() && amplitude.is_finite() && frequency.is_finite()
            }
            Profile::Plateau { level, from, to } => level.is_finite() && from.is_finite() && to.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::BadParams(format!("{what} profile has non-finite parameters")))
        }
    }

    fn short(&self) -> String {
        match *self {
            Profile::Constant(c) => format!("{c}"),
            Profile::Affine { intercept, slope } => format!("{intercept}+{slope}t"),
            Profile::Sine { base, amplitude, frequency } => format!("{base}+{amplitude}sin({frequency})"),
            Profile::Plateau { level, from, to } => format!("{level}off[{from};{to})"),
        }
    }
}

/// Integrand `k` of a Wiener-integral model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrand {
    Deterministic(Profile),
    /// `k = exp(vol·B^h)` for an fBm `B^h` independent of `W`.
    ExpFbm {
        hurst: f64,
        vol: f64,
    },
}

/// Volatility driver `g(t, V_t)` of a stochastic-volatility price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolDriver {
    Constant {
        sigma: f64,
    },
    /// `g = √V⁺` with `dV = κ(θ − V)dt + ξ√V dB`.
    Heston {
        kappa: f64,
        theta: f64,
        xi: f64,
        v0: f64,
    },
}

/// Coefficient of a price SDE divided by the current price:
/// `μ(t, x) = x(t)·m(t, x(t), max_{s≤t} x(s))`.
#[derive(Clone)]
pub enum PathCoefficient {
    Constant(f64),
    /// `base + slope·x(t)/max_{s≤t} x(s)`; the ratio lies in `[base, base + slope]`.
    RunningMaxRatio {
        base: f64,
        slope: f64,
    },
    /// `base + amplitude·sin(2π·frequency·t)`.
    Periodic {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Arbitrary `m(t, x, running_max)`.
    Custom(Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for PathCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathCoefficient::Constant(c) => write!(f, "Constant({c})"),
            PathCoefficient::RunningMaxRatio { base, slope } => {
                write!(f, "RunningMaxRatio {{ base: {base}, slope: {slope} }}")
            }
            PathCoefficient::Periodic { base, amplitude, frequency } => {
                write!(f, "Periodic {{ base: {base}, amplitude: {amplitude}, frequency: {frequency} }}")
            }
            PathCoefficient::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PathCoefficient {
    #[inline]
    pub fn ratio(&self, t: f64, x: f64, running_max: f64) -> f64 {
        match self {
            PathCoefficient::Constant(c) => *c,
            PathCoefficient::RunningMaxRatio { base, slope } => base + slope * (x / running_max),
            PathCoefficient::Periodic { base, amplitude, frequency } => {
                base + amplitude * (2.0 * std::f64::consts::PI * frequency * t).sin()
            }
            PathCoefficient::Custom(m) => m(t, x, running_max),
        }
    }

    /// Range of `|m|` when it is known without sampling.
    pub fn abs_range(&self) -> Option<(f64, f64)> {
        let span = |a: f64, b: f64| {
            let (lo, hi) = (a.min(b), a.max(b));
            if lo <= 0.0 && hi >= 0.0 {
                (0.0, lo.abs().max(hi.abs()))
            } else {
                (lo.abs().min(hi.abs()), lo.abs().max(hi.abs()))
            }
        };
        match *self {
            PathCoefficient::Constant(c) => Some((c.abs(), c.abs())),
            PathCoefficient::RunningMaxRatio { base, slope } => Some(span(base, base + slope)),
            PathCoefficient::Periodic { base, amplitude, .. } => {
                Some(span(base - amplitude.abs(), base + amplitude.abs()))
            }
            PathCoefficient::Custom(_) => None,
        }
    }

    fn short(&self) -> String {
        match self {
            PathCoefficient::Constant(c) => format!("{c}"),
            PathCoefficient::RunningMaxRatio { base, slope } => format!("{base}+{slope}x/M"),
            PathCoefficient::Periodic { base, amplitude, frequency } => format!("{base}+{amplitude}sin({frequency})"),
            PathCoefficient::Custom(_) => "custom".into(),
        }
    }
}

/// Family and parameters of one model.
#[derive(Debug, Clone)]
pub enum ModelKind {
    /// `W + scale·B^h`.
    MixedFbm {
        hurst: f64,
        fbm_scale: f64,
    },
    /// `∫₀ᵗ drift ds + ∫₀ᵗ k dW`.
    WienerIntegral {
        drift: Profile,
        integrand: Integrand,
    },
    SvPrice {
        p0: f64,
        mu: f64,
        rho: f64,
        vol: VolDriver,
    },
    /// Variance `V` is a BNS OU process, `g = √V`, no leverage.
    BnsPrice {
        p0: f64,
        mu: f64,
        bns: BnsSpec,
    },
    /// Volatility `e^V` with `V` fractional OU, `ρ = 0`.
    ComteRenaultPrice {
        p0: f64,
        mu: f64,
        fou: FouSpec,
    },
    /// Volatility `σ_{state}` of a Markov chain.
    RegimePrice {
        p0: f64,
        mu: f64,
        ctmc: CtmcSpec,
    },
    SdePrice {
        p0: f64,
        mu: PathCoefficient,
        sigma: PathCoefficient,
        mu_bar: f64,
        sigma_bar: f64,
    },
    DoleansCe,
    BridgeCe,
    /// `exp(f(t) + ∫₀ᵗ g dW)`.
    ExpDriftPrice {
        drift: Profile,
        vol: Profile,
    },
}

impl ModelKind {
    pub fn tag(&self) -> ModelTag {
        match self {
            ModelKind::MixedFbm { .. } => ModelTag::MixedFbm,
            ModelKind::WienerIntegral { .. } => ModelTag::WienerIntegral,
            ModelKind::SvPrice { .. } => ModelTag::SvPrice,
            ModelKind::BnsPrice { .. } => ModelTag::BnsPrice,
            ModelKind::ComteRenaultPrice { .. } => ModelTag::ComteRenaultPrice,
            ModelKind::RegimePrice { .. } => ModelTag::RegimePrice,
            ModelKind::SdePrice { .. } => ModelTag::SdePrice,
            ModelKind::DoleansCe => ModelTag::DoleansCe,
            ModelKind::BridgeCe => ModelTag::BridgeCe,
            ModelKind::ExpDriftPrice { .. } => ModelTag::ExpDriftPrice,
        }
    }
}

/// A model plus the coordinate it is observed in.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Price models: observe `log P` instead of `P`. Ignored by other models.
    pub log_space: bool,
    /// Report label; defaults to the tag with its key parameters.
    pub name: Option<String>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind, log_space: true, name: None }
    }

    pub fn natural_space(mut self) -> Self {
        self.log_space = false;
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn tag(&self) -> ModelTag {
        self.kind.tag()
    }

    /// Standard Brownian motion.
    pub fn brownian() -> Self {
        Self::new(ModelKind::MixedFbm { hurst: 0.5, fbm_scale: 0.0 })
    }

    /// True when the observed path is `exp` of the simulated coordinate and
    /// therefore strictly positive.
    pub fn positive_output(&self) -> bool {
        match self.tag() {
            ModelTag::DoleansCe => true,
            t if t.is_price() => !self.log_space,
            _ => false,
        }
    }

    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        let tag = self.tag().as_str();
        let space = if self.tag().is_price() && !self.log_space { ";natural" } else { "" };
        let params = match &self.kind {
            ModelKind::MixedFbm { fbm_scale, .. } if *fbm_scale == 0.0 => "brownian".to_string(),
            ModelKind::MixedFbm { hurst, fbm_scale } if *fbm_scale == 1.0 => format!("h={hurst}"),
            ModelKind::MixedFbm { hurst, fbm_scale } => format!("h={hurst};c={fbm_scale}"),
            ModelKind::WienerIntegral { drift, integrand } => {
                let k = match integrand {
                    Integrand::Deterministic(p) => p.short(),
                    Integrand::ExpFbm { hurst, vol } => format!("exp({vol}B^{hurst})"),
                };
                format!("k={k};h'={}", drift.short())
            }
            ModelKind::SvPrice { rho, vol, .. } => match vol {
                VolDriver::Constant { sigma } => format!("sigma={sigma};rho={rho}"),
                VolDriver::Heston { .. } => format!("heston;rho={rho}"),
            },
            ModelKind::BnsPrice { bns, .. } => format!("lambda={}", bns.decay),
            ModelKind::ComteRenaultPrice { fou, .. } => format!("h={}", fou.hurst),
            ModelKind::RegimePrice { ctmc, .. } => format!("states={}", ctmc.n_states()),
            ModelKind::SdePrice { mu, sigma, .. } => format!("m={};s={}", mu.short(), sigma.short()),
            ModelKind::DoleansCe | ModelKind::BridgeCe => String::new(),
            ModelKind::ExpDriftPrice { drift, vol } => format!("f={};g={}", drift.short(), vol.short()),
        };
        if params.is_empty() && space.is_empty() {
            tag.to_string()
        } else {
            format!("{tag}[{params}{space}]")
        }
    }

    /// Checks every parameter against the family's stated ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadParams(msg));
        let price = |p0: f64, mu: f64| {
            if !(p0 > 0.0) || !p0.is_finite() {
                return bad(format!("p0 must be > 0, got {p0}"));
            }
            if !mu.is_finite() {
                return bad(format!("mu must be finite, got {mu}"));
            }
            Ok(())
        };
        match &self.kind {
            ModelKind::MixedFbm { hurst, fbm_scale } => {
                FbmSpec::new(*hurst)?;
                if !fbm_scale.is_finite() {
                    return bad(format!("fbm_scale must be finite, got {fbm_scale}"));
                }
            }
            ModelKind::WienerIntegral { drift, integrand } => {
                drift.validate("drift")?;
                match integrand {
                    Integrand::Deterministic(p) => p.validate("integrand")?,
                    Integrand::ExpFbm { hurst, vol } => {
                        FbmSpec::new(*hurst)?;
                        if !vol.is_finite() {
                            return bad(format!("k_vol must be finite, got {vol}"));
                        }
                    }
                }
            }
            ModelKind::SvPrice { p0, mu, rho, vol } => {
                price(*p0, *mu)?;
                if !(*rho > -1.0 && *rho < 1.0) {
                    return bad(format!("rho must lie in (-1, 1), got {rho}"));
                }
                match *vol {
                    VolDriver::Constant { sigma } => {
                        if !(sigma > 0.0) || !sigma.is_finite() {
                            return bad(format!("sigma must be > 0, got {sigma}"));
                        }
                    }
                    VolDriver::Heston { kappa, theta, xi, v0 } => {
                        if !(kappa > 0.0 && theta > 0.0 && xi > 0.0 && v0 > 0.0)
                            || ![kappa, theta, xi, v0].iter().all(|v| v.is_finite())
                        {
                            return bad(format!(
                                "Heston needs kappa, theta, xi, v0 > 0 (got {kappa}, {theta}, {xi}, {v0})"
                            ));
                        }
                    }
                }
            }
            ModelKind::BnsPrice { p0, mu, bns } => {
                price(*p0, *mu)?;
                bns.validate()?;
                if !bns.subordinator.is_nondegenerate() {
                    return bad("BNS price needs a subordinator with jumps (V > 0 on [0, T])".into());
                }
            }
            ModelKind::ComteRenaultPrice { p0, mu, fou } => {
                price(*p0, *mu)?;
                fou.validate()?;
            }
            ModelKind::RegimePrice { p0, mu, ctmc } => {
                price(*p0, *mu)?;
                ctmc.validate()?;
            }
            ModelKind::SdePrice { p0, mu_bar, sigma_bar, mu, sigma } => {
                price(*p0, 0.0)?;
                if !(*mu_bar > 0.0) || !mu_bar.is_finite() {
                    return bad(format!("mu_bar must be > 0, got {mu_bar}"));
                }
                if !(*sigma_bar > 1.0) || !sigma_bar.is_finite() {
                    return bad(format!("sigma_bar must be > 1, got {sigma_bar}"));
                }
                if let Some((_, hi)) = mu.abs_range() {
                    if hi > mu_bar * (1.0 + 1e-12) {
                        return bad(format!("drift ratio reaches {hi} > mu_bar = {mu_bar}"));
                    }
                }
                if let Some((lo, hi)) = sigma.abs_range() {
                    if lo < (1.0 - 1e-12) / sigma_bar || hi > sigma_bar * (1.0 + 1e-12) {
                        return bad(format!(
                            "diffusion ratio range [{lo}, {hi}] leaves [1/sigma_bar, sigma_bar] = [{}, {sigma_bar}]",
                            1.0 / sigma_bar
                        ));
                    }
                }
            }
            ModelKind::DoleansCe | ModelKind::BridgeCe => {}
            ModelKind::ExpDriftPrice { drift, vol } => {
                drift.validate("f")?;
                vol.validate("g")?;
            }
        }
        Ok(())
    }
}
