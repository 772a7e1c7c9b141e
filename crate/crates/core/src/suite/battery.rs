use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::gaussian::FouSpec;
use crate::grid::TimeGrid;
use crate::jumps::{BnsSpec, CtmcSpec, SubordinatorSpec};
use crate::models::{Conditioning, Continuation, Model, ModelKind, ModelSpec, ModelTag, PathCoefficient, VolDriver};
use crate::rng::{stream_key, RngStream};
use crate::smallball::{estimate_tubes, Monitoring, Tube};
use crate::stats::{mean_var, Classification, Estimate};
use crate::suite::targets::{build_targets, TargetStyle};

/// Smallest replication count accepted by [`run_battery`].
pub const MIN_BATTERY_REPS: u64 = 1_000;

const CONTEXT_STREAM: u64 = 0;
const PILOT_STREAM: u64 = 1;
const ESTIMATE_STREAM: u64 = 2;

/// How the base amplitude `a` of the target family is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeRule {
    /// Empirical standard deviation of `Z(T) − Z(t̲)` over `reps` pilot
    /// continuations of the same context.
    Pilot {
        reps: u64,
    },
    Fixed(f64),
}

impl Default for AmplitudeRule {
    fn default() -> Self {
        AmplitudeRule::Pilot { reps: 1_000 }
    }
}

impl fmt::Display for AmplitudeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmplitudeRule::Pilot { reps } => write!(f, "pilot:{reps}"),
            AmplitudeRule::Fixed(a) => write!(f, "fixed:{a}"),
        }
    }
}

impl AmplitudeRule {
    /// Parses `pilot`, `pilot:<reps>` or `fixed:<a>`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.split_once(':') {
            None if s == "pilot" => Some(AmplitudeRule::default()),
            Some(("pilot", r)) => r.parse().ok().filter(|&r| r >= 2).map(|reps| AmplitudeRule::Pilot { reps }),
            Some(("fixed", a)) => a.parse().ok().filter(|a: &f64| *a > 0.0 && a.is_finite()).map(AmplitudeRule::Fixed),
            _ => None,
        }
    }
}

/// Which queries are asked of each model.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryTemplate {
    /// Restart times as fractions of `T`, each in `[0, 1)`.
    pub t_fracs: Vec<f64>,
    /// Tube radii as multiples of the base amplitude.
    pub eps_factors: Vec<f64>,
    pub amplitude: AmplitudeRule,
    pub n_segments: usize,
    pub conditioning: Conditioning,
    pub monitoring: Monitoring,
}

impl Default for QueryTemplate {
    fn default() -> Self {
        Self {
            t_fracs: vec![0.0, 0.5],
            eps_factors: vec![0.75, 1.0],
            amplitude: AmplitudeRule::default(),
            n_segments: 2,
            conditioning: Conditioning::RedrawDrivers,
            monitoring: Monitoring::default(),
        }
    }
}

impl QueryTemplate {
    /// Fixed amplitude 2.5 with tight tubes: the ramps run far enough from the
    /// start value and the pinned endpoint that the event is provably empty.
    pub fn counterexamples() -> Self {
        Self { eps_factors: vec![0.2, 0.4], amplitude: AmplitudeRule::Fixed(2.5), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_fracs.is_empty() || self.eps_factors.is_empty() {
            return Err(Error::BadParams("template needs at least one t̲ fraction and one ε factor".into()));
        }
        if let Some(t) = self.t_fracs.iter().find(|t| !(0.0..1.0).contains(*t)) {
            return Err(Error::BadParams(format!("t̲ fraction must lie in [0, 1), got {t}")));
        }
        if let Some(e) = self.eps_factors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return Err(Error::BadParams(format!("ε factor must be > 0, got {e}")));
        }
        if self.n_segments == 0 {
            return Err(Error::BadParams("n_segments must be ≥ 1".into()));
        }
        match self.amplitude {
            AmplitudeRule::Pilot { reps } if reps < 2 => Err(Error::BadParams("pilot needs at least 2 reps".into())),
            AmplitudeRule::Fixed(a) if !(a > 0.0) || !a.is_finite() => {
                Err(Error::BadParams(format!("fixed amplitude must be > 0, got {a}")))
            }
            _ => Ok(()),
        }
    }
}

/// Summary of a model's queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Every query that is not provably empty has strictly positive evidence.
    PositiveAll,
    /// Some query is provably empty.
    NotFullSupport,
    /// Some query saw no hits without a proof of emptiness.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::PositiveAll => "POSITIVE-ALL",
            Verdict::NotFullSupport => "NOT-FULL-SUPPORT",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Verdict::PositiveAll, Verdict::NotFullSupport, Verdict::Inconclusive].into_iter().find(|v| v.as_str() == s)
    }

    pub fn from_estimates<'a>(estimates: impl IntoIterator<Item = &'a Estimate>) -> Self {
        let mut verdict = Verdict::PositiveAll;
        for e in estimates {
            match e.classification {
                Classification::AnalyticZero => return Verdict::NotFullSupport,
                Classification::ZeroConsistent => verdict = Verdict::Inconclusive,
                Classification::Positive => {}
            }
        }
        verdict
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub t_frac: f64,
    pub t_index: usize,
    pub style: TargetStyle,
    pub amplitude: f64,
    pub epsilon: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelReport {
    pub label: String,
    pub tag: ModelTag,
    pub verdict: Verdict,
    pub queries: Vec<QueryResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub seed: u64,
    pub reps: u64,
    pub t_end: f64,
    pub n_steps: usize,
    pub template: QueryTemplate,
    pub models: Vec<ModelReport>,
    /// Continuations simulated, pilots included.
    pub replications: u64,
    /// Not part of any rendered format.
    pub wall_clock: Duration,
}

impl BatteryReport {
    pub fn queries(&self) -> impl Iterator<Item = (&ModelReport, &QueryResult)> {
        self.models.iter().flat_map(|m| m.queries.iter().map(move |q| (m, q)))
    }
}

/// Runs every template query against every model on `grid`. Each
/// (model, t̲) pair draws one history, then all targets and radii are
/// estimated on shared continuations. Deterministic in `seed`.
pub fn run_battery(
    models: &[ModelSpec],
    grid: TimeGrid<f64>,
    template: &QueryTemplate,
    reps: u64,
    seed: u64,
) -> Result<BatteryReport> {
    let started = Instant::now();
    if models.is_empty() {
        return Err(Error::EmptyBattery);
    }
    if reps < MIN_BATTERY_REPS {
        return Err(Error::BadParams(format!("battery needs reps ≥ {MIN_BATTERY_REPS}, got {reps}")));
    }
    template.validate()?;
    let mut replications = 0;
    let mut reports = Vec::with_capacity(models.len());
    for spec in models {
        let model = Model::new(spec.clone(), grid)?;
        let label = spec.label();
        let key = label_key(&label);
        let mut queries = Vec::new();
        for &t_frac in &template.t_fracs {
            let t_index = grid.index_of_fraction(t_frac).min(grid.n_steps() - 1);
            let stream = |purpose| RngStream::new(seed, stream_key(&[key, t_index as u64, purpose]));
            let ctx = model.simulate(&mut stream(CONTEXT_STREAM))?.context_at(t_index)?;
            let amplitude = match template.amplitude {
                AmplitudeRule::Fixed(a) => a,
                AmplitudeRule::Pilot { reps: pilot } => {
                    replications += pilot;
                    pilot_amplitude(&model, &ctx, template.conditioning, pilot, &stream(PILOT_STREAM))?
                }
            };
            let family = build_targets(&ctx.tail_grid(), amplitude, template.n_segments)?;
            let mut cells = Vec::new();
            let mut tubes = Vec::new();
            for member in &family.members {
                for &factor in &template.eps_factors {
                    let epsilon = factor * amplitude;
                    cells.push((member.style, member.amplitude, epsilon));
                    tubes.push(Tube { target: member.path.values().to_vec(), epsilon });
                }
            }
            let estimates = estimate_tubes(
                &model,
                &ctx,
                &tubes,
                template.conditioning,
                template.monitoring,
                reps,
                &stream(ESTIMATE_STREAM),
            )?;
            replications += reps;
            queries.extend(cells.into_iter().zip(estimates).map(|((style, amplitude, epsilon), estimate)| {
                QueryResult { t_frac, t_index, style, amplitude, epsilon, estimate }
            }));
        }
        let verdict = Verdict::from_estimates(queries.iter().map(|q| &q.estimate));
        reports.push(ModelReport { label, tag: spec.tag(), verdict, queries });
    }
    Ok(BatteryReport {
        seed,
        reps,
        t_end: grid.t_end(),
        n_steps: grid.n_steps(),
        template: template.clone(),
        models: reports,
        replications,
        wall_clock: started.elapsed(),
    })
}

fn label_key(label: &str) -> u64 {
    stream_key(&label.bytes().map(u64::from).collect::<Vec<_>>())
}

/// Standard deviation of `Z(T) − Z(t̲)` over pilot continuations. When the
/// endpoint is pinned, the largest node standard deviation is used instead.
fn pilot_amplitude(
    model: &Model,
    ctx: &crate::models::ConditioningContext,
    conditioning: Conditioning,
    reps: u64,
    rng: &RngStream,
) -> Result<f64> {
    let mut buf = Continuation::default();
    let len = ctx.tail_grid().len();
    let mut columns = vec![Vec::with_capacity(reps as usize); len];
    for r in 0..reps {
        model.continue_into(ctx, conditioning, &mut rng.replication(r), &mut buf);
        for (col, v) in columns.iter_mut().zip(&buf.values) {
            col.push(v - buf.values[0]);
        }
    }
    let sd_end = mean_var(&columns[len - 1]).1.sqrt();
    let a = if sd_end > 1e-9 { sd_end } else { columns.iter().map(|c| mean_var(c).1.sqrt()).fold(0.0, f64::max) };
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonFinite { index: len - 1 });
    }
    Ok(a)
}

/// Models covered by the full-support theorems, with parameters that make
/// every default query resolvable at 10⁵ replications.
pub fn default_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new(ModelKind::MixedFbm { hurst: 0.25, fbm_scale: 1.0 }),
        ModelSpec::new(ModelKind::MixedFbm { hurst: 0.75, fbm_scale: 1.0 }),
        ModelSpec::new(ModelKind::SvPrice {
            p0: 1.0,
            mu: 0.05,
            rho: -0.5,
            vol: VolDriver::Heston { kappa: 2.0, theta: 0.04, xi: 0.3, v0: 0.04 },
        }),
        ModelSpec::new(ModelKind::BnsPrice {
            p0: 1.0,
            mu: 0.05,
            bns: BnsSpec {
                subordinator: SubordinatorSpec::CompoundPoissonExp { jump_rate: 2.0, size_rate: 50.0 },
                decay: 1.0,
                window: None,
            },
        }),
        ModelSpec::new(ModelKind::ComteRenaultPrice {
            p0: 1.0,
            mu: 0.05,
            fou: FouSpec { hurst: 0.3, mean_reversion: 1.0, vol: 0.3, initial: 0.2f64.ln() },
        }),
        ModelSpec::new(ModelKind::RegimePrice {
            p0: 1.0,
            mu: 0.05,
            ctmc: CtmcSpec { generator: vec![vec![-1.0, 1.0], vec![1.0, -1.0]], levels: vec![0.1, 0.3], initial: 0 },
        }),
        ModelSpec::new(ModelKind::SdePrice {
            p0: 1.0,
            mu: PathCoefficient::RunningMaxRatio { base: 0.02, slope: 0.03 },
            sigma: PathCoefficient::RunningMaxRatio { base: 0.2, slope: 0.1 },
            mu_bar: 0.06,
            sigma_bar: 5.0,
        }),
    ]
}

/// The two models without full support.
pub fn counterexample_models() -> Vec<ModelSpec> {
    vec![ModelSpec::new(ModelKind::DoleansCe), ModelSpec::new(ModelKind::BridgeCe)]
}
