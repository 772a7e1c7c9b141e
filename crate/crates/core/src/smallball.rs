//! Monte Carlo estimation of conditional small-ball probabilities
//! `P[sup_{[t̲,T]} |Z(t) − Z(t̲) − f(t)| < ε | 𝒢_t̲]` and the Brownian oracle.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};
use crate::integrate::qv_clock;
use crate::models::{Conditioning, ConditioningContext, Continuation, Model, ModelSpec, ModelTag};
use crate::rng::RngStream;
use crate::stats::{normal_cdf, Estimate, ZeroReason};

/// How the sup over `[t̲, T]` is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Monitoring {
    /// Grid nodes, plus the exact probability that the Brownian bridge between
    /// two nodes stays inside the tube, whenever the model supplies the cell
    /// variance. Falls back to [`Monitoring::Grid`] otherwise.
    #[default]
    BrownianBridge,
    /// Grid nodes only.
    Grid,
}

impl Monitoring {
    pub fn as_str(&self) -> &'static str {
        match self {
            Monitoring::BrownianBridge => "bridge",
            Monitoring::Grid => "grid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bridge" => Some(Monitoring::BrownianBridge),
            "grid" => Some(Monitoring::Grid),
            _ => None,
        }
    }
}

/// Tube around `Z(t̲) + f` of radius `ε`, with `f` on `[t̲, T]` and `f(t̲) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallBallQuery {
    pub t_index: usize,
    pub target: Path<f64>,
    pub epsilon: f64,
    pub conditioning: Conditioning,
    pub monitoring: Monitoring,
}

impl SmallBallQuery {
    pub fn new(t_index: usize, target: Path<f64>, epsilon: f64) -> Result<Self> {
        let q =
            Self { t_index, target, epsilon, conditioning: Conditioning::default(), monitoring: Monitoring::default() };
        q.validate()?;
        Ok(q)
    }

    pub fn with_conditioning(mut self, conditioning: Conditioning) -> Self {
        self.conditioning = conditioning;
        self
    }

    pub fn with_monitoring(mut self, monitoring: Monitoring) -> Self {
        self.monitoring = monitoring;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_tube(self.target.values(), self.epsilon)
    }

    fn check_context(&self, ctx: &ConditioningContext) -> Result<()> {
        if self.t_index != ctx.index() {
            return Err(Error::BadQuery(format!(
                "query restarts at node {} but the context is at node {}",
                self.t_index,
                ctx.index()
            )));
        }
        if *self.target.grid() != ctx.tail_grid() {
            return Err(Error::BadQuery("target must live on the context's tail grid [t̲, T]".into()));
        }
        Ok(())
    }
}

fn check_tube(target: &[f64], epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::BadQuery(format!("ε must be positive and finite, got {epsilon}")));
    }
    if target[0] != 0.0 {
        return Err(Error::BadQuery(format!("target must start at 0, starts at {}", target[0])));
    }
    Ok(())
}

/// One tube on the continuation grid, as raw node values.
#[derive(Debug, Clone, PartialEq)]
pub struct Tube {
    pub target: Vec<f64>,
    pub epsilon: f64,
}

/// Reason the tube event is provably empty, if any:
/// positivity when the observed process is strictly positive and the tube
/// lies in `(−∞, 0]` at some node; endpoint pinning when the terminal value
/// is known and sits outside the tube.
pub fn detect_analytic_zero(spec: &ModelSpec, ctx: &ConditioningContext, q: &SmallBallQuery) -> Option<ZeroReason> {
    zero_reason(spec, ctx, q.target.values(), q.epsilon)
}

fn zero_reason(spec: &ModelSpec, ctx: &ConditioningContext, target: &[f64], epsilon: f64) -> Option<ZeroReason> {
    let z0 = ctx.restart_value();
    if spec.positive_output() && target.iter().any(|&f| z0 + f + epsilon <= 0.0) {
        return Some(ZeroReason::Positivity);
    }
    if spec.tag() == ModelTag::BridgeCe {
        if let Some(b) = ctx.terminal() {
            let f_end = target[target.len() - 1];
            if (f_end - (b - z0)).abs() >= epsilon {
                return Some(ZeroReason::EndpointPin);
            }
        }
    }
    None
}

/// Probability that a Brownian bridge with variance `v` from `x` to `y` stays
/// in `(0, w)`, for `x, y ∈ (0, w)`:
/// `Σ_k [exp(−2kw(kw + y − x)/v) − exp(−2(kw + x)(kw + y)/v)]`.
pub(crate) fn bridge_stay(x: f64, y: f64, w: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let inv = 2.0 / v;
    let (lo, hi) = (x * y * inv, (w - x) * (w - y) * inv);
    if lo > 50.0 && hi > 50.0 {
        return 1.0;
    }
    let d = y - x;
    let mut p = 1.0 - (-lo).exp();
    for k in 1..64 {
        let kw = k as f64 * w;
        let terms = [
            (-kw * (kw + d) * inv).exp(),
            (-kw * (kw - d) * inv).exp(),
            -(-(kw + x) * (kw + y) * inv).exp(),
            -(-(x - kw) * (y - kw) * inv).exp(),
        ];
        let sum: f64 = terms.iter().sum();
        p += sum;
        if terms.iter().all(|t| t.abs() < 1e-18) {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Whether one continuation is a hit. `u` is the replication's uniform; with
/// cell variances the path is a hit iff `u` is below the probability that
/// the bridges between nodes stay in the tube.
#[inline]
pub(crate) fn is_hit(values: &[f64], cell_var: Option<&[f64]>, target: &[f64], epsilon: f64, u: f64) -> bool {
    let offset = values[0];
    let mut prev = 0.0;
    let mut survival = 1.0;
    for (i, (&x, &f)) in values.iter().zip(target).enumerate() {
        let d = x - offset - f;
        if !(d.abs() < epsilon) {
            return false;
        }
        if let Some(var) = cell_var {
            if i > 0 {
                survival *= bridge_stay(prev + epsilon, d + epsilon, 2.0 * epsilon, var[i - 1]);
                if survival <= u {
                    return false;
                }
            }
        }
        prev = d;
    }
    u < survival
}

/// Hit counts of every tube over `reps` continuations of `ctx`. Replication
/// `r` draws from `rng.replication(r)`, so counts do not depend on the number
/// of worker threads.
pub(crate) fn count_hits(
    model: &Model,
    ctx: &ConditioningContext,
    tubes: &[Tube],
    conditioning: Conditioning,
    monitoring: Monitoring,
    reps: u64,
    rng: &RngStream,
) -> Vec<u64> {
    let m = tubes.len();
    (0..reps)
        .into_par_iter()
        .fold(
            || (Continuation::default(), vec![0u64; m]),
            |(mut buf, mut counts), r| {
                let mut stream = rng.replication(r);
                model.continue_into(ctx, conditioning, &mut stream, &mut buf);
                let u = stream.uniform();
                let var = (monitoring == Monitoring::BrownianBridge && buf.has_var).then_some(buf.cell_var.as_slice());
                for (c, tube) in counts.iter_mut().zip(tubes) {
                    if is_hit(&buf.values, var, &tube.target, tube.epsilon, u) {
                        *c += 1;
                    }
                }
                (buf, counts)
            },
        )
        .map(|(_, c)| c)
        .reduce(|| vec![0u64; m], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
}

/// Estimates several tubes on shared continuations of `ctx`.
pub fn estimate_tubes(
    model: &Model,
    ctx: &ConditioningContext,
    tubes: &[Tube],
    conditioning: Conditioning,
    monitoring: Monitoring,
    reps: u64,
    rng: &RngStream,
) -> Result<Vec<Estimate>> {
    if reps == 0 {
        return Err(Error::ZeroReps);
    }
    model.check_context(ctx)?;
    let len = ctx.tail_grid().len();
    for t in tubes {
        if t.target.len() != len {
            return Err(Error::BadQuery(format!("target has {} nodes, tail grid has {len}", t.target.len())));
        }
        check_tube(&t.target, t.epsilon)?;
    }
    let hits = count_hits(model, ctx, tubes, conditioning, monitoring, reps, rng);
    tubes
        .iter()
        .zip(hits)
        .map(|(t, h)| Estimate::from_counts(h, reps, zero_reason(model.spec(), ctx, &t.target, t.epsilon)))
        .collect()
}

/// Fraction of `reps` continuations of `ctx` that stay in the tube of `q`.
pub fn estimate_smallball(
    model: &Model,
    ctx: &ConditioningContext,
    q: &SmallBallQuery,
    reps: u64,
    rng: &RngStream,
) -> Result<Estimate> {
    q.validate()?;
    q.check_context(ctx)?;
    let tube = Tube { target: q.target.values().to_vec(), epsilon: q.epsilon };
    Ok(estimate_tubes(model, ctx, &[tube], q.conditioning, q.monitoring, reps, rng)?.remove(0))
}

/// `P[sup_{[0,K]} |B| < ε]` for standard Brownian motion. Uses the eigenfunction
/// series `(4/π) Σ (−1)ⁿ/(2n+1) exp(−(2n+1)²π²K/(8ε²))` when it converges fast
/// and the reflection (image) series `Σ_k (−1)^k [Φ((2k+1)a) − Φ((2k−1)a)]`,
/// `a = ε/√K`, otherwise.
pub fn brownian_smallball_series(k_total: f64, epsilon: f64) -> Result<f64> {
    if !(k_total >= 0.0) || !k_total.is_finite() {
        return Err(Error::BadParams(format!("time horizon K must be ≥ 0, got {k_total}")));
    }
    if !(epsilon > 0.0) || epsilon.is_nan() {
        return Err(Error::BadParams(format!("ε must be > 0, got {epsilon}")));
    }
    if k_total == 0.0 || epsilon.is_infinite() {
        return Ok(1.0);
    }
    let c = std::f64::consts::PI.powi(2) * k_total / (8.0 * epsilon * epsilon);
    let p = if c >= 1.0 { eigen_series(c) } else { image_series(epsilon / k_total.sqrt()) };
    Ok(p.clamp(0.0, 1.0))
}

fn eigen_series(c: f64) -> f64 {
    let mut sum = 0.0;
    for n in 0..10_000 {
        let m = (2 * n + 1) as f64;
        let term = (-m * m * c).exp() / m;
        sum += if n % 2 == 0 { term } else { -term };
        if term < 1e-15 {
            break;
        }
    }
    4.0 / std::f64::consts::PI * sum
}

fn image_series(a: f64) -> f64 {
    // k = 0 term plus the symmetric pairs ±k, each Φ-difference computed on
    // the tail side to avoid cancellation
    let mass = |lo: f64, hi: f64| normal_cdf(-lo) - normal_cdf(-hi);
    let mut sum = 1.0 - 2.0 * normal_cdf(-a);
    for k in 1..10_000 {
        let term = 2.0 * mass((2 * k - 1) as f64 * a, (2 * k + 1) as f64 * a);
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    sum
}

/// Tube probability of `∫k dW` around `f` through the quadratic-variation
/// clock: simulates a Brownian motion on `[0, K]` against `f ∘ g⁻¹`.
pub fn timechanged_smallball(
    k: &Path<f64>,
    f: &Path<f64>,
    epsilon: f64,
    reps: u64,
    rng: &RngStream,
) -> Result<Estimate> {
    timechanged_smallball_with(k, f, epsilon, reps, rng, Monitoring::default())
}

pub fn timechanged_smallball_with(
    k: &Path<f64>,
    f: &Path<f64>,
    epsilon: f64,
    reps: u64,
    rng: &RngStream,
    monitoring: Monitoring,
) -> Result<Estimate> {
    if reps == 0 {
        return Err(Error::ZeroReps);
    }
    k.ensure_grid(f.grid())?;
    check_tube(f.values(), epsilon)?;
    let clock = qv_clock(k);
    let total = clock.total();
    if !(total > 0.0) {
        return Err(Error::DegenerateClock);
    }
    let n = k.grid().n_steps();
    let u_grid = TimeGrid::new(0.0, total, n)?;
    let tgrid = *k.grid();
    let target: Vec<f64> =
        u_grid.nodes().into_iter().map(|u| interpolate(&tgrid, f.values(), clock.inverse(u))).collect();
    let mut target = target;
    target[0] = 0.0;
    let du = u_grid.dt();
    let sdu = du.sqrt();
    let var = vec![du; n];
    let use_var = monitoring == Monitoring::BrownianBridge;
    let hits = (0..reps)
        .into_par_iter()
        .fold(
            || (Vec::with_capacity(n + 1), 0u64),
            |(mut path, mut hits): (Vec<f64>, u64), r| {
                let mut s = rng.replication(r);
                path.clear();
                let mut b = 0.0;
                path.push(b);
                for _ in 0..n {
                    b += sdu * s.normal();
                    path.push(b);
                }
                let u = s.uniform();
                if is_hit(&path, use_var.then_some(var.as_slice()), &target, epsilon, u) {
                    hits += 1;
                }
                (path, hits)
            },
        )
        .map(|(_, h)| h)
        .sum();
    Estimate::from_counts(hits, reps, None)
}

fn interpolate(grid: &TimeGrid<f64>, values: &[f64], t: f64) -> f64 {
    let n = grid.n_steps();
    let pos = ((t - grid.t_start()) / grid.dt()).clamp(0.0, n as f64);
    let i = (pos.floor() as usize).min(n - 1);
    let frac = pos - i as f64;
    values[i] + (values[i + 1] - values[i]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use proptest::prelude::*;

    const ORACLE_1_1: f64 = 0.370_777_429_799_523_9;

    #[test]
    fn series_values() {
        assert_eq!(brownian_smallball_series(0.0, 1.0).unwrap(), 1.0);
        assert!((brownian_smallball_series(1.0, 1.0).unwrap() - ORACLE_1_1).abs() < 1e-15);
        assert!((brownian_smallball_series(1.0, 0.5).unwrap() - 0.009_156_990_289_760_756).abs() < 1e-16);
        assert!((brownian_smallball_series(1.0, 2.0).unwrap() - 0.908_999_476_153_633_8).abs() < 1e-15);
        assert!((brownian_smallball_series(1.0, 1e6).unwrap() - 1.0).abs() < 1e-12);
        assert!((brownian_smallball_series(4.0, 0.3).unwrap() - 1.959_072_497_187_83e-24).abs() < 1e-36);
        assert!(brownian_smallball_series(-1.0, 1.0).is_err());
        assert!(brownian_smallball_series(1.0, 0.0).is_err());
    }

    #[test]
    fn both_series_agree_where_they_overlap() {
        for c in [0.5, 1.0, 2.0] {
            let eps = 1.0;
            let k = c * 8.0 / std::f64::consts::PI.powi(2);
            let a = eigen_series(c);
            let b = image_series(eps / k.sqrt());
            assert!((a - b).abs() < 1e-14, "{c}: {a} vs {b}");
        }
    }

    #[test]
    fn bridge_stay_limits() {
        // single far barrier: one-sided formula 1 − exp(−2xy/v)
        let p = bridge_stay(0.1, 0.2, 100.0, 0.01);
        assert!((p - (1.0 - (-2.0 * 0.1 * 0.2 / 0.01f64).exp())).abs() < 1e-15);
        // tiny variance: certain survival
        assert_eq!(bridge_stay(0.5, 0.5, 1.0, 1e-6), 1.0);
        // symmetric start and end in the middle, huge variance: almost surely exits
        assert!(bridge_stay(0.5, 0.5, 1.0, 100.0) < 1e-10);
    }

    #[test]
    fn bridge_stay_against_fine_simulation() {
        // a bridge from 0.3 to 0.6 with variance 0.05 in (0, 1), simulated on
        // 2000 sub-steps
        let (x, y, w, v) = (0.3, 0.6, 1.0, 0.05);
        let exact = bridge_stay(x, y, w, v);
        let grid = TimeGrid::new(0.0, v, 2000).unwrap();
        let base = RngStream::new(3, 3);
        let n = 20_000;
        let mut out = Vec::new();
        let mut stays = 0;
        for r in 0..n {
            crate::gaussian::bridge_into(x, y, &grid, &mut base.replication(r), &mut out);
            if out.iter().all(|&p| p > 0.0 && p < w) {
                stays += 1;
            }
        }
        let p = stays as f64 / n as f64;
        // grid monitoring overestimates slightly; allow 4 SE plus the bias
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!(p >= exact - 4.0 * se && p <= exact + 4.0 * se + 0.01, "{p} vs {exact}");
    }

    fn brownian_ctx(n: usize) -> (Model, ConditioningContext) {
        let g = TimeGrid::new(0.0, 1.0, n).unwrap();
        let model = Model::new(ModelSpec::brownian(), g).unwrap();
        let ctx = model.simulate(&mut RngStream::new(0, 0)).unwrap().context_at(0).unwrap();
        (model, ctx)
    }

    #[test]
    fn brownian_tube_matches_oracle() {
        let (model, ctx) = brownian_ctx(512);
        let f = Path::constant(ctx.tail_grid(), 0.0).unwrap();
        let base = RngStream::new(2024, 1);
        for eps in [0.5, 1.0, 2.0] {
            let q = SmallBallQuery::new(0, f.clone(), eps).unwrap();
            let e = estimate_smallball(&model, &ctx, &q, 100_000, &base).unwrap();
            let oracle = brownian_smallball_series(1.0, eps).unwrap();
            assert!((e.p_hat - oracle).abs() < 3.0 * e.std_error().max(1e-4), "ε = {eps}: {} vs {oracle}", e.p_hat);
        }
    }

    #[test]
    fn grid_monitoring_is_biased_upward() {
        let (model, ctx) = brownian_ctx(64);
        let f = Path::constant(ctx.tail_grid(), 0.0).unwrap();
        let q = SmallBallQuery::new(0, f, 1.0).unwrap().with_monitoring(Monitoring::Grid);
        let e = estimate_smallball(&model, &ctx, &q, 50_000, &RngStream::new(1, 1)).unwrap();
        assert!(e.ci_low > ORACLE_1_1, "{}", e.p_hat);
    }

    #[test]
    fn query_validation() {
        let (model, ctx) = brownian_ctx(8);
        let g = ctx.tail_grid();
        assert!(matches!(SmallBallQuery::new(0, Path::constant(g, 0.0).unwrap(), 0.0), Err(Error::BadQuery(_))));
        assert!(matches!(SmallBallQuery::new(0, Path::constant(g, 0.1).unwrap(), 1.0), Err(Error::BadQuery(_))));
        let q = SmallBallQuery::new(1, Path::constant(g, 0.0).unwrap(), 1.0).unwrap();
        assert!(matches!(estimate_smallball(&model, &ctx, &q, 10, &RngStream::new(0, 0)), Err(Error::BadQuery(_))));
    }

    #[test]
    fn doleans_positivity_zero() {
        let g = TimeGrid::new(0.0, 1.0, 64).unwrap();
        let spec = ModelSpec::new(ModelKind::DoleansCe);
        let model = Model::new(spec.clone(), g).unwrap();
        let ctx = model.simulate(&mut RngStream::new(5, 0)).unwrap().context_at(0).unwrap();
        assert_eq!(ctx.restart_value(), 1.0);
        let f = Path::from_fn(ctx.tail_grid(), |t| -2.0 * t).unwrap();
        let q = SmallBallQuery::new(0, f, 0.5).unwrap();
        assert_eq!(detect_analytic_zero(&spec, &ctx, &q), Some(ZeroReason::Positivity));
        let e = estimate_smallball(&model, &ctx, &q, 10_000, &RngStream::new(5, 1)).unwrap();
        assert_eq!(e.hits, 0);
        assert_eq!(e.classification, crate::stats::Classification::AnalyticZero);
    }

    #[test]
    fn bridge_endpoint_zero() {
        let g = TimeGrid::new(0.0, 1.0, 64).unwrap();
        let spec = ModelSpec::new(ModelKind::BridgeCe);
        let model = Model::new(spec.clone(), g).unwrap();
        let ctx = model.simulate(&mut RngStream::new(8, 0)).unwrap().context_at(16).unwrap();
        let gap = ctx.terminal().unwrap() - ctx.restart_value();
        let tail = ctx.tail_grid();
        let t0 = tail.t_start();
        let span = tail.span();
        let miss = Path::from_fn(tail, |t| (gap + 0.6) * (t - t0) / span).unwrap();
        let q = SmallBallQuery::new(16, miss, 0.5).unwrap();
        assert_eq!(detect_analytic_zero(&spec, &ctx, &q), Some(ZeroReason::EndpointPin));
        let e = estimate_smallball(&model, &ctx, &q, 5_000, &RngStream::new(8, 1)).unwrap();
        assert_eq!(e.hits, 0);
        let hit = Path::from_fn(tail, |t| gap * (t - t0) / span).unwrap();
        let q = SmallBallQuery::new(16, hit, 0.5).unwrap();
        assert_eq!(detect_analytic_zero(&spec, &ctx, &q), None);
        assert!(estimate_smallball(&model, &ctx, &q, 5_000, &RngStream::new(8, 1)).unwrap().hits > 0);
    }

    #[test]
    fn brownian_never_analytic_zero() {
        let (_, ctx) = brownian_ctx(8);
        let f = Path::from_fn(ctx.tail_grid(), |t| -100.0 * t).unwrap();
        let q = SmallBallQuery::new(0, f, 0.01).unwrap();
        assert_eq!(detect_analytic_zero(&ModelSpec::brownian(), &ctx, &q), None);
    }

    #[test]
    fn time_change_identity_clock_matches_oracle() {
        let g = TimeGrid::new(0.0, 1.0, 512).unwrap();
        let k = Path::constant(g, 1.0).unwrap();
        let f = Path::constant(g, 0.0).unwrap();
        let e = timechanged_smallball(&k, &f, 1.0, 100_000, &RngStream::new(6, 0)).unwrap();
        assert!(e.ci_low <= ORACLE_1_1 && ORACLE_1_1 <= e.ci_high, "{e:?}");
        let flat = Path::constant(g, 0.0).unwrap();
        assert_eq!(timechanged_smallball(&flat, &f, 1.0, 10, &RngStream::new(6, 0)), Err(Error::DegenerateClock));
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let (model, ctx) = brownian_ctx(64);
        let tubes = [Tube { target: vec![0.0; 65], epsilon: 0.8 }];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                count_hits(
                    &model,
                    &ctx,
                    &tubes,
                    Conditioning::FixedDrivers,
                    Monitoring::BrownianBridge,
                    4000,
                    &RngStream::new(1, 2),
                )
            })
        };
        assert_eq!(run(1), run(4));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn hits_monotone_in_epsilon(seed in any::<u64>(), e1 in 0.1f64..1.5, extra in 0.0f64..1.0, slope in -1.0f64..1.0) {
            let (model, ctx) = brownian_ctx(32);
            let target: Vec<f64> = ctx.tail_grid().nodes().iter().map(|t| slope * t).collect();
            let tubes = [
                Tube { target: target.clone(), epsilon: e1 },
                Tube { target, epsilon: e1 + extra },
            ];
            let rng = RngStream::new(seed, 0);
            let mut buf = Continuation::default();
            for r in 0..200 {
                let mut s = rng.replication(r);
                model.continue_into(&ctx, Conditioning::FixedDrivers, &mut s, &mut buf);
                let u = s.uniform();
                let var = Some(buf.cell_var.as_slice());
                let small = is_hit(&buf.values, var, &tubes[0].target, e1, u);
                let large = is_hit(&buf.values, var, &tubes[1].target, e1 + extra, u);
                prop_assert!(!small || large);
            }
        }

        #[test]
        fn target_shift_equivariance(seed in any::<u64>(), eps in 0.2f64..1.5, slope in -1.0f64..1.0, curve in -1.0f64..1.0) {
            let (model, ctx) = brownian_ctx(32);
            let target: Vec<f64> = ctx.tail_grid().nodes().iter().map(|t| slope * t + curve * t * t).collect();
            let zero = vec![0.0; target.len()];
            let rng = RngStream::new(seed, 1);
            let mut buf = Continuation::default();
            for r in 0..200 {
                let mut s = rng.replication(r);
                model.continue_into(&ctx, Conditioning::FixedDrivers, &mut s, &mut buf);
                let u = s.uniform();
                let var = Some(buf.cell_var.as_slice());
                let shifted: Vec<f64> = buf.values.iter().zip(&target).map(|(z, f)| z - f).collect();
                prop_assert_eq!(
                    is_hit(&buf.values, var, &target, eps, u),
                    is_hit(&shifted, var, &zero, eps, u)
                );
            }
        }
    }
}
