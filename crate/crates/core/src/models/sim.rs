use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gaussian::{fou_from_fbm, gen_brownian, FbmFactor, FbmSpec};
use crate::grid::{Path, TimeGrid};
use crate::integrate::{doleans_exp, ito_integral};
use crate::jumps::{bns_forward, gen_bns_vol};
use crate::models::spec::{Integrand, ModelKind, ModelSpec, ModelTag, Profile, VolDriver};
use crate::rng::RngStream;

/// What a continuation holds fixed from the realized history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Conditioning {
    /// Condition on the whole path of the drivers that are independent of
    /// `W` (fBm, variance, regime, integrand); only `W` is redrawn after `t̲`.
    #[default]
    FixedDrivers,
    /// Condition on the drivers up to `t̲` only; their futures are redrawn
    /// from the conditional law (Markov restart or conditional Gaussian).
    RedrawDrivers,
}

impl Conditioning {
    pub fn as_str(&self) -> &'static str {
        match self {
            Conditioning::FixedDrivers => "fixed",
            Conditioning::RedrawDrivers => "redraw",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed" => Some(Conditioning::FixedDrivers),
            "redraw" => Some(Conditioning::RedrawDrivers),
            _ => None,
        }
    }
}

/// One simulated path of a model together with every driver that produced it.
#[derive(Debug, Clone)]
pub struct Realization {
    tag: ModelTag,
    grid: TimeGrid<f64>,
    exp_output: bool,
    // simulated coordinate: Z itself, or log Z when `exp_output`
    x: Vec<f64>,
    z: Path<f64>,
    w: Vec<f64>,
    b: Option<Vec<f64>>,
    vol: Option<Vec<f64>>,
    // affine plan x_{i+1} = x_i + h_incr_i + k_i ΔW_i (empty when the model has none)
    k: Vec<f64>,
    h_incr: Vec<f64>,
    fbm: Option<Vec<f64>>,
    fbm_normals: Option<Vec<f64>>,
    states: Option<Vec<usize>>,
    terminal: Option<f64>,
}

impl Realization {
    pub fn tag(&self) -> ModelTag {
        self.tag
    }

    pub fn grid(&self) -> &TimeGrid<f64> {
        &self.grid
    }

    /// The observed path.
    pub fn z(&self) -> &Path<f64> {
        &self.z
    }

    /// The simulated coordinate: `log Z` for exponential outputs, else `Z`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// The Brownian motion driving the diffusion part.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// Second Brownian motion (variance driver), or the reference bridge for
    /// `BRIDGE_CE`.
    pub fn b(&self) -> Option<&[f64]> {
        self.b.as_deref()
    }

    /// Variance or volatility state: Heston/BNS variance, fOU level, regime σ.
    pub fn vol(&self) -> Option<&[f64]> {
        self.vol.as_deref()
    }

    /// Diffusion coefficient of the simulated coordinate per cell, when the
    /// model is of the form `H + ∫k dW` with `(H, k)` independent of `W`.
    pub fn integrand(&self) -> Option<&[f64]> {
        (!self.k.is_empty()).then_some(self.k.as_slice())
    }

    pub fn fbm(&self) -> Option<&[f64]> {
        self.fbm.as_deref()
    }

    pub fn states(&self) -> Option<&[usize]> {
        self.states.as_deref()
    }

    /// Terminal value known to the enlarged filtration (`BRIDGE_CE`).
    pub fn terminal(&self) -> Option<f64> {
        self.terminal
    }

    /// Context at node `index`, which must leave at least one step.
    pub fn context_at(self: &Arc<Self>, index: usize) -> Result<ConditioningContext> {
        if index >= self.grid.n_steps() {
            return Err(Error::IncompatibleContext(format!(
                "restart node {index} leaves no step on a grid of {} steps",
                self.grid.n_steps()
            )));
        }
        Ok(ConditioningContext { real: Arc::clone(self), index })
    }
}

/// Realized history of every driver up to the restart node `t̲`. Immutable and
/// cheap to clone; shared by all continuation workers.
#[derive(Debug, Clone)]
pub struct ConditioningContext {
    real: Arc<Realization>,
    index: usize,
}

impl ConditioningContext {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn time(&self) -> f64 {
        self.real.grid.node(self.index)
    }

    pub fn restart_value(&self) -> f64 {
        self.real.z.value(self.index)
    }

    /// Observed path on `[0, t̲]`.
    pub fn history(&self) -> &[f64] {
        &self.real.z.values()[..=self.index]
    }

    pub fn realization(&self) -> &Realization {
        &self.real
    }

    pub fn tag(&self) -> ModelTag {
        self.real.tag
    }

    pub fn terminal(&self) -> Option<f64> {
        self.real.terminal
    }

    /// Grid of the continuation, `[t̲, T]`.
    pub fn tail_grid(&self) -> TimeGrid<f64> {
        self.real.grid.tail(self.index).expect("context index leaves a step")
    }
}

/// Reusable output of one continuation.
#[derive(Debug, Default, Clone)]
pub(crate) struct Continuation {
    pub values: Vec<f64>,
    /// Diffusion variance of the observed path over each cell, when the path
    /// is conditionally Brownian between nodes given its node values.
    pub cell_var: Vec<f64>,
    pub has_var: bool,
    normals: Vec<f64>,
    scratch: Vec<f64>,
}

/// A model compiled against a grid: validated, with its fBm factor cached.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    grid: TimeGrid<f64>,
    factor: Option<Arc<FbmFactor<f64>>>,
    warnings: Vec<String>,
}

impl Model {
    pub fn new(spec: ModelSpec, grid: TimeGrid<f64>) -> Result<Self> {
        spec.validate()?;
        if grid.t_start() != 0.0 {
            return Err(Error::GridNotAtOrigin(grid.t_start()));
        }
        let hurst = match &spec.kind {
            ModelKind::MixedFbm { hurst, fbm_scale } if *fbm_scale != 0.0 => Some(*hurst),
            ModelKind::WienerIntegral { integrand: Integrand::ExpFbm { hurst, .. }, .. } => Some(*hurst),
            ModelKind::ComteRenaultPrice { fou, .. } => Some(fou.hurst),
            _ => None,
        };
        let factor = match hurst {
            Some(h) => Some(Arc::new(FbmFactor::new(&grid, FbmSpec::new(h)?)?)),
            None => None,
        };
        let mut warnings = Vec::new();
        if let ModelKind::SvPrice { vol: VolDriver::Heston { kappa, theta, xi, .. }, .. } = spec.kind {
            if 2.0 * kappa * theta < xi * xi {
                warnings.push(format!(
                    "Feller condition fails (2κθ = {} < ξ² = {}): CIR variance can reach 0; full truncation applies",
                    2.0 * kappa * theta,
                    xi * xi
                ));
            }
        }
        Ok(Self { spec, grid, factor, warnings })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &TimeGrid<f64> {
        &self.grid
    }

    /// Non-fatal diagnostics, such as a violated Feller condition.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn exp_output(&self) -> bool {
        self.spec.positive_output()
    }

    fn fbm_sample(&self, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
        let factor = self.factor.as_ref().expect("fBm factor cached for fBm models");
        let normals: Vec<f64> = (0..factor.dim()).map(|_| rng.normal()).collect();
        let path = factor.sample_from_normals(&normals).into_values();
        (path, normals)
    }

    /// Simulates the model on its grid.
    pub fn simulate(&self, rng: &mut RngStream) -> Result<Arc<Realization>> {
        let grid = self.grid;
        let n = grid.n_steps();
        let dt = grid.dt();
        let nodes = grid.nodes();
        let mut real = Realization {
            tag: self.spec.tag(),
            grid,
            exp_output: self.exp_output(),
            x: Vec::new(),
            z: Path::constant(grid, 0.0)?,
            w: Vec::new(),
            b: None,
            vol: None,
            k: Vec::new(),
            h_incr: Vec::new(),
            fbm: None,
            fbm_normals: None,
            states: None,
            terminal: None,
        };
        match &self.spec.kind {
            ModelKind::MixedFbm { fbm_scale, .. } => {
                let c = *fbm_scale;
                let fbm = if c != 0.0 {
                    let (path, normals) = self.fbm_sample(rng);
                    real.fbm_normals = Some(normals);
                    path
                } else {
                    vec![0.0; n + 1]
                };
                let w = gen_brownian(&grid, rng).into_values();
                real.x = w.iter().zip(&fbm).map(|(wi, bi)| wi + c * bi).collect();
                real.h_incr = fbm.windows(2).map(|p| c * (p[1] - p[0])).collect();
                real.k = vec![1.0; n];
                real.fbm = (c != 0.0).then_some(fbm);
                real.w = w;
            }
            ModelKind::WienerIntegral { drift, integrand } => {
                let k: Vec<f64> = match integrand {
                    Integrand::Deterministic(p) => nodes.iter().map(|&t| p.eval(t)).collect(),
                    Integrand::ExpFbm { vol, .. } => {
                        let (path, normals) = self.fbm_sample(rng);
                        let k = path.iter().map(|b| (vol * b).exp()).collect();
                        real.fbm = Some(path);
                        real.fbm_normals = Some(normals);
                        k
                    }
                };
                let w = gen_brownian(&grid, rng);
                let stoch = ito_integral(&Path::new(grid, k.clone())?, &w)?;
                real.h_incr = nodes[..n].iter().map(|&t| drift.eval(t) * dt).collect();
                let mut h = 0.0;
                real.x = Vec::with_capacity(n + 1);
                for j in 0..=n {
                    real.x.push(h + stoch.value(j));
                    if j < n {
                        h += real.h_incr[j];
                    }
                }
                real.k = k[..n].to_vec();
                real.w = w.into_values();
            }
            ModelKind::SvPrice { p0, mu, rho, vol } => {
                let sdt = dt.sqrt();
                let rho_bar = (1.0 - rho * rho).sqrt();
                let mut b = Vec::with_capacity(n + 1);
                let mut w = Vec::with_capacity(n + 1);
                let mut v_path = Vec::with_capacity(n + 1);
                let (mut bv, mut wv) = (0.0, 0.0);
                b.push(0.0);
                w.push(0.0);
                let mut v = match *vol {
                    VolDriver::Constant { sigma } => sigma * sigma,
                    VolDriver::Heston { v0, .. } => v0,
                };
                v_path.push(v);
                let mut x = p0.ln();
                real.x.push(x);
                for _ in 0..n {
                    let db = sdt * rng.normal();
                    let dw = sdt * rng.normal();
                    let g = v.max(0.0).sqrt();
                    let h = (mu - 0.5 * g * g) * dt + rho * g * db;
                    let k = rho_bar * g;
                    x += h + k * dw;
                    real.h_incr.push(h);
                    real.k.push(k);
                    real.x.push(x);
                    if let VolDriver::Heston { kappa, theta, xi, .. } = *vol {
                        let vp = v.max(0.0);
                        v += kappa * (theta - vp) * dt + xi * vp.sqrt() * db;
                    }
                    v_path.push(v);
                    bv += db;
                    wv += dw;
                    b.push(bv);
                    w.push(wv);
                }
                real.b = Some(b);
                real.w = w;
                real.vol = Some(v_path);
            }
            ModelKind::BnsPrice { p0, mu, bns } => {
                let v = gen_bns_vol(&grid, bns, rng)?.into_values();
                self.affine_log_price(&mut real, *p0, *mu, v.iter().map(|vi| vi.sqrt()), rng);
                real.vol = Some(v);
            }
            ModelKind::ComteRenaultPrice { p0, mu, fou } => {
                let (path, normals) = self.fbm_sample(rng);
                let v = fou_from_fbm(fou, &Path::new(grid, path.clone())?)?.into_values();
                self.affine_log_price(&mut real, *p0, *mu, v.iter().map(|vi| vi.exp()), rng);
                real.vol = Some(v);
                real.fbm = Some(path);
                real.fbm_normals = Some(normals);
            }
            ModelKind::RegimePrice { p0, mu, ctmc } => {
                let states = ctmc.simulate_states(&grid, ctmc.initial, rng);
                let sig: Vec<f64> = states.iter().map(|&s| ctmc.levels[s]).collect();
                self.affine_log_price(&mut real, *p0, *mu, sig.iter().copied(), rng);
                real.vol = Some(sig);
                real.states = Some(states);
            }
            ModelKind::SdePrice { p0, mu, sigma, .. } => {
                let w = gen_brownian(&grid, rng).into_values();
                let mut x = p0.ln();
                let mut running_max = *p0;
                let mut s_path = Vec::with_capacity(n);
                real.x.push(x);
                for i in 0..n {
                    let price = x.exp();
                    let m = mu.ratio(nodes[i], price, running_max);
                    let s = sigma.ratio(nodes[i], price, running_max);
                    x += (m - 0.5 * s * s) * dt + s * (w[i + 1] - w[i]);
                    running_max = running_max.max(x.exp());
                    real.x.push(x);
                    s_path.push(s);
                }
                real.vol = Some(s_path);
                real.w = w;
            }
            ModelKind::DoleansCe => {
                let w = gen_brownian(&grid, rng);
                let z = doleans_exp(&w)?;
                let w = w.into_values();
                real.x = (0..=n).map(|i| w[i] - w[0] - 0.5 * (nodes[i] - nodes[0])).collect();
                real.h_incr = vec![-0.5 * dt; n];
                real.k = vec![1.0; n];
                real.w = w;
                real.z = z;
            }
            ModelKind::BridgeCe => {
                let t_end = grid.t_end();
                let terminal = t_end.sqrt() * rng.normal();
                let w = gen_brownian(&grid, rng).into_values();
                real.x = bridge_quadrature(&nodes, &w, terminal);
                real.b = Some(bridge_reference(&nodes, &w, terminal));
                real.terminal = Some(terminal);
                real.w = w;
            }
            ModelKind::ExpDriftPrice { drift, vol } => {
                let w = gen_brownian(&grid, rng);
                let stoch: Vec<f64> = match vol {
                    Profile::Constant(c) => w.values().iter().map(|wi| c * (wi - w.first())).collect(),
                    _ => ito_integral(&Path::from_fn(grid, |t| vol.eval(t))?, &w)?.into_values(),
                };
                let f: Vec<f64> = nodes.iter().map(|&t| drift.eval(t)).collect();
                real.x = f.iter().zip(&stoch).map(|(a, b)| a + b).collect();
                real.h_incr = f.windows(2).map(|p| p[1] - p[0]).collect();
                real.k = nodes[..n].iter().map(|&t| vol.eval(t)).collect();
                real.w = w.into_values();
            }
        }
        if !matches!(self.spec.kind, ModelKind::DoleansCe) {
            let values =
                if real.exp_output { real.x.iter().map(|x| positive_exp(*x)).collect() } else { real.x.clone() };
            real.z = Path::new(grid, values)?;
        }
        Ok(Arc::new(real))
    }

    /// `log P` with increments `(μ − g²/2)Δ + g ΔW` for a volatility path `g`
    /// independent of `W`.
    fn affine_log_price(
        &self,
        real: &mut Realization,
        p0: f64,
        mu: f64,
        g: impl Iterator<Item = f64>,
        rng: &mut RngStream,
    ) {
        let n = self.grid.n_steps();
        let dt = self.grid.dt();
        let w = gen_brownian(&self.grid, rng).into_values();
        let mut x = p0.ln();
        real.x.push(x);
        for (i, gi) in g.take(n).enumerate() {
            let h = (mu - 0.5 * gi * gi) * dt;
            x += h + gi * (w[i + 1] - w[i]);
            real.h_incr.push(h);
            real.k.push(gi);
            real.x.push(x);
        }
        real.w = w;
    }

    /// Checks that `ctx` came from this model on this grid.
    pub fn check_context(&self, ctx: &ConditioningContext) -> Result<()> {
        if ctx.tag() != self.spec.tag() {
            return Err(Error::IncompatibleContext(format!(
                "context from {} used with {}",
                ctx.tag(),
                self.spec.tag()
            )));
        }
        if ctx.realization().grid != self.grid {
            return Err(Error::IncompatibleContext("context grid differs from the model grid".into()));
        }
        if ctx.realization().exp_output != self.exp_output() {
            return Err(Error::IncompatibleContext("context observed in a different coordinate".into()));
        }
        Ok(())
    }

    /// Draws `Z` on `[t̲, T]` given the history in `ctx`.
    pub fn continue_conditional(
        &self,
        ctx: &ConditioningContext,
        mode: Conditioning,
        rng: &mut RngStream,
    ) -> Result<Path<f64>> {
        self.check_context(ctx)?;
        let mut buf = Continuation::default();
        self.continue_into(ctx, mode, rng, &mut buf);
        Path::new(ctx.tail_grid(), buf.values)
    }

    /// Hot path of [`Model::continue_conditional`]; `ctx` must already be checked.
    pub(crate) fn continue_into(
        &self,
        ctx: &ConditioningContext,
        mode: Conditioning,
        rng: &mut RngStream,
        out: &mut Continuation,
    ) {
        let real = ctx.realization();
        let i0 = ctx.index;
        let n = self.grid.n_steps();
        let dt = self.grid.dt();
        let sdt = dt.sqrt();
        let x0 = real.x[i0];
        out.values.clear();
        out.cell_var.clear();
        out.has_var = false;
        let redraw = mode == Conditioning::RedrawDrivers;
        match &self.spec.kind {
            ModelKind::MixedFbm { fbm_scale, .. } if redraw && *fbm_scale != 0.0 => {
                let c = *fbm_scale;
                self.redraw_fbm(real, i0, rng, out);
                let fbm = &out.scratch;
                let mut w = 0.0;
                out.values.push(x0);
                for j in i0..n {
                    w += sdt * rng.normal();
                    out.values.push(x0 + c * (fbm[j + 1] - fbm[i0]) + w);
                }
            }
            ModelKind::WienerIntegral { drift, integrand: Integrand::ExpFbm { vol, .. } } if redraw => {
                self.redraw_fbm(real, i0, rng, out);
                let mut x = x0;
                out.values.push(x);
                for j in i0..n {
                    let k = (vol * out.scratch[j]).exp();
                    x += drift.eval(self.grid.node(j)) * dt + k * sdt * rng.normal();
                    out.values.push(x);
                    out.cell_var.push(k * k * dt);
                }
                out.has_var = true;
            }
            ModelKind::SvPrice { mu, rho, vol, .. } if redraw => {
                let rho_bar = (1.0 - rho * rho).sqrt();
                let mut v = real.vol.as_ref().expect("SV realization stores its variance")[i0];
                let mut x = x0;
                out.values.push(x);
                for _ in i0..n {
                    let db = sdt * rng.normal();
                    let dw = sdt * rng.normal();
                    let g = v.max(0.0).sqrt();
                    x += (mu - 0.5 * g * g) * dt + rho * g * db + rho_bar * g * dw;
                    out.values.push(x);
                    out.cell_var.push(g * g * dt);
                    if let VolDriver::Heston { kappa, theta, xi, .. } = *vol {
                        let vp = v.max(0.0);
                        v += kappa * (theta - vp) * dt + xi * vp.sqrt() * db;
                    }
                }
                out.has_var = true;
            }
            ModelKind::BnsPrice { mu, bns, .. } if redraw => {
                // at t̲ = 0 nothing is conditioned on, so V(0) is redrawn from
                // the stationary law as well
                let v_start = if i0 == 0 {
                    bns.stationary_start(rng)
                } else {
                    real.vol.as_ref().expect("BNS realization stores its variance")[i0]
                };
                let v = bns_forward(&ctx.tail_grid(), bns, v_start, rng).expect("validated BNS spec").into_values();
                self.log_price_tail(x0, *mu, n - i0, v.iter().map(|vi| vi.sqrt()), rng, out);
            }
            ModelKind::ComteRenaultPrice { mu, fou, .. } if redraw => {
                self.redraw_fbm(real, i0, rng, out);
                let fbm = Path::new(self.grid, std::mem::take(&mut out.scratch)).expect("finite fBm");
                let v = fou_from_fbm(fou, &fbm).expect("validated fOU spec").into_values();
                out.scratch = fbm.into_values();
                self.log_price_tail(x0, *mu, n - i0, v[i0..].iter().map(|vi| vi.exp()), rng, out);
            }
            ModelKind::RegimePrice { mu, ctmc, .. } if redraw => {
                let start = real.states.as_ref().expect("regime realization stores its states")[i0];
                let states = ctmc.simulate_states(&ctx.tail_grid(), start, rng);
                self.log_price_tail(x0, *mu, n - i0, states.iter().map(|&s| ctmc.levels[s]), rng, out);
            }
            ModelKind::SdePrice { mu, sigma, .. } => {
                let mut running_max = real.x[..=i0].iter().fold(f64::NEG_INFINITY, |m, x| m.max(x.exp()));
                let mut x = x0;
                out.values.push(x);
                for j in i0..n {
                    let t = self.grid.node(j);
                    let price = x.exp();
                    let m = mu.ratio(t, price, running_max);
                    let s = sigma.ratio(t, price, running_max);
                    x += (m - 0.5 * s * s) * dt + s * sdt * rng.normal();
                    running_max = running_max.max(x.exp());
                    out.values.push(x);
                    out.cell_var.push(s * s * dt);
                }
                out.has_var = true;
            }
            ModelKind::BridgeCe => {
                let tail = ctx.tail_grid();
                let terminal = real.terminal.expect("bridge realization stores its terminal value");
                crate::gaussian::bridge_into(x0, terminal, &tail, rng, &mut out.values);
                out.cell_var.resize(n - i0, dt);
                out.has_var = true;
            }
            _ => {
                // affine plan: (H, k) fixed, fresh W
                let mut x = x0;
                out.values.push(x);
                for j in i0..n {
                    let k = real.k[j];
                    x += real.h_incr[j] + k * sdt * rng.normal();
                    out.values.push(x);
                    out.cell_var.push(k * k * dt);
                }
                out.has_var = true;
            }
        }
        if real.exp_output {
            for v in out.values.iter_mut() {
                *v = positive_exp(*v);
            }
            out.has_var = false;
        }
        out.values[0] = ctx.restart_value();
    }

    /// Redraws the fBm normals from `i0` on and recomputes the fBm tail into
    /// `out.scratch` (full grid; nodes `≤ i0` unchanged).
    fn redraw_fbm(&self, real: &Realization, i0: usize, rng: &mut RngStream, out: &mut Continuation) {
        let factor = self.factor.as_ref().expect("fBm factor cached for fBm models");
        out.normals.clear();
        out.normals.extend_from_slice(real.fbm_normals.as_ref().expect("fBm normals stored"));
        for z in out.normals[i0..].iter_mut() {
            *z = rng.normal();
        }
        out.scratch.clear();
        out.scratch.extend_from_slice(real.fbm.as_ref().expect("fBm path stored"));
        factor.resample_tail(&out.normals, i0 + 1, &mut out.scratch);
    }

    /// `log P` on `[t̲, T]` from `x0` for a volatility path `g` (node values,
    /// at least one per remaining cell) independent of the fresh `W`.
    fn log_price_tail(
        &self,
        x0: f64,
        mu: f64,
        steps: usize,
        g: impl Iterator<Item = f64>,
        rng: &mut RngStream,
        out: &mut Continuation,
    ) {
        let dt = self.grid.dt();
        let sdt = dt.sqrt();
        let mut x = x0;
        out.values.push(x);
        for gi in g.take(steps) {
            x += (mu - 0.5 * gi * gi) * dt + gi * sdt * rng.normal();
            out.values.push(x);
            out.cell_var.push(gi * gi * dt);
        }
        out.has_var = true;
    }
}

#[inline]
fn positive_exp(x: f64) -> f64 {
    x.exp().max(f64::MIN_POSITIVE)
}

/// `Z = W + ∫₀ᵗ (b − Z_s)/(T − s) ds` with the numerator frozen at the left node
/// and `1/(T − s)` integrated exactly over each cell; the last node is pinned
/// to `b`.
fn bridge_quadrature(nodes: &[f64], w: &[f64], terminal: f64) -> Vec<f64> {
    let n = nodes.len() - 1;
    let t_end = nodes[n];
    let mut z = Vec::with_capacity(n + 1);
    let mut h = 0.0;
    z.push(w[0]);
    for i in 0..n - 1 {
        h += (terminal - z[i]) * ((t_end - nodes[i]) / (t_end - nodes[i + 1])).ln();
        z.push(h + w[i + 1]);
    }
    z.push(terminal);
    z
}

/// Exact solution of the bridge equation driven by `w`:
/// `B_t = (t/T)·b + (T − t)·Σ_{t_i < t} ΔW_i/(T − t_i)`, pinned to `b` at `T`.
pub fn bridge_reference(nodes: &[f64], w: &[f64], terminal: f64) -> Vec<f64> {
    let n = nodes.len() - 1;
    let t_end = nodes[n];
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..n {
        acc += (w[j] - w[j - 1]) / (t_end - nodes[j - 1]);
        out.push(nodes[j] / t_end * terminal + (t_end - nodes[j]) * acc);
    }
    out.push(terminal);
    out
}

/// Simulates `spec` on `grid`.
pub fn simulate(spec: &ModelSpec, grid: &TimeGrid<f64>, rng: &mut RngStream) -> Result<Arc<Realization>> {
    Model::new(spec.clone(), *grid)?.simulate(rng)
}

/// Draws `Z` on `grid_tail = [t̲, T]` given the history in `ctx`.
pub fn continue_conditional(
    spec: &ModelSpec,
    ctx: &ConditioningContext,
    grid_tail: &TimeGrid<f64>,
    mode: Conditioning,
    rng: &mut RngStream,
) -> Result<Path<f64>> {
    if *grid_tail != ctx.tail_grid() {
        return Err(Error::IncompatibleContext(
            "continuation grid must be the context grid restricted to [t̲, T]".into(),
        ));
    }
    Model::new(spec.clone(), *ctx.realization().grid())?.continue_conditional(ctx, mode, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::FouSpec;
    use crate::jumps::{BnsSpec, CtmcSpec, SubordinatorSpec};
    use crate::models::spec::PathCoefficient;
    use crate::stats::{ks_two_sample, mean_var};

    fn unit(n: usize) -> TimeGrid<f64> {
        TimeGrid::new(0.0, 1.0, n).unwrap()
    }

    fn heston() -> ModelSpec {
        ModelSpec::new(ModelKind::SvPrice {
            p0: 1.0,
            mu: 0.0,
            rho: -0.5,
            vol: VolDriver::Heston { kappa: 2.0, theta: 0.04, xi: 0.3, v0: 0.04 },
        })
    }

    fn zoo() -> Vec<ModelSpec> {
        vec![
            ModelSpec::new(ModelKind::MixedFbm { hurst: 0.25, fbm_scale: 1.0 }),
            ModelSpec::new(ModelKind::WienerIntegral {
                drift: Profile::Constant(0.1),
                integrand: Integrand::ExpFbm { hurst: 0.7, vol: 0.5 },
            }),
            heston(),
            ModelSpec::new(ModelKind::BnsPrice {
                p0: 1.0,
                mu: 0.0,
                bns: BnsSpec {
                    subordinator: SubordinatorSpec::CompoundPoissonExp { jump_rate: 5.0, size_rate: 10.0 },
                    decay: 1.0,
                    window: None,
                },
            }),
            ModelSpec::new(ModelKind::ComteRenaultPrice {
                p0: 1.0,
                mu: 0.0,
                fou: FouSpec { hurst: 0.6, mean_reversion: 1.0, vol: 0.3, initial: -1.6 },
            }),
            ModelSpec::new(ModelKind::RegimePrice {
                p0: 1.0,
                mu: 0.0,
                ctmc: CtmcSpec {
                    generator: vec![vec![-2.0, 2.0], vec![3.0, -3.0]],
                    levels: vec![0.1, 0.4],
                    initial: 0,
                },
            }),
            ModelSpec::new(ModelKind::SdePrice {
                p0: 1.0,
                mu: PathCoefficient::Constant(0.05),
                sigma: PathCoefficient::RunningMaxRatio { base: 0.2, slope: 0.2 },
                mu_bar: 0.05,
                sigma_bar: 5.0,
            }),
            ModelSpec::new(ModelKind::DoleansCe),
            ModelSpec::new(ModelKind::BridgeCe),
            ModelSpec::new(ModelKind::ExpDriftPrice {
                drift: Profile::Affine { intercept: 0.0, slope: 0.1 },
                vol: Profile::Sine { base: 1.0, amplitude: 0.5, frequency: 1.0 },
            }),
        ]
    }

    #[test]
    fn gbm_log_price_mean() {
        // log P(T) ~ N(log p0 + (μ − σ²/2)T, σ²T)
        let spec =
            ModelSpec::new(ModelKind::SvPrice { p0: 2.0, mu: 0.1, rho: 0.0, vol: VolDriver::Constant { sigma: 0.3 } });
        let model = Model::new(spec, unit(16)).unwrap();
        let base = RngStream::new(12, 0);
        let n = 100_000;
        let ends: Vec<f64> = (0..n).map(|r| model.simulate(&mut base.replication(r)).unwrap().z().last()).collect();
        let (mean, _) = mean_var(&ends);
        let expected = 2.0f64.ln() + (0.1 - 0.045);
        assert!((mean - expected).abs() < 4.0 * 0.3 / (n as f64).sqrt(), "{mean} vs {expected}");
    }

    #[test]
    fn doleans_and_natural_prices_are_positive() {
        for spec in [ModelSpec::new(ModelKind::DoleansCe), heston().natural_space()] {
            let model = Model::new(spec, unit(64)).unwrap();
            let base = RngStream::new(3, 0);
            for r in 0..200 {
                let real = model.simulate(&mut base.replication(r)).unwrap();
                assert!(real.z().values().iter().all(|&v| v > 0.0));
                let ctx = real.context_at(32).unwrap();
                let tail = model
                    .continue_conditional(&ctx, Conditioning::RedrawDrivers, &mut base.replication(r + 1000))
                    .unwrap();
                assert!(tail.values().iter().all(|&v| v > 0.0));
            }
        }
    }

    #[test]
    fn doleans_matches_its_integrator() {
        let g = unit(32);
        let real = simulate(&ModelSpec::new(ModelKind::DoleansCe), &g, &mut RngStream::new(5, 5)).unwrap();
        let w = Path::new(g, real.w().to_vec()).unwrap();
        assert_eq!(real.z(), &doleans_exp(&w).unwrap());
    }

    #[test]
    fn bridge_quadrature_converges_to_the_bridge() {
        // same Brownian paths refined: mean sup |Z − B| over 200 paths shrinks
        // at every Δ → Δ/4
        let fine = unit(4096);
        let nodes_fine = fine.nodes();
        let mut totals = [0.0; 3];
        for seed in 0..200 {
            let mut rng = RngStream::new(77, seed);
            let b = rng.normal();
            let w_fine = gen_brownian(&fine, &mut rng).into_values();
            for (slot, stride) in [64, 16, 4].into_iter().enumerate() {
                let nodes: Vec<f64> = nodes_fine.iter().copied().step_by(stride).collect();
                let w: Vec<f64> = w_fine.iter().copied().step_by(stride).collect();
                let z = bridge_quadrature(&nodes, &w, b);
                let r = bridge_reference(&nodes, &w, b);
                totals[slot] += z.iter().zip(&r).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max) / 200.0;
            }
        }
        assert!(totals[1] < totals[0] && totals[2] < totals[1], "{totals:?}");
        assert!(totals[2] < 0.05, "{totals:?}");
    }

    #[test]
    fn bridge_continuation_pins_terminal() {
        let model = Model::new(ModelSpec::new(ModelKind::BridgeCe), unit(64)).unwrap();
        for seed in 0..50 {
            let real = model.simulate(&mut RngStream::new(seed, 0)).unwrap();
            assert_eq!(real.z().last(), real.terminal().unwrap());
            let ctx = real.context_at(20).unwrap();
            let tail =
                model.continue_conditional(&ctx, Conditioning::FixedDrivers, &mut RngStream::new(seed, 1)).unwrap();
            assert_eq!(tail.last() - ctx.restart_value(), real.terminal().unwrap() - ctx.restart_value());
            assert_eq!(tail.first(), ctx.restart_value());
        }
    }

    #[test]
    fn restart_at_origin_has_the_unconditional_law() {
        let g = unit(64);
        for spec in zoo() {
            let model = Model::new(spec.clone(), g).unwrap();
            let base = RngStream::new(101, 0);
            let n = 10_000;
            let direct: Vec<f64> =
                (0..n).map(|r| model.simulate(&mut base.replication(r)).unwrap().z().last()).collect();
            // one context draw at t̲ = 0, redraw every driver
            let ctx = model.simulate(&mut RngStream::new(102, 0)).unwrap().context_at(0).unwrap();
            let cont_base = RngStream::new(103, 0);
            let cont: Vec<f64> = (0..n)
                .map(|r| {
                    model
                        .continue_conditional(&ctx, Conditioning::RedrawDrivers, &mut cont_base.replication(r))
                        .unwrap()
                        .last()
                })
                .collect();
            let p = ks_two_sample(&direct, &cont).1;
            if spec.tag() == ModelTag::BridgeCe {
                // the terminal value is part of the context
                assert!(cont.iter().all(|&v| v == ctx.terminal().unwrap()));
            } else {
                assert!(p > 1e-3, "{}: KS p = {p}", spec.label());
            }
        }
    }

    #[test]
    fn fixed_fbm_tail_variance_is_brownian() {
        // with the fBm path held fixed, Z(T) − Z(t̲) − c·ΔB^h = W(T) − W(t̲)
        let g = unit(64);
        let model = Model::new(ModelSpec::new(ModelKind::MixedFbm { hurst: 0.75, fbm_scale: 1.0 }), g).unwrap();
        let real = model.simulate(&mut RngStream::new(9, 9)).unwrap();
        let ctx = real.context_at(32).unwrap();
        let base = RngStream::new(10, 0);
        let n = 100_000;
        let incr: Vec<f64> = (0..n)
            .map(|r| {
                model.continue_conditional(&ctx, Conditioning::FixedDrivers, &mut base.replication(r)).unwrap().last()
                    - ctx.restart_value()
            })
            .collect();
        let (mean, var) = mean_var(&incr);
        let fbm = real.fbm().unwrap();
        assert!((mean - (fbm[64] - fbm[32])).abs() < 4.0 * (0.5 / n as f64).sqrt());
        assert!((var - 0.5).abs() < 4.0 * 0.5 * (2.0 / n as f64).sqrt(), "{var}");
        // redrawing the fBm tail adds its conditional variance
        let redraw: Vec<f64> = (0..20_000)
            .map(|r| {
                model.continue_conditional(&ctx, Conditioning::RedrawDrivers, &mut base.replication(r)).unwrap().last()
            })
            .collect();
        assert!(mean_var(&redraw).1 > 0.55);
    }

    #[test]
    fn exp_drift_unit_case_is_the_driving_path() {
        let g = unit(128);
        let spec =
            ModelSpec::new(ModelKind::ExpDriftPrice { drift: Profile::Constant(0.0), vol: Profile::Constant(1.0) });
        for seed in 0..20 {
            let real = simulate(&spec, &g, &mut RngStream::new(seed, 0)).unwrap();
            for (x, w) in real.z().values().iter().zip(real.w()) {
                assert_eq!(x - w, 0.0);
            }
        }
    }

    #[test]
    fn bns_volatility_stays_positive() {
        let g = unit(128);
        let spec = &zoo()[3];
        let model = Model::new(spec.clone(), g).unwrap();
        for r in 0..200 {
            let real = model.simulate(&mut RngStream::new(r, 0)).unwrap();
            let v = real.vol().unwrap();
            assert!(v.iter().all(|&x| x.sqrt() > 0.0));
            assert!(real.integrand().unwrap().iter().all(|&k| k > 0.0));
        }
    }

    #[test]
    fn incompatible_contexts_are_rejected() {
        let g = unit(32);
        let a = Model::new(ModelSpec::new(ModelKind::DoleansCe), g).unwrap();
        let b = Model::new(ModelSpec::brownian(), g).unwrap();
        let ctx = a.simulate(&mut RngStream::new(1, 1)).unwrap().context_at(3).unwrap();
        assert!(matches!(
            b.continue_conditional(&ctx, Conditioning::FixedDrivers, &mut RngStream::new(1, 2)),
            Err(Error::IncompatibleContext(_))
        ));
        let wrong_tail = unit(32).tail(4).unwrap();
        assert!(continue_conditional(
            a.spec(),
            &ctx,
            &wrong_tail,
            Conditioning::FixedDrivers,
            &mut RngStream::new(1, 2)
        )
        .is_err());
        assert!(a.simulate(&mut RngStream::new(1, 1)).unwrap().context_at(32).is_err());
    }

    #[test]
    fn feller_warning() {
        let spec = ModelSpec::new(ModelKind::SvPrice {
            p0: 1.0,
            mu: 0.0,
            rho: 0.0,
            vol: VolDriver::Heston { kappa: 1.0, theta: 0.01, xi: 1.0, v0: 0.01 },
        });
        let m = Model::new(spec, unit(8)).unwrap();
        assert_eq!(m.warnings().len(), 1);
        assert!(Model::new(heston(), unit(8)).unwrap().warnings().is_empty());
    }

    #[test]
    fn continuation_matches_simulate_in_fixed_mode_structure() {
        // every model's continuation starts at Z(t̲) and has the tail length
        let g = unit(64);
        for spec in zoo() {
            let model = Model::new(spec.clone(), g).unwrap();
            let real = model.simulate(&mut RngStream::new(4, 4)).unwrap();
            let ctx = real.context_at(40).unwrap();
            for mode in [Conditioning::FixedDrivers, Conditioning::RedrawDrivers] {
                let tail = model.continue_conditional(&ctx, mode, &mut RngStream::new(4, 5)).unwrap();
                assert_eq!(tail.grid(), &g.tail(40).unwrap());
                assert_eq!(tail.first(), real.z().value(40), "{}", spec.label());
            }
        }
    }
}
