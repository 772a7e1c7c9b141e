use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cfs_core::models::{Model, ModelSpec, ModelTag};
use cfs_core::rng::{stream_key, RngStream};
use cfs_core::smallball::{estimate_smallball, SmallBallQuery};
use cfs_core::suite::{
    build_targets, counterexample_models, default_models, render_report, run_battery, AmplitudeRule, BatteryReport,
    ModelReport, QueryResult, QueryTemplate, ReportFormat, TargetStyle, Verdict,
};

use crate::config::{
    model_keys, model_spec, model_tag, RawConfig, RunConfig, BATTERY_KEYS, COMMON_KEYS, SMALLBALL_KEYS,
};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

const CONTEXT_STREAM: u64 = 0;
const ESTIMATE_STREAM: u64 = 1;

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: BatteryReport,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    /// Human-readable summary for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for m in &self.report.models {
            let positive = m.queries.iter().filter(|q| q.estimate.hits > 0).count();
            let _ = writeln!(s, "{:<40} {:<18} {positive}/{} queries with hits", m.label, m.verdict, m.queries.len());
        }
        for f in &self.files {
            let _ = writeln!(s, "wrote {}", f.display());
        }
        s
    }
}

/// Catalog of model tags, alphabetical.
pub fn cmd_models() -> String {
    let mut tags = ModelTag::ALL.to_vec();
    tags.sort_by_key(|t| t.as_str());
    let mut out = String::new();
    for t in tags {
        let _ = writeln!(out, "{:<20} {}", t.as_str(), t.description());
        let _ = writeln!(out, "{:<20} keys: {}", "", t.parameters());
    }
    out
}

fn allowed(extra: &[&'static str], tag: Option<ModelTag>) -> Vec<&'static str> {
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend_from_slice(extra);
    if let Some(t) = tag {
        keys.extend_from_slice(model_keys(t));
    }
    keys
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn write_report(dir: &Path, stem: &str, report: &BatteryReport, format: ReportFormat) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    std::fs::write(&path, render_report(report, format))
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn file_stem(models: &[ModelSpec], command: &str, seed: u64) -> String {
    let model = match models {
        [one] => one.tag().as_str(),
        _ => "MULTI",
    };
    format!("{model}_{command}_{seed}")
}

/// Estimates one tube probability and writes a one-row report.
pub fn cmd_smallball(raw: &RawConfig) -> Result<Outcome> {
    let tag = model_tag(raw)?.ok_or_else(|| CliError::Config("missing required key `model`".into()))?;
    raw.check_known(&allowed(SMALLBALL_KEYS, Some(tag)))?;
    let run = RunConfig::from_raw(raw)?;
    let spec = model_spec(raw, tag)?;
    let t_frac: f64 = raw.parsed_or("t_frac", 0.0)?;
    if !(0.0..1.0).contains(&t_frac) {
        return Err(CliError::Config(format!("key `t_frac` must lie in [0, 1), got {t_frac}")));
    }
    let epsilon: f64 = raw.parsed_req("epsilon")?;
    let style = match raw.get("target") {
        None => TargetStyle::Flat,
        Some(s) => TargetStyle::parse(s).ok_or_else(|| {
            CliError::Config(format!("key `target`: expected flat, ramp-up, ramp-down, zigzag or spike, got {s:?}"))
        })?,
    };
    let amplitude: f64 = raw.parsed_or("amplitude", 1.0)?;
    let n_segments: usize = raw.parsed_or("n_segments", 2)?;

    let started = Instant::now();
    let grid = run.grid;
    let t_index = grid.index_of_fraction(t_frac).min(grid.n_steps() - 1);
    let model = Model::new(spec.clone(), grid)?;
    let stream = |purpose| RngStream::new(run.seed, stream_key(&[t_index as u64, purpose]));
    let ctx = model.simulate(&mut stream(CONTEXT_STREAM))?.context_at(t_index)?;
    let family = build_targets(&ctx.tail_grid(), amplitude, n_segments)?;
    let target = family
        .members
        .into_iter()
        .find(|m| m.style == style && m.amplitude == amplitude)
        .expect("family holds every style at full amplitude");
    let query = SmallBallQuery::new(t_index, target.path, epsilon)?
        .with_conditioning(run.conditioning)
        .with_monitoring(run.monitoring);
    let estimate =
        with_workers(run.workers, || estimate_smallball(&model, &ctx, &query, run.reps, &stream(ESTIMATE_STREAM)))??;

    let result = QueryResult { t_frac, t_index, style, amplitude, epsilon, estimate };
    let report = BatteryReport {
        seed: run.seed,
        reps: run.reps,
        t_end: grid.t_end(),
        n_steps: grid.n_steps(),
        template: QueryTemplate {
            t_fracs: vec![t_frac],
            eps_factors: vec![epsilon / amplitude],
            amplitude: AmplitudeRule::Fixed(amplitude),
            n_segments,
            conditioning: run.conditioning,
            monitoring: run.monitoring,
        },
        models: vec![ModelReport {
            label: spec.label(),
            tag,
            verdict: Verdict::from_estimates([&estimate]),
            queries: vec![result],
        }],
        replications: run.reps,
        wall_clock: started.elapsed(),
    };
    let stem = file_stem(std::slice::from_ref(&spec), "smallball", run.seed);
    let files = vec![write_report(&run.out, &stem, &report, run.format)?];
    Ok(Outcome { report, files })
}

/// Runs the battery and writes CSV and JSON reports, plus PLOTDATA when
/// that format is selected.
pub fn cmd_battery(raw: &RawConfig) -> Result<Outcome> {
    let tag = model_tag(raw)?;
    raw.check_known(&allowed(BATTERY_KEYS, tag))?;
    let run = RunConfig::from_raw(raw)?;
    let (mut models, mut template) = match (raw.get("preset"), tag) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either `preset` or `model`, not both".into())),
        (None, None) => return Err(CliError::Config("missing required key `model` (or `preset`)".into())),
        (None, Some(tag)) => (vec![model_spec(raw, tag)?], QueryTemplate::default()),
        (Some("default"), None) => (default_models(), QueryTemplate::default()),
        (Some("counterexamples"), None) => (counterexample_models(), QueryTemplate::counterexamples()),
        (Some(p), None) => {
            return Err(CliError::Config(format!("key `preset`: expected default or counterexamples, got {p:?}")))
        }
    };
    if tag.is_none() {
        if raw.contains("name") {
            return Err(CliError::Config("key `name` needs a single `model`".into()));
        }
        if let Some(v) = raw.get("log_space") {
            let log_space = matches!(v, "true" | "yes" | "1");
            if !log_space && !matches!(v, "false" | "no" | "0") {
                return Err(CliError::Config(format!("key `log_space`: expected true or false, got {v:?}")));
            }
            for m in &mut models {
                m.log_space = log_space;
            }
        }
    }
    if let Some(t) = raw.list("t_fracs")? {
        template.t_fracs = t;
    }
    if let Some(e) = raw.list("eps_factors")? {
        template.eps_factors = e;
    }
    if let Some(a) = raw.get("amplitude") {
        template.amplitude = AmplitudeRule::parse(a).ok_or_else(|| {
            CliError::Config(format!("key `amplitude`: expected pilot, pilot:<reps> or fixed:<a>, got {a:?}"))
        })?;
    }
    template.n_segments = raw.parsed_or("n_segments", template.n_segments)?;
    if raw.contains("conditioning") {
        template.conditioning = run.conditioning;
    }
    if raw.contains("monitoring") {
        template.monitoring = run.monitoring;
    }

    let report = with_workers(run.workers, || run_battery(&models, run.grid, &template, run.reps, run.seed))??;
    let stem = file_stem(&models, "battery", run.seed);
    let mut files = Vec::new();
    for format in [ReportFormat::Csv, ReportFormat::Json] {
        files.push(write_report(&run.out, &stem, &report, format)?);
    }
    if run.format == ReportFormat::Plotdata {
        files.push(write_report(&run.out, &stem, &report, ReportFormat::Plotdata)?);
    }
    Ok(Outcome { report, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn models_listing_is_alphabetical_and_complete() {
        let text = cmd_models();
        let tags: Vec<&str> =
            text.lines().filter(|l| !l.starts_with(' ')).map(|l| l.split_whitespace().next().unwrap()).collect();
        assert_eq!(tags.len(), 10);
        let mut sorted = tags.clone();
        sorted.sort();
        assert_eq!(tags, sorted);
    }

    #[test]
    fn file_names() {
        let one = [ModelSpec::brownian()];
        assert_eq!(file_stem(&one, "smallball", 7), "MIXED_FBM_smallball_7");
        assert_eq!(file_stem(&counterexample_models(), "battery", 7), "MULTI_battery_7");
    }
}
