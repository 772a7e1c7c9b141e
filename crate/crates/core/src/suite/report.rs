use std::fmt::Write as _;

use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::models::{Conditioning, ModelTag};
use crate::smallball::Monitoring;
use crate::stats::{Classification, Estimate, ZeroReason};
use crate::suite::battery::{AmplitudeRule, BatteryReport, ModelReport, QueryResult, QueryTemplate, Verdict};
use crate::suite::targets::TargetStyle;

/// Column order of the CSV report.
pub const CSV_HEADER: &str = "model,t_frac,style,amplitude,epsilon,reps,hits,p_hat,ci_low,ci_high,classification,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportFormat {
    Csv,
    Json,
    Plotdata,
}

impl ReportFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Plotdata => "plotdata",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Plotdata].into_iter().find(|f| f.as_str() == s)
    }

    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Plotdata => "dat",
        }
    }
}

/// Decimal with 17 significant digits; parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_report(r: &BatteryReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => render_csv(r),
        ReportFormat::Json => render_json(r),
        ReportFormat::Plotdata => render_plotdata(r),
    }
    .into_bytes()
}

fn render_csv(r: &BatteryReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (m, q) in r.queries() {
        let e = &q.estimate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&m.label),
            fmt_f64(q.t_frac),
            q.style,
            fmt_f64(q.amplitude),
            fmt_f64(q.epsilon),
            e.reps,
            e.hits,
            fmt_f64(e.p_hat),
            fmt_f64(e.ci_low),
            fmt_f64(e.ci_high),
            e.classification.as_str(),
            r.seed
        );
    }
    out
}

fn render_plotdata(r: &BatteryReport) -> String {
    let mut out = String::new();
    for (i, m) in r.models.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# model {} {} seed {}", m.label, m.verdict, r.seed);
        out.push_str("# t_frac style amplitude epsilon p_hat ci_low ci_high hits reps classification\n");
        for q in &m.queries {
            let e = &q.estimate;
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {} {} {}",
                fmt_f64(q.t_frac),
                q.style,
                fmt_f64(q.amplitude),
                fmt_f64(q.epsilon),
                fmt_f64(e.p_hat),
                fmt_f64(e.ci_low),
                fmt_f64(e.ci_high),
                e.hits,
                e.reps,
                e.classification.as_str()
            );
        }
    }
    out
}

mod sig17 {
    use super::*;

    pub(super) fn raw(x: f64) -> std::result::Result<Box<RawValue>, String> {
        if !x.is_finite() {
            return Err(format!("cannot write non-finite {x}"));
        }
        RawValue::from_string(fmt_f64(x)).map_err(|e| e.to_string())
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        raw(*x).map_err(S::Error::custom)?.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        f64::deserialize(d)
    }
}

mod sig17_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let raws = xs.iter().map(|&x| sig17::raw(x)).collect::<std::result::Result<Vec<_>, _>>();
        s.collect_seq(raws.map_err(S::Error::custom)?)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        Vec::<f64>::deserialize(d)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportJson {
    seed: u64,
    reps: u64,
    #[serde(with = "sig17")]
    t_end: f64,
    n_steps: usize,
    replications: u64,
    template: TemplateJson,
    models: Vec<ModelJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateJson {
    #[serde(with = "sig17_vec")]
    t_fracs: Vec<f64>,
    #[serde(with = "sig17_vec")]
    eps_factors: Vec<f64>,
    amplitude: String,
    n_segments: usize,
    conditioning: String,
    monitoring: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    model: String,
    tag: String,
    verdict: String,
    queries: Vec<QueryJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryJson {
    #[serde(with = "sig17")]
    t_frac: f64,
    t_index: usize,
    style: String,
    #[serde(with = "sig17")]
    amplitude: f64,
    #[serde(with = "sig17")]
    epsilon: f64,
    reps: u64,
    hits: u64,
    #[serde(with = "sig17")]
    p_hat: f64,
    #[serde(with = "sig17")]
    ci_low: f64,
    #[serde(with = "sig17")]
    ci_high: f64,
    classification: Classification,
    reason: Option<ZeroReason>,
}

fn render_json(r: &BatteryReport) -> String {
    let t = &r.template;
    let doc = ReportJson {
        seed: r.seed,
        reps: r.reps,
        t_end: r.t_end,
        n_steps: r.n_steps,
        replications: r.replications,
        template: TemplateJson {
            t_fracs: t.t_fracs.clone(),
            eps_factors: t.eps_factors.clone(),
            amplitude: t.amplitude.to_string(),
            n_segments: t.n_segments,
            conditioning: t.conditioning.as_str().into(),
            monitoring: t.monitoring.as_str().into(),
        },
        models: r
            .models
            .iter()
            .map(|m| ModelJson {
                model: m.label.clone(),
                tag: m.tag.as_str().into(),
                verdict: m.verdict.as_str().into(),
                queries: m
                    .queries
                    .iter()
                    .map(|q| QueryJson {
                        t_frac: q.t_frac,
                        t_index: q.t_index,
                        style: q.style.as_str().into(),
                        amplitude: q.amplitude,
                        epsilon: q.epsilon,
                        reps: q.estimate.reps,
                        hits: q.estimate.hits,
                        p_hat: q.estimate.p_hat,
                        ci_low: q.estimate.ci_low,
                        ci_high: q.estimate.ci_high,
                        classification: q.estimate.classification,
                        reason: q.estimate.reason,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report values are finite");
    s.push('\n');
    s
}

fn field<T>(value: Option<T>, what: &str, raw: &str) -> Result<T> {
    value.ok_or_else(|| Error::Parse(format!("unknown {what} {raw:?}")))
}

/// Reads a report written by [`render_report`] in JSON format. The wall
/// clock is not stored and comes back as zero.
pub fn parse_report_json(bytes: &[u8]) -> Result<BatteryReport> {
    let doc: ReportJson = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let t = doc.template;
    let template = QueryTemplate {
        t_fracs: t.t_fracs,
        eps_factors: t.eps_factors,
        amplitude: field(AmplitudeRule::parse(&t.amplitude), "amplitude rule", &t.amplitude)?,
        n_segments: t.n_segments,
        conditioning: field(Conditioning::parse(&t.conditioning), "conditioning", &t.conditioning)?,
        monitoring: field(Monitoring::parse(&t.monitoring), "monitoring", &t.monitoring)?,
    };
    let models = doc
        .models
        .into_iter()
        .map(|m| {
            let queries = m
                .queries
                .into_iter()
                .map(|q| {
                    Ok(QueryResult {
                        t_frac: q.t_frac,
                        t_index: q.t_index,
                        style: field(TargetStyle::parse(&q.style), "style", &q.style)?,
                        amplitude: q.amplitude,
                        epsilon: q.epsilon,
                        estimate: Estimate {
                            hits: q.hits,
                            reps: q.reps,
                            p_hat: q.p_hat,
                            ci_low: q.ci_low,
                            ci_high: q.ci_high,
                            classification: q.classification,
                            reason: q.reason,
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ModelReport {
                tag: field(ModelTag::parse(&m.tag), "model tag", &m.tag)?,
                verdict: field(Verdict::parse(&m.verdict), "verdict", &m.verdict)?,
                label: m.model,
                queries,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BatteryReport {
        seed: doc.seed,
        reps: doc.reps,
        t_end: doc.t_end,
        n_steps: doc.n_steps,
        template,
        models,
        replications: doc.replications,
        wall_clock: std::time::Duration::ZERO,
    })
}
