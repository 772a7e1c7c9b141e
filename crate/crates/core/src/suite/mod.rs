//! Target families, the battery runner and its report formats.

mod battery;
mod report;
mod targets;

pub use battery::{
    counterexample_models, default_models, run_battery, AmplitudeRule, BatteryReport, ModelReport, QueryResult,
    QueryTemplate, Verdict, MIN_BATTERY_REPS,
};
pub use report::{fmt_f64, parse_report_json, render_report, ReportFormat, CSV_HEADER};
pub use targets::{build_targets, Target, TargetFamily, TargetStyle};
