//! Scenario files, experiment orchestration and metric output.
//!
//! A scenario is a TOML file with top-level keys (`num_devices`, `protocol`,
//! `agent`, `seeds`, `eval_episodes`) and the sections `[phy]`, `[traffic]`,
//! `[ppo]`, `[prior]` and `[sa]`. Missing keys take the reference defaults;
//! unknown keys are rejected.

mod output;
mod run;
mod scenario;

pub use output::{emit_metrics, read_curve, read_report, write_report, CurveWriter, CURVE_HEADER};
pub use run::{
    config_hash, run_evaluation, run_training, sweep_sa, EvalSummary, PolicySource, RunOptions, RunReport,
    SaSweepPoint, SeedReport, REPORT_FORMAT,
};
pub use scenario::{
    load_scenario, parse_scenario, save_scenario, AgentKind, OffsetMode, SaConfig, Scenario, TrafficModel,
    TrafficSpec, SCENARIO_FORMAT,
};

use thiserror::Error;

use crate::drl::DrlError;
use crate::env::EnvError;
use crate::sched::SchedError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("scenario parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("invalid {field}: {why}")]
    Validation { field: String, why: String },
    #[error("cannot serialize scenario: {0}")]
    Serialize(String),
    #[error("packet ledger broken in the report of seed {seed}")]
    Conservation { seed: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Drl(#[from] DrlError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Sched(#[from] SchedError),
}
