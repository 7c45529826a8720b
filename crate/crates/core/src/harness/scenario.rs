use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::drl::{CsiMode, PpoConfig};
use crate::env::EnvConfig;
use crate::phy::{PhyConfig, Protocol};
use crate::sched::{default_sa_grid, PriorConfig};
use crate::traffic::{ArrivalModel, TrafficConfig};

/// Tag written into every report and accepted in scenario files.
pub const SCENARIO_FORMAT: &str = "noma-urllc-scenario/1";

/// Scheduler under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    #[default]
    NomaPpo,
    NomaPpoNoPrior,
    NomaPpoNoCsi,
    NomaPpoFullCsi,
    Random,
    EdfOracle,
    SaNomaSic,
}

impl AgentKind {
    pub fn is_learned(self) -> bool {
        matches!(self, Self::NomaPpo | Self::NomaPpoNoPrior | Self::NomaPpoNoCsi | Self::NomaPpoFullCsi)
    }

    /// Prior usage and channel features of a learned variant.
    pub fn policy_variant(self) -> Option<(bool, CsiMode)> {
        match self {
            Self::NomaPpo => Some((true, CsiMode::Estimated)),
            Self::NomaPpoNoPrior => Some((false, CsiMode::Estimated)),
            Self::NomaPpoNoCsi => Some((true, CsiMode::Hidden)),
            Self::NomaPpoFullCsi => Some((true, CsiMode::Oracle)),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::NomaPpo => "noma_ppo",
            Self::NomaPpoNoPrior => "noma_ppo_no_prior",
            Self::NomaPpoNoCsi => "noma_ppo_no_csi",
            Self::NomaPpoFullCsi => "noma_ppo_full_csi",
            Self::Random => "random",
            Self::EdfOracle => "edf_oracle",
            Self::SaNomaSic => "sa_noma_sic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficModel {
    Periodic,
    #[default]
    Poisson,
}

/// Periodic offsets: all zero, or redrawn uniformly at every episode start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetMode {
    #[default]
    Zero,
    Random,
}

/// Homogeneous traffic description; times in milliseconds are converted to
/// frames of the scenario's protocol unless given in frames directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSpec {
    pub model: TrafficModel,
    pub inter_arrival_ms: f64,
    pub deadline_ms: f64,
    /// Overrides ⌊deadline_ms / T_f⌋.
    pub deadline_frames: Option<u32>,
    /// Overrides round(inter_arrival_ms / T_f) for periodic traffic.
    pub period_frames: Option<u32>,
    /// Overrides T_f / inter_arrival_ms for Poisson traffic.
    pub rate_per_frame: Option<f64>,
    pub arrival_prob: f64,
    pub offsets: OffsetMode,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        Self {
            model: TrafficModel::Poisson,
            inter_arrival_ms: 2.0,
            deadline_ms: 1.0,
            deadline_frames: None,
            period_frames: None,
            rate_per_frame: None,
            arrival_prob: 1.0,
            offsets: OffsetMode::Zero,
        }
    }
}

impl TrafficSpec {
    pub fn deadline_in_frames(&self, frame_duration: f64) -> u32 {
        self.deadline_frames.unwrap_or_else(|| (self.deadline_ms * 1e-3 / frame_duration + 1e-9).floor() as u32)
    }

    pub fn period_in_frames(&self, frame_duration: f64) -> u32 {
        self.period_frames.unwrap_or_else(|| (self.inter_arrival_ms * 1e-3 / frame_duration).round() as u32)
    }

    pub fn rate_in_frames(&self, frame_duration: f64) -> f64 {
        self.rate_per_frame.unwrap_or(frame_duration / (self.inter_arrival_ms * 1e-3))
    }
}

/// Slotted-ALOHA baseline settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaConfig {
    /// Fixed access probability; `None` optimizes it over `grid`.
    pub probability: Option<f64>,
    pub grid: Vec<f64>,
    pub episodes_per_point: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self { probability: None, grid: default_sa_grid(), episodes_per_point: 100 }
    }
}

/// One experiment: network, traffic, scheduler and learner settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub format: String,
    /// K; has no default.
    pub num_devices: Option<usize>,
    pub protocol: Protocol,
    pub agent: AgentKind,
    pub seeds: Vec<u64>,
    pub eval_episodes: u64,
    pub phy: PhyConfig,
    pub traffic: TrafficSpec,
    pub ppo: PpoConfig,
    pub prior: PriorConfig,
    pub sa: SaConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            format: SCENARIO_FORMAT.to_string(),
            num_devices: None,
            protocol: Protocol::Scheduled5Slot,
            agent: AgentKind::NomaPpo,
            seeds: vec![0, 1, 2, 3, 4],
            eval_episodes: 500,
            phy: PhyConfig::default(),
            traffic: TrafficSpec::default(),
            ppo: PpoConfig::default(),
            prior: PriorConfig::default(),
            sa: SaConfig::default(),
        }
    }
}

fn invalid(field: &str, why: impl Into<String>) -> HarnessError {
    HarnessError::Validation { field: field.to_string(), why: why.into() }
}

impl Scenario {
    pub fn num_devices(&self) -> Result<usize, HarnessError> {
        match self.num_devices {
            Some(k) if k > 0 => Ok(k),
            Some(_) => Err(invalid("num_devices", "K must be at least 1")),
            None => Err(invalid("num_devices", "K must be given explicitly")),
        }
    }

    pub fn frame_duration(&self) -> f64 {
        self.phy.frame_duration(self.protocol)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.format != SCENARIO_FORMAT {
            return Err(invalid("format", format!("expected {SCENARIO_FORMAT:?}, got {:?}", self.format)));
        }
        self.num_devices()?;
        if self.agent == AgentKind::SaNomaSic && self.protocol != Protocol::Grantfree4Slot {
            return Err(invalid("protocol", "sa_noma_sic requires grantfree_4slot"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        if self.eval_episodes == 0 {
            return Err(invalid("eval_episodes", "must be positive"));
        }
        let t = &self.traffic;
        let tf = self.frame_duration();
        if t.deadline_in_frames(tf) == 0 {
            return Err(invalid("traffic.deadline_frames", "deadline must be at least one frame"));
        }
        if !(t.inter_arrival_ms > 0.0 && t.inter_arrival_ms.is_finite()) {
            return Err(invalid("traffic.inter_arrival_ms", "must be positive"));
        }
        if !(0.0..=1.0).contains(&t.arrival_prob) {
            return Err(invalid("traffic.arrival_prob", "outside [0, 1]"));
        }
        if t.model == TrafficModel::Periodic && t.period_in_frames(tf) == 0 {
            return Err(invalid("traffic.period_frames", "period must be at least one frame"));
        }
        if let Some(p) = self.sa.probability {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid("sa.probability", "outside [0, 1]"));
            }
        }
        if self.sa.grid.is_empty() || self.sa.grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("sa.grid", "must be a nonempty list of probabilities"));
        }
        self.phy.validate().map_err(|e| invalid("phy", e.to_string()))?;
        self.ppo.validate().map_err(|e| invalid("ppo", e.to_string()))?;
        self.prior.validate().map_err(|e| invalid("prior", e.to_string()))?;
        self.env_config()?.validate().map_err(|e| invalid("traffic", e.to_string()))?;
        Ok(())
    }

    /// Environment configuration with all times converted to frames.
    pub fn env_config(&self) -> Result<EnvConfig, HarnessError> {
        let k = self.num_devices()?;
        let tf = self.frame_duration();
        let t = &self.traffic;
        let model = match t.model {
            TrafficModel::Periodic => ArrivalModel::Periodic {
                period_frames: t.period_in_frames(tf),
                arrival_prob: vec![t.arrival_prob; k],
                offsets: vec![0; k],
            },
            TrafficModel::Poisson => ArrivalModel::Poisson { rate_per_frame: vec![t.rate_in_frames(tf); k] },
        };
        Ok(EnvConfig {
            phy: self.phy.clone(),
            traffic: TrafficConfig { model, deadline_frames: vec![t.deadline_in_frames(tf); k] },
            protocol: self.protocol,
            random_offsets: t.offsets == OffsetMode::Random,
        })
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Serialize(e.to_string()))
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, HarnessError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| HarnessError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, scenario.to_toml()?)?;
    Ok(())
}
