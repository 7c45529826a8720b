//! The partially observable scheduling environment.
//!
//! One call to [`Environment::step`] runs a full frame: poll, uplink with SIC
//! decoding, ACK, buffer update with new arrivals, fading evolution. The
//! scheduler only ever sees the returned [`Observation`].

mod agent_state;
mod metrics;
mod trace;

pub use agent_state::{preprocess, update_agent_state, Age, AgentState, CsiFeature, POWER_FEATURE_SPAN};
pub use metrics::{action_space_size, jain_index, urllc_score, MetricError};
pub use trace::{read_trace, write_trace, TraceRecord};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::phy::{decode_frame, jakes_coefficient, DecodeOutcome, FadingMatrix, LinkBudget, PhyConfig, PhyError, Protocol};
use crate::traffic::{generate_arrivals, ArrivalModel, BufferMatrix, PacketTally, TrafficConfig, TrafficError};

/// Observed buffer entries are 3-bit fields.
pub const OBSERVED_COUNT_CAP: u32 = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("action has {got} entries for {expected} devices")]
    ActionLength { expected: usize, got: usize },
    #[error("packet ledger broken: generated {generated} != delivered {delivered} + expired {expired} + buffered {buffered}")]
    Conservation { generated: u64, delivered: u64, expired: u64, buffered: u64 },
    #[error("{decoded} packets decoded in a frame with {active} active devices (SIC limit {limit})")]
    SicLimit { active: usize, decoded: u32, limit: usize },
}

/// Binary polling decision, one entry per device.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionVector(pub Vec<bool>);

impl ActionVector {
    pub fn zeros(num_devices: usize) -> Self {
        Self(vec![false; num_devices])
    }

    pub fn from_indices(num_devices: usize, polled: &[usize]) -> Self {
        let mut a = Self::zeros(num_devices);
        for &k in polled {
            a.0[k] = true;
        }
        a
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&a| a).count()
    }

    pub fn polled(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &a)| a).map(|(k, _)| k)
    }
}

/// Feedback available to the BS after a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub active: Vec<bool>,
    pub decoded: Vec<bool>,
    /// Pre-transition buffer rows of decoded devices, saturated; zero elsewhere.
    pub observed_buffers: BufferMatrix,
    /// Received power of active devices; zero elsewhere.
    pub observed_powers: Vec<f64>,
    pub reward: u32,
}

impl Observation {
    pub fn empty(num_devices: usize, depth: usize) -> Self {
        Self {
            active: vec![false; num_devices],
            decoded: vec![false; num_devices],
            observed_buffers: BufferMatrix::new(num_devices, depth),
            observed_powers: vec![0.0; num_devices],
            reward: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub phy: PhyConfig,
    pub traffic: TrafficConfig,
    pub protocol: Protocol,
    /// Redraw periodic offsets uniformly in [0, N_p) at every reset.
    pub random_offsets: bool,
}

impl EnvConfig {
    pub fn num_devices(&self) -> usize {
        self.traffic.num_devices()
    }

    pub fn frame_duration(&self) -> f64 {
        self.phy.frame_duration(self.protocol)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        self.phy.validate()?;
        self.traffic.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub buffers: BufferMatrix,
    pub fading: FadingMatrix<f64>,
    pub link: LinkBudget,
    pub last_observation: Observation,
    pub frame: u64,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: u32,
    pub arrivals: Vec<u32>,
    pub expired: Vec<u32>,
    pub decode: DecodeOutcome<f64>,
}

/// A single environment instance with its own random stream.
#[derive(Debug, Clone)]
pub struct Environment {
    config: EnvConfig,
    state: EnvState,
    rng: ChaCha8Rng,
    tally: PacketTally,
    overloaded_frames: u64,
}

impl Environment {
    pub fn new(config: EnvConfig, seed: u64) -> Result<Self, EnvError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = config.num_devices();
        let link = LinkBudget::place(&config.phy, k, &mut rng)?;
        let state = Self::fresh_state(&config, link, &mut rng);
        Ok(Self { tally: PacketTally::new(k), config, state, rng, overloaded_frames: 0 })
    }

    fn fresh_state(config: &EnvConfig, link: LinkBudget, rng: &mut ChaCha8Rng) -> EnvState {
        let k = config.num_devices();
        let depth = config.traffic.max_deadline() as usize;
        let a = jakes_coefficient(config.phy.device_speed, config.phy.carrier_frequency, config.frame_duration());
        EnvState {
            buffers: BufferMatrix::new(k, depth),
            fading: FadingMatrix::draw(config.phy.num_antennas, vec![a; k], rng),
            link,
            last_observation: Observation::empty(k, depth),
            frame: 0,
        }
    }

    /// Starts a new episode: empty buffers, fresh fading, new placement unless
    /// the topology is fixed. Returns the initial agent state.
    pub fn reset(&mut self) -> Result<AgentState, EnvError> {
        let k = self.config.num_devices();
        let link = if self.config.phy.fixed_topology {
            self.state.link.clone()
        } else {
            LinkBudget::place(&self.config.phy, k, &mut self.rng)?
        };
        if self.config.random_offsets {
            if let ArrivalModel::Periodic { period_frames, offsets, .. } = &mut self.config.traffic.model {
                for f in offsets.iter_mut() {
                    *f = self.rng.random_range(0..*period_frames);
                }
            }
        }
        self.state = Self::fresh_state(&self.config, link, &mut self.rng);
        self.tally = PacketTally::new(k);
        self.overloaded_frames = 0;
        Ok(AgentState::new(k, self.state.buffers.depth()))
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn num_devices(&self) -> usize {
        self.config.num_devices()
    }

    /// Ledger of the current episode.
    pub fn tally(&self) -> &PacketTally {
        &self.tally
    }

    /// Frames in the current episode with more active devices than the SIC limit.
    pub fn overloaded_frames(&self) -> u64 {
        self.overloaded_frames
    }

    /// Current η_k = p g_k ‖h_k‖² for every device (oracle feed).
    pub fn true_received_powers(&self) -> Vec<f64> {
        (0..self.num_devices())
            .map(|k| {
                crate::phy::received_power(self.config.phy.tx_power, self.state.link.gains[k], self.state.fading.device(k))
            })
            .collect()
    }

    /// Runs one frame for `action`.
    pub fn step(&mut self, action: &ActionVector) -> Result<StepResult, EnvError> {
        let k = self.num_devices();
        if action.len() != k {
            return Err(EnvError::ActionLength { expected: k, got: action.len() });
        }
        let state = &mut self.state;
        let active: Vec<usize> = action.polled().filter(|&j| !state.buffers.is_empty_row(j)).collect();
        let decode = decode_frame(&active, &state.fading, &state.link, &self.config.phy, action.count(), &mut self.rng)?;
        let reward = decode.num_decoded() as u32;
        if active.len() > self.config.phy.sic_limit {
            self.overloaded_frames += 1;
            if reward > 0 {
                return Err(EnvError::SicLimit { active: active.len(), decoded: reward, limit: self.config.phy.sic_limit });
            }
        }

        let mut observation = Observation::empty(k, state.buffers.depth());
        for &j in &active {
            observation.active[j] = true;
            observation.observed_powers[j] = decode.received[j];
            if decode.decoded[j] {
                observation.decoded[j] = true;
                let row = state.buffers.row(j).iter().map(|&c| c.min(OBSERVED_COUNT_CAP));
                for (dst, src) in observation.observed_buffers.row_mut(j).iter_mut().zip(row) {
                    *dst = src;
                }
            }
        }
        observation.reward = reward;

        let arrivals = generate_arrivals(state.frame, &self.config.traffic, &mut self.rng);
        let (next, expired) = state.buffers.transition(&decode.decoded, &arrivals, &self.config.traffic.deadline_frames)?;
        self.tally.record(&arrivals, &decode.decoded, &expired);
        state.buffers = next;
        state.fading.evolve(&mut self.rng);
        state.frame += 1;
        state.last_observation = observation.clone();

        Ok(StepResult { observation, reward, arrivals, expired, decode })
    }

    /// Packet conservation for the current episode.
    pub fn check_conservation(&self) -> Result<(), EnvError> {
        let t = &self.tally;
        let buffered = self.state.buffers.total();
        if t.total_generated() != t.total_delivered() + t.total_expired() + buffered {
            return Err(EnvError::Conservation {
                generated: t.total_generated(),
                delivered: t.total_delivered(),
                expired: t.total_expired(),
                buffered,
            });
        }
        Ok(())
    }
}
