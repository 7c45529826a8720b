//! Classical schedulers and the prior used to bias the learned policy.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{ActionVector, Age};
use crate::traffic::BufferMatrix;
use crate::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedError {
    #[error("invalid prior configuration: {0}")]
    InvalidConfig(String),
    #[error("empty probability grid")]
    EmptyGrid,
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
}

/// Thresholds of the channel prior and the smoothing of the posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    /// η* in watts; `None` derives it from the target error probability.
    pub power_threshold: Option<f64>,
    /// τ* in frames; `None` uses the channel coherence time.
    pub staleness_threshold: Option<u32>,
    /// κ: weight left on prior-masked branches (0 gives a hard mask).
    pub smoothing: f64,
    /// Target error probability used to derive η*.
    pub target_error: f64,
    /// Debug switch: run the EDF term on the true buffers instead of the estimate.
    pub edf_on_true_buffers: bool,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            power_threshold: None,
            staleness_threshold: None,
            smoothing: 0.1,
            target_error: 1e-5,
            edf_on_true_buffers: false,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<(), SchedError> {
        if !(0.0..=1.0).contains(&self.smoothing) {
            return Err(SchedError::InvalidConfig(format!("smoothing {} outside [0, 1]", self.smoothing)));
        }
        if let Some(eta) = self.power_threshold {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(SchedError::InvalidConfig(format!("power threshold {eta} must be finite and >= 0")));
            }
        }
        if !(self.target_error > 0.0 && self.target_error <= 0.5) {
            return Err(SchedError::InvalidConfig(format!("target error {} outside (0, 0.5]", self.target_error)));
        }
        Ok(())
    }
}

/// Resolved thresholds (η*, τ*) for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelThresholds {
    pub power: f64,
    pub staleness: u32,
}

/// Polls up to `slots` nonempty devices with the smallest head-of-line delay.
pub fn edf_schedule<R: Rng + ?Sized>(buffers: &BufferMatrix, slots: usize, rng: &mut R) -> ActionVector {
    let mut candidates: Vec<(usize, usize)> =
        (0..buffers.num_devices()).filter_map(|k| buffers.head_of_line(k).map(|d| (k, d))).collect();
    candidates.shuffle(rng);
    candidates.sort_by_key(|&(_, d)| d);
    let picked: Vec<usize> = candidates.iter().take(slots).map(|&(k, _)| k).collect();
    ActionVector::from_indices(buffers.num_devices(), &picked)
}

/// Masks devices whose last observed power is weak and still fresh.
pub fn channel_prior(power_estimate: &[f64], age_active: &[Age], thresholds: ChannelThresholds) -> Vec<bool> {
    power_estimate
        .iter()
        .zip(age_active)
        .map(|(&eta, &age)| {
            let fresh = matches!(age, Some(a) if a <= thresholds.staleness);
            !(fresh && eta <= thresholds.power)
        })
        .collect()
}

/// EDF picks that also pass the channel mask.
pub fn combined_prior<R: Rng + ?Sized>(
    buffers: &BufferMatrix,
    power_estimate: &[f64],
    age_active: &[Age],
    slots: usize,
    thresholds: ChannelThresholds,
    rng: &mut R,
) -> Vec<bool> {
    let edf = edf_schedule(buffers, slots, rng);
    let mask = channel_prior(power_estimate, age_active, thresholds);
    edf.0.iter().zip(mask).map(|(&e, m)| e && m).collect()
}

/// Per-branch posterior: π·(f + κ(1−f)) renormalized against 1−π.
pub fn posterior_policy<T: Real>(branch_probs: &[T], prior: &[bool], smoothing: T) -> Vec<T> {
    branch_probs
        .iter()
        .zip(prior)
        .map(|(&p, &f)| {
            let on = if f { p } else { p * smoothing };
            let off = T::one() - p;
            if on + off > T::zero() {
                on / (on + off)
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Uniformly random subset of `slots` devices.
pub fn random_schedule<R: Rng + ?Sized>(num_devices: usize, slots: usize, rng: &mut R) -> ActionVector {
    let picked = rand::seq::index::sample(rng, num_devices, slots.min(num_devices)).into_vec();
    ActionVector::from_indices(num_devices, &picked)
}

/// Proactive grant-free access: a backlogged device transmits with probability `p`.
pub fn sa_transmit_decision<R: Rng + ?Sized>(has_packet: bool, p: f64, rng: &mut R) -> bool {
    has_packet && rng.random::<f64>() < p
}

/// Transmission pattern of every device for one grant-free frame.
pub fn sa_schedule<R: Rng + ?Sized>(buffers: &BufferMatrix, p: f64, rng: &mut R) -> ActionVector {
    ActionVector((0..buffers.num_devices()).map(|k| sa_transmit_decision(!buffers.is_empty_row(k), p, rng)).collect())
}

/// Default access-probability grid 0.05, 0.10, …, 0.90.
pub fn default_sa_grid() -> Vec<f64> {
    (1..=18).map(|i| f64::from(i) * 0.05).collect()
}

/// Grid point with the best score; ties go to the smaller probability.
pub fn optimize_sa_probability<F>(grid: &[f64], mut score: F) -> Result<(f64, Vec<f64>), SchedError>
where
    F: FnMut(f64) -> f64,
{
    if grid.is_empty() {
        return Err(SchedError::EmptyGrid);
    }
    if let Some(&p) = grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(SchedError::InvalidProbability(p));
    }
    let mut points = grid.to_vec();
    points.sort_by(f64::total_cmp);
    let scores: Vec<f64> = points.iter().map(|&p| score(p)).collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok((points[best], scores))
}
