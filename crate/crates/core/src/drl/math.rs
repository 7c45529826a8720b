use serde::{Deserialize, Serialize};

use crate::Real;

/// Exponent used when discounting rewards-to-go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnConvention {
    /// R̂(t) = Σ_{t'≥t} γ^{t'−t} r(t').
    #[default]
    PerStep,
    /// R̂(t) = Σ_{t'≥t} γ^{t'} r(t'), discounting from the episode start.
    EpisodeStart,
}

/// Σ_k a_k ln p_k + (1 − a_k) ln(1 − p_k).
pub fn joint_log_prob<T: Real>(probs: &[T], action: &[bool]) -> T {
    probs.iter().zip(action).map(|(&p, &a)| if a { p.ln() } else { (T::one() - p).ln() }).sum()
}

pub fn rewards_to_go<T: Real>(rewards: &[T], discount: T, convention: ReturnConvention) -> Vec<T> {
    let mut out = vec![T::zero(); rewards.len()];
    let mut acc = T::zero();
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + discount * acc;
        out[t] = acc;
    }
    if convention == ReturnConvention::EpisodeStart {
        let mut scale = T::one();
        for r in &mut out {
            *r *= scale;
            scale *= discount;
        }
    }
    out
}

/// Generalized advantage estimates from `rewards` (length T) and `values`
/// (length T + 1, the last entry being the bootstrap value).
pub fn gae<T: Real>(rewards: &[T], values: &[T], discount: T, lambda: T) -> Vec<T> {
    assert_eq!(values.len(), rewards.len() + 1, "values need a bootstrap entry");
    let mut adv = vec![T::zero(); rewards.len()];
    let mut acc = T::zero();
    for t in (0..rewards.len()).rev() {
        let delta = rewards[t] + discount * values[t + 1] - values[t];
        acc = delta + discount * lambda * acc;
        adv[t] = acc;
    }
    adv
}

/// Clipped surrogate of one sample and its derivative with respect to the
/// new joint log-probability.
///
/// When the ratio sits exactly on a clip boundary the clipped branch is
/// taken, whose derivative is zero.
pub fn clipped_surrogate<T: Real>(log_prob_new: T, log_prob_old: T, advantage: T, clip: T) -> (T, T) {
    let ratio = (log_prob_new - log_prob_old).exp();
    let lo = T::one() - clip;
    let hi = T::one() + clip;
    let clipped = ratio.max(lo).min(hi);
    let unclipped_term = ratio * advantage;
    let clipped_term = clipped * advantage;
    let inside = ratio > lo && ratio < hi;
    if inside || unclipped_term < clipped_term {
        (unclipped_term, unclipped_term)
    } else {
        (clipped_term, T::zero())
    }
}

/// Batch mean of the clipped surrogate.
pub fn ppo_clip_objective<T: Real>(
    new_probs: &[Vec<T>],
    behavior_probs: &[Vec<T>],
    actions: &[Vec<bool>],
    advantages: &[T],
    clip: T,
) -> T {
    let n = advantages.len();
    assert!(n > 0 && new_probs.len() == n && behavior_probs.len() == n && actions.len() == n);
    let total: T = (0..n)
        .map(|i| {
            let new = joint_log_prob(&new_probs[i], &actions[i]);
            let old = joint_log_prob(&behavior_probs[i], &actions[i]);
            clipped_surrogate(new, old, advantages[i], clip).0
        })
        .sum();
    total / T::from_usize(n).expect("batch size")
}

pub fn value_loss<T: Real>(values: &[T], returns: &[T]) -> T {
    assert!(!values.is_empty() && values.len() == returns.len());
    let total: T = values.iter().zip(returns).map(|(&v, &r)| (v - r) * (v - r)).sum();
    total / T::from_usize(values.len()).expect("batch size")
}

/// Rescales to zero mean and unit variance; a constant batch becomes zeros.
pub fn normalize<T: Real>(xs: &mut [T]) {
    if xs.is_empty() {
        return;
    }
    let n = T::from_usize(xs.len()).expect("length");
    let mean = xs.iter().copied().sum::<T>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
    let std = var.sqrt();
    for x in xs.iter_mut() {
        *x = if std > T::lit(1e-12) { (*x - mean) / std } else { T::zero() };
    }
}
