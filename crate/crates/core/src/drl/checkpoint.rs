//! Binary checkpoint: a versioned little-endian header followed by every
//! parameter and optimizer moment as 64-bit floats.
//!
//! Layout: magic `NOMAPPO\0`, `u32` version, `u32` K, `u32` H, `u32` input
//! size, `u32` layer count and `u32` sizes for the policy then the value
//! network, `u64` update counter, `u64` episodes seen, `u64` Adam steps
//! (policy, value), then the arrays policy params, value params, policy m,
//! policy v, value m, value v, each prefixed by its `u64` length.

use std::io::{Read, Write};

use super::agent::{Agent, PpoConfig};
use super::network::{Network, OutputActivation};
use super::DrlError;
use crate::Real;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"NOMAPPO\0";
pub const CHECKPOINT_VERSION: u32 = 1;

fn put_u32<W: Write>(w: &mut W, x: u32) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_u64<W: Write>(w: &mut W, x: u64) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_array<W: Write, T: Real>(w: &mut W, xs: &[T]) -> std::io::Result<()> {
    put_u64(w, xs.len() as u64)?;
    for &x in xs {
        w.write_all(&x.as_f64().to_le_bytes())?;
    }
    Ok(())
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32, DrlError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64<R: Read>(r: &mut R) -> Result<u64, DrlError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_array<R: Read, T: Real>(r: &mut R, expected: usize, what: &'static str) -> Result<Vec<T>, DrlError> {
    let n = get_u64(r)? as usize;
    if n != expected {
        return Err(DrlError::Dimension { what, expected, got: n });
    }
    let mut out = Vec::with_capacity(n);
    let mut b = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut b)?;
        out.push(T::lit(f64::from_le_bytes(b)));
    }
    Ok(out)
}

fn put_sizes<W: Write>(w: &mut W, sizes: &[usize]) -> std::io::Result<()> {
    put_u32(w, sizes.len() as u32)?;
    for &s in sizes {
        put_u32(w, s as u32)?;
    }
    Ok(())
}

fn get_sizes<R: Read>(r: &mut R) -> Result<Vec<usize>, DrlError> {
    let n = get_u32(r)? as usize;
    if !(2..=64).contains(&n) {
        return Err(DrlError::Checkpoint(format!("implausible layer count {n}")));
    }
    let sizes: Vec<usize> = (0..n).map(|_| get_u32(r).map(|s| s as usize)).collect::<Result<_, _>>()?;
    if sizes.contains(&0) {
        return Err(DrlError::Checkpoint(format!("zero-width layer in {sizes:?}")));
    }
    Ok(sizes)
}

pub fn write_checkpoint<W: Write, T: Real>(agent: &Agent<T>, w: &mut W) -> Result<(), DrlError> {
    w.write_all(CHECKPOINT_MAGIC)?;
    put_u32(w, CHECKPOINT_VERSION)?;
    put_u32(w, agent.num_devices() as u32)?;
    put_u32(w, agent.hidden() as u32)?;
    put_u32(w, agent.policy.input_size() as u32)?;
    put_sizes(w, agent.policy.sizes())?;
    put_sizes(w, agent.value.sizes())?;
    put_u64(w, agent.updates)?;
    put_u64(w, agent.episodes_seen)?;
    put_u64(w, agent.policy_opt.step)?;
    put_u64(w, agent.value_opt.step)?;
    put_array(w, agent.policy.params())?;
    put_array(w, agent.value.params())?;
    put_array(w, &agent.policy_opt.m)?;
    put_array(w, &agent.policy_opt.v)?;
    put_array(w, &agent.value_opt.m)?;
    put_array(w, &agent.value_opt.v)?;
    Ok(())
}

/// Reads a checkpoint; Adam hyperparameters come from `config`.
pub fn read_checkpoint<R: Read, T: Real>(r: &mut R, config: &PpoConfig) -> Result<Agent<T>, DrlError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(DrlError::Checkpoint("bad magic".into()));
    }
    let version = get_u32(r)?;
    if version != CHECKPOINT_VERSION {
        return Err(DrlError::Checkpoint(format!("unsupported version {version}")));
    }
    let k = get_u32(r)? as usize;
    let h = get_u32(r)? as usize;
    let input = get_u32(r)? as usize;
    let policy_sizes = get_sizes(r)?;
    let value_sizes = get_sizes(r)?;
    if policy_sizes.first() != Some(&input) || policy_sizes.last() != Some(&k) || policy_sizes.get(1) != Some(&h) {
        return Err(DrlError::Checkpoint(format!("policy shape {policy_sizes:?} disagrees with K={k}, H={h}")));
    }
    let updates = get_u64(r)?;
    let episodes_seen = get_u64(r)?;
    let policy_steps = get_u64(r)?;
    let value_steps = get_u64(r)?;
    let mut policy = Network::<T>::zeros(&policy_sizes, OutputActivation::Sigmoid);
    let mut value = Network::<T>::zeros(&value_sizes, OutputActivation::Identity);
    let np = policy.num_params();
    let nv = value.num_params();
    policy.params_mut().copy_from_slice(&get_array::<_, T>(r, np, "policy parameters")?);
    value.params_mut().copy_from_slice(&get_array::<_, T>(r, nv, "value parameters")?);
    let mut agent = Agent::from_networks(policy, value, config);
    agent.policy_opt.m = get_array(r, np, "policy first moment")?;
    agent.policy_opt.v = get_array(r, np, "policy second moment")?;
    agent.value_opt.m = get_array(r, nv, "value first moment")?;
    agent.value_opt.v = get_array(r, nv, "value second moment")?;
    agent.policy_opt.step = policy_steps;
    agent.value_opt.step = value_steps;
    agent.updates = updates;
    agent.episodes_seen = episodes_seen;
    Ok(agent)
}

