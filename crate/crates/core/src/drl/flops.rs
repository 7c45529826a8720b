use serde::{Deserialize, Serialize};

/// Agents whose per-decision inference cost can be estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Branching policy on the 5K+1 agent-state features.
    NomaPpo,
    /// Branching dueling Q-network on the same features.
    Bdq,
    /// One recurrent Q-network per device.
    IdrqnAgent,
}

/// FLOPs of one forward pass; a dense layer costs 2·in·out and each
/// H-wide nonlinearity stage H.
///
/// `input` is only used by the recurrent architecture, whose per-device
/// GRU costs 6H(H_in + H) + 10H.
pub fn flops_estimate(arch: Architecture, num_devices: u64, hidden: u64, input: u64) -> u64 {
    let k = num_devices;
    let h = hidden;
    let features = 5 * k + 1;
    match arch {
        Architecture::NomaPpo => 2 * features * h + 2 * 2 * h * h + 2 * h * k + 3 * h,
        Architecture::Bdq => 2 * features * h + 3 * 2 * h * h + 3 * 2 * h * k + 3 * h,
        Architecture::IdrqnAgent => 6 * h * k * (input + h) + 10 * h * k,
    }
}
