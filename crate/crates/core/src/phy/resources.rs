use super::PhyError;

// Guard against products such as 5e6 · 2 · 100e-9 landing a hair above an integer.
const ROUNDING_SLACK: f64 = 1e-9;

/// Pilots per device n_p = ⌈W / W_c⌉ with coherence bandwidth W_c = 1/(2 T_d).
pub fn pilot_count(bandwidth: f64, delay_spread: f64) -> usize {
    let ratio = bandwidth * 2.0 * delay_spread;
    ((ratio - ROUNDING_SLACK).ceil() as usize).max(1)
}

/// Complex channel uses n = ⌊(W − n_p U Δf) T_i⌋ left for data after pilots.
pub fn channel_uses(
    bandwidth: f64,
    pilots_per_device: usize,
    num_polled: usize,
    subcarrier_spacing: f64,
    info_duration: f64,
) -> Result<usize, PhyError> {
    let data_band = bandwidth - (pilots_per_device * num_polled) as f64 * subcarrier_spacing;
    let n = (data_band * info_duration + ROUNDING_SLACK).floor();
    if n < 1.0 {
        return Err(PhyError::PilotOverload { polled: num_polled });
    }
    Ok(n as usize)
}
