use rand::Rng;

use super::{
    channel_uses, decoding_order, fbl_error_probability, pilot_count, received_power, sic_sinr,
    CrossTerms, FadingMatrix, LinkBudget, PhyConfig, PhyError,
};
use crate::Real;

/// Result of decoding one uplink frame. Per-device vectors have length K;
/// SINR and error probability are `None` for inactive devices.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome<T> {
    pub order: Vec<usize>,
    pub received: Vec<T>,
    pub sinr: Vec<Option<T>>,
    pub error_prob: Vec<Option<T>>,
    pub decoded: Vec<bool>,
    pub blocklength: usize,
}

impl<T: Real> DecodeOutcome<T> {
    pub fn num_decoded(&self) -> usize {
        self.decoded.iter().filter(|&&d| d).count()
    }
}

/// Decodes the active devices of a frame with SIC.
///
/// More than `sic_limit` active devices decode nothing (SINRs without any
/// cancellation are still reported). Otherwise devices are processed in
/// decreasing received power; each one's SINR accounts for the outcomes of
/// the devices before it and success is drawn with probability 1 − ε.
pub fn decode_frame<T: Real, R: Rng + ?Sized>(
    active: &[usize],
    fading: &FadingMatrix<T>,
    budget: &LinkBudget,
    config: &PhyConfig,
    num_polled: usize,
    rng: &mut R,
) -> Result<DecodeOutcome<T>, PhyError> {
    let k_total = fading.num_devices();
    let n_p = pilot_count(config.bandwidth, config.delay_spread);
    let blocklength = channel_uses(
        config.bandwidth,
        n_p,
        num_polled,
        config.subcarrier_spacing,
        config.symbol_info_duration,
    )?;
    let mut outcome = DecodeOutcome {
        order: Vec::new(),
        received: vec![T::zero(); k_total],
        sinr: vec![None; k_total],
        error_prob: vec![None; k_total],
        decoded: vec![false; k_total],
        blocklength,
    };
    if active.is_empty() {
        return Ok(outcome);
    }

    let tx = T::lit(config.tx_power);
    let gains: Vec<T> = budget.gains.iter().map(|&g| T::lit(g)).collect();
    for &k in active {
        outcome.received[k] = received_power(tx, gains[k], fading.device(k));
    }
    let pairs: Vec<(usize, T)> = active.iter().map(|&k| (k, outcome.received[k])).collect();
    outcome.order = decoding_order(&pairs)?;
    let cross = CrossTerms::compute(active, fading, tx, &gains)?;
    let noise = T::lit(config.noise_power());
    let bits = config.packet_bits;

    let within_limit = active.len() <= config.sic_limit;
    for i in 0..outcome.order.len() {
        let k = outcome.order[i];
        let sinr = sic_sinr(k, &outcome.order, &outcome.decoded, &outcome.received, &cross, noise);
        let eps = fbl_error_probability(sinr, blocklength, bits);
        outcome.sinr[k] = Some(sinr);
        outcome.error_prob[k] = Some(eps);
        if within_limit {
            outcome.decoded[k] = rng.random::<f64>() < 1.0 - eps.as_f64();
        }
    }
    Ok(outcome)
}
