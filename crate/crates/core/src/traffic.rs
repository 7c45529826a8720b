//! Packet arrivals and deadline-indexed device buffers.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("invalid traffic configuration: {0}")]
    InvalidConfig(String),
    #[error("device {device} marked decoded with an empty buffer")]
    EmptyBufferDecoded { device: usize },
    #[error("dimension mismatch: expected {expected} devices, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArrivalModel {
    /// A packet with probability q_k whenever t ≡ f_k (mod N_p).
    Periodic { period_frames: u32, arrival_prob: Vec<f64>, offsets: Vec<u32> },
    /// Poisson count with mean λ_k T_f per frame.
    Poisson { rate_per_frame: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub model: ArrivalModel,
    pub deadline_frames: Vec<u32>,
}

impl TrafficConfig {
    pub fn num_devices(&self) -> usize {
        self.deadline_frames.len()
    }

    /// δ = max_k δ_k, the buffer depth.
    pub fn max_deadline(&self) -> u32 {
        self.deadline_frames.iter().copied().max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        let k = self.num_devices();
        if k == 0 {
            return Err(TrafficError::InvalidConfig("no devices".into()));
        }
        if self.deadline_frames.contains(&0) {
            return Err(TrafficError::InvalidConfig("deadline_frames must be at least 1".into()));
        }
        match &self.model {
            ArrivalModel::Periodic { period_frames, arrival_prob, offsets } => {
                if *period_frames == 0 {
                    return Err(TrafficError::InvalidConfig("period_frames must be at least 1".into()));
                }
                if arrival_prob.len() != k || offsets.len() != k {
                    return Err(TrafficError::Dimension {
                        expected: k,
                        got: arrival_prob.len().min(offsets.len()),
                    });
                }
                if arrival_prob.iter().any(|q| !(0.0..=1.0).contains(q)) {
                    return Err(TrafficError::InvalidConfig("arrival_prob outside [0, 1]".into()));
                }
                if offsets.iter().any(|&f| f >= *period_frames) {
                    return Err(TrafficError::InvalidConfig("offset outside [0, period)".into()));
                }
            }
            ArrivalModel::Poisson { rate_per_frame } => {
                if rate_per_frame.len() != k {
                    return Err(TrafficError::Dimension { expected: k, got: rate_per_frame.len() });
                }
                if rate_per_frame.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                    return Err(TrafficError::InvalidConfig("rate_per_frame must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }
}

/// Packets generated by every device during frame `t`.
pub fn generate_arrivals<R: Rng + ?Sized>(t: u64, config: &TrafficConfig, rng: &mut R) -> Vec<u32> {
    match &config.model {
        ArrivalModel::Periodic { period_frames, arrival_prob, offsets } => arrival_prob
            .iter()
            .zip(offsets)
            .map(|(&q, &f)| {
                let due = t % u64::from(*period_frames) == u64::from(f);
                u32::from(due && rng.random::<f64>() < q)
            })
            .collect(),
        ArrivalModel::Poisson { rate_per_frame } => rate_per_frame
            .iter()
            .map(|&rate| {
                if rate > 0.0 {
                    Poisson::new(rate).expect("positive rate").sample(rng) as u32
                } else {
                    0
                }
            })
            .collect(),
    }
}

/// Smallest 1-indexed time-to-deadline holding a packet.
pub fn head_of_line(row: &[u32]) -> Option<usize> {
    row.iter().position(|&c| c > 0).map(|i| i + 1)
}

/// Packet counts per device (rows) and time-to-deadline 1..=δ (columns).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BufferMatrix {
    num_devices: usize,
    depth: usize,
    counts: Vec<u32>,
}

impl BufferMatrix {
    pub fn new(num_devices: usize, depth: usize) -> Self {
        Self { num_devices, depth, counts: vec![0; num_devices * depth] }
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Self {
        let depth = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == depth), "ragged buffer rows");
        Self { num_devices: rows.len(), depth, counts: rows.concat() }
    }

    pub fn num_devices(&self) -> usize {
        self.num_devices
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn row(&self, k: usize) -> &[u32] {
        &self.counts[k * self.depth..(k + 1) * self.depth]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [u32] {
        &mut self.counts[k * self.depth..(k + 1) * self.depth]
    }

    /// Count at 1-indexed deadline `d`.
    pub fn get(&self, k: usize, d: usize) -> u32 {
        self.row(k)[d - 1]
    }

    pub fn head_of_line(&self, k: usize) -> Option<usize> {
        head_of_line(self.row(k))
    }

    pub fn is_empty_row(&self, k: usize) -> bool {
        self.row(k).iter().all(|&c| c == 0)
    }

    pub fn row_total(&self, k: usize) -> u64 {
        self.row(k).iter().map(|&c| u64::from(c)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Removes one packet at the head of line; false if the row is empty.
    pub fn remove_head(&mut self, k: usize) -> bool {
        match self.head_of_line(k) {
            Some(d) => {
                self.row_mut(k)[d - 1] -= 1;
                true
            }
            None => false,
        }
    }

    /// Ages every row by one frame; returns the packets that were at deadline 1.
    pub fn age(&mut self) -> Vec<u32> {
        (0..self.num_devices)
            .map(|k| {
                let row = self.row_mut(k);
                let expired = row.first().copied().unwrap_or(0);
                row.rotate_left(1);
                if let Some(last) = row.last_mut() {
                    *last = 0;
                }
                expired
            })
            .collect()
    }

    /// Copy with every entry capped at `cap`.
    pub fn saturated(&self, cap: u32) -> Self {
        Self { counts: self.counts.iter().map(|&c| c.min(cap)).collect(), ..self.clone() }
    }

    /// One frame of buffer dynamics: decoded devices lose one head-of-line
    /// packet, everything moves one deadline closer (deadline-1 leftovers
    /// expire), and new arrivals enter at each device's own deadline.
    pub fn transition(
        &self,
        decoded: &[bool],
        arrivals: &[u32],
        deadlines: &[u32],
    ) -> Result<(BufferMatrix, Vec<u32>), TrafficError> {
        for len in [decoded.len(), arrivals.len(), deadlines.len()] {
            if len != self.num_devices {
                return Err(TrafficError::Dimension { expected: self.num_devices, got: len });
            }
        }
        let mut next = self.clone();
        for (k, &ok) in decoded.iter().enumerate() {
            if ok && !next.remove_head(k) {
                return Err(TrafficError::EmptyBufferDecoded { device: k });
            }
        }
        let expired = next.age();
        for (k, (&m, &delta)) in arrivals.iter().zip(deadlines).enumerate() {
            let d = delta as usize;
            if d == 0 || d > next.depth {
                return Err(TrafficError::InvalidConfig(format!(
                    "deadline {d} of device {k} outside buffer depth {}",
                    next.depth
                )));
            }
            next.row_mut(k)[d - 1] += m;
        }
        Ok((next, expired))
    }
}

/// Per-device packet ledger: generated = delivered + expired + still buffered.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PacketTally {
    pub generated: Vec<u64>,
    pub delivered: Vec<u64>,
    pub expired: Vec<u64>,
}

impl PacketTally {
    pub fn new(num_devices: usize) -> Self {
        Self {
            generated: vec![0; num_devices],
            delivered: vec![0; num_devices],
            expired: vec![0; num_devices],
        }
    }

    pub fn record(&mut self, arrivals: &[u32], decoded: &[bool], expired: &[u32]) {
        for k in 0..self.generated.len() {
            self.generated[k] += u64::from(arrivals[k]);
            self.delivered[k] += u64::from(decoded[k]);
            self.expired[k] += u64::from(expired[k]);
        }
    }

    pub fn merge(&mut self, other: &PacketTally) {
        for k in 0..self.generated.len() {
            self.generated[k] += other.generated[k];
            self.delivered[k] += other.delivered[k];
            self.expired[k] += other.expired[k];
        }
    }

    pub fn total_generated(&self) -> u64 {
        self.generated.iter().sum()
    }

    pub fn total_delivered(&self) -> u64 {
        self.delivered.iter().sum()
    }

    pub fn total_expired(&self) -> u64 {
        self.expired.iter().sum()
    }

    /// Packets neither delivered nor expired.
    pub fn residual(&self) -> u64 {
        self.total_generated() - self.total_delivered() - self.total_expired()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn periodic(k: usize, period: u32, q: f64) -> TrafficConfig {
        TrafficConfig {
            model: ArrivalModel::Periodic {
                period_frames: period,
                arrival_prob: vec![q; k],
                offsets: vec![0; k],
            },
            deadline_frames: vec![3; k],
        }
    }

    #[test]
    fn periodic_arrivals_follow_the_offset() {
        let cfg = periodic(3, 11, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(generate_arrivals(5, &cfg, &mut rng), vec![0, 0, 0]);
        assert_eq!(generate_arrivals(22, &cfg, &mut rng), vec![1, 1, 1]);
        let mut cfg = periodic(2, 4, 1.0);
        if let ArrivalModel::Periodic { offsets, .. } = &mut cfg.model {
            offsets[1] = 2;
        }
        assert_eq!(generate_arrivals(6, &cfg, &mut rng), vec![0, 1]);
    }

    #[test]
    fn poisson_mean_matches_rate() {
        let rate = 1.0 / 11.2;
        let cfg = TrafficConfig {
            model: ArrivalModel::Poisson { rate_per_frame: vec![rate] },
            deadline_frames: vec![5],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let frames = 1_000_000u64;
        let total: u64 = (0..frames).map(|t| u64::from(generate_arrivals(t, &cfg, &mut rng)[0])).sum();
        let mean = total as f64 / frames as f64;
        assert!((mean - rate).abs() < 0.01 * rate, "mean {mean}");
    }

    #[test]
    fn head_of_line_cases() {
        assert_eq!(head_of_line(&[0, 0, 2, 1]), Some(3));
        assert_eq!(head_of_line(&[0, 0, 0, 0]), None);
        assert_eq!(head_of_line(&[5, 0, 0, 0]), Some(1));
    }

    #[test]
    fn transition_examples() {
        let b = BufferMatrix::from_rows(&[vec![1, 0, 0]]);
        let (next, expired) = b.transition(&[true], &[0], &[3]).unwrap();
        assert_eq!(next.row(0), &[0, 0, 0]);
        assert_eq!(expired, vec![0]);

        let b = BufferMatrix::from_rows(&[vec![1, 2, 0]]);
        let (next, expired) = b.transition(&[false], &[0], &[3]).unwrap();
        assert_eq!(next.row(0), &[2, 0, 0]);
        assert_eq!(expired, vec![1]);

        let (next, _) = b.transition(&[true], &[2], &[3]).unwrap();
        assert_eq!(next.row(0), &[2, 0, 2]);
    }

    #[test]
    fn decoding_an_empty_row_is_an_error() {
        let b = BufferMatrix::new(2, 3);
        assert_eq!(
            b.transition(&[false, true], &[0, 0], &[3, 3]),
            Err(TrafficError::EmptyBufferDecoded { device: 1 })
        );
    }

    #[test]
    fn undelivered_packet_expires_after_its_deadline() {
        let deadlines = [4u32, 2];
        let mut b = BufferMatrix::new(2, 4);
        let (next, _) = b.transition(&[false, false], &[1, 1], &deadlines).unwrap();
        b = next;
        let mut expired_at = [None, None];
        for frame in 1..=6u32 {
            let (next, expired) = b.transition(&[false, false], &[0, 0], &deadlines).unwrap();
            for k in 0..2 {
                if expired[k] > 0 {
                    expired_at[k] = Some(frame);
                }
            }
            b = next;
        }
        assert_eq!(expired_at, [Some(4), Some(2)]);
    }

    #[test]
    fn saturation_caps_counts() {
        let b = BufferMatrix::from_rows(&[vec![9, 3]]);
        assert_eq!(b.saturated(7).row(0), &[7, 3]);
    }

    #[test]
    fn conservation_over_random_episode() {
        let cfg = TrafficConfig {
            model: ArrivalModel::Poisson { rate_per_frame: vec![0.3, 0.05, 0.6] },
            deadline_frames: vec![5, 2, 4],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut b = BufferMatrix::new(3, 5);
        let mut tally = PacketTally::new(3);
        for t in 0..200 {
            let decoded: Vec<bool> =
                (0..3).map(|k| !b.is_empty_row(k) && rng.random::<f64>() < 0.4).collect();
            let arrivals = generate_arrivals(t, &cfg, &mut rng);
            let (next, expired) = b.transition(&decoded, &arrivals, &cfg.deadline_frames).unwrap();
            tally.record(&arrivals, &decoded, &expired);
            b = next;
        }
        assert!(tally.total_generated() > 50);
        assert_eq!(tally.residual(), b.total());
        assert_eq!(
            tally.total_generated(),
            tally.total_delivered() + tally.total_expired() + b.total()
        );
    }

    proptest! {
        #[test]
        fn empty_buffer_without_arrivals_is_fixed_point(k in 1usize..6, depth in 1usize..8) {
            let b = BufferMatrix::new(k, depth);
            let deadlines = vec![depth as u32; k];
            let (next, expired) = b.transition(&vec![false; k], &vec![0; k], &deadlines).unwrap();
            prop_assert_eq!(next, b);
            prop_assert!(expired.iter().all(|&e| e == 0));
        }

        #[test]
        fn entries_beyond_device_deadline_stay_zero(
            steps in proptest::collection::vec((proptest::collection::vec(0u32..3, 3), proptest::collection::vec(any::<bool>(), 3)), 1..40)
        ) {
            let deadlines = [2u32, 5, 3];
            let mut b = BufferMatrix::new(3, 5);
            for (arrivals, decode) in steps {
                let decoded: Vec<bool> = (0..3).map(|k| decode[k] && !b.is_empty_row(k)).collect();
                let before = b.total();
                let (next, expired) = b.transition(&decoded, &arrivals, &deadlines).unwrap();
                let removed = decoded.iter().filter(|&&d| d).count() as u64;
                let added: u64 = arrivals.iter().map(|&a| u64::from(a)).sum();
                let lost: u64 = expired.iter().map(|&e| u64::from(e)).sum();
                prop_assert_eq!(next.total(), before - removed - lost + added);
                for (k, &d) in deadlines.iter().enumerate() {
                    prop_assert!(next.row(k)[d as usize..].iter().all(|&c| c == 0));
                }
                b = next;
            }
        }
    }
}
