use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("URLLC score undefined: no packets were generated")]
    NoTraffic,
    #[error("Jain index undefined for {0}")]
    UndefinedJain(&'static str),
}

/// Delivered over generated packets.
pub fn urllc_score(delivered: u64, generated: u64) -> Result<f64, MetricError> {
    if generated == 0 {
        return Err(MetricError::NoTraffic);
    }
    Ok(delivered as f64 / generated as f64)
}

/// Jain's fairness index (Σx)² / (n Σx²).
pub fn jain_index(scores: &[f64]) -> Result<f64, MetricError> {
    if scores.is_empty() {
        return Err(MetricError::UndefinedJain("an empty score list"));
    }
    if scores.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(MetricError::UndefinedJain("negative or non-finite scores"));
    }
    let sum: f64 = scores.iter().sum();
    let sum_sq: f64 = scores.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Err(MetricError::UndefinedJain("all-zero scores"));
    }
    Ok(sum * sum / (scores.len() as f64 * sum_sq))
}

/// Number of polling subsets with at least `slots` devices: 2^K − Σ_{k<B} C(K, k).
pub fn action_space_size(num_devices: u32, slots: u32) -> u128 {
    assert!(num_devices < 128, "K must fit the 128-bit count");
    let mut binom: u128 = 1;
    let mut excluded: u128 = 0;
    for k in 0..slots.min(num_devices + 1) {
        excluded += binom;
        binom = binom * u128::from(num_devices - k) / u128::from(k + 1);
    }
    (1u128 << num_devices) - excluded
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_cases() {
        assert_eq!(urllc_score(100, 100), Ok(1.0));
        assert_eq!(urllc_score(0, 100), Ok(0.0));
        assert_eq!(urllc_score(0, 0), Err(MetricError::NoTraffic));
    }

    #[test]
    fn jain_cases() {
        assert!((jain_index(&[0.7; 5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((jain_index(&[0.0, 0.0, 0.8, 0.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!((jain_index(&[0.5, 1.0]).unwrap() - 0.9).abs() < 1e-15);
        assert!(jain_index(&[0.0, 0.0]).is_err());
        assert!(jain_index(&[]).is_err());
    }

    #[test]
    fn action_counts() {
        assert_eq!(action_space_size(18, 3), 261_972);
        // enumeration for K = 2, B = 1: {0}, {1}, {0, 1}
        let enumerated = (0u32..4).filter(|m| m.count_ones() >= 1).count() as u128;
        assert_eq!(action_space_size(2, 1), enumerated);
        assert_eq!(enumerated, 3);
        for k in 1..20 {
            assert_eq!(action_space_size(k, 1), (1u128 << k) - 1);
        }
    }
}
