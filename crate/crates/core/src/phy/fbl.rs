//! Normal approximation of the finite-blocklength error probability.

use super::PhyError;
use crate::Real;

/// Q(x) = ½ erfc(x / √2).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// C(γ) = log2(1 + γ), bits per complex channel use.
pub fn capacity<T: Real>(sinr: T) -> T {
    sinr.ln_1p() / T::LN_2()
}

/// V(γ) = (γ/2)(γ+2)/(γ+1)² · log2²(e).
pub fn dispersion<T: Real>(sinr: T) -> T {
    let two = T::lit(2.0);
    let log2e = T::LOG2_E();
    sinr / two * (sinr + two) / ((sinr + T::one()) * (sinr + T::one())) * log2e * log2e
}

/// Block error probability Q(√(n/V(γ)) (C(γ) − L/n)), clamped to [0, 1].
/// A non-positive SINR never decodes.
// The negated comparison also sends NaN to the never-decodes branch.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn fbl_error_probability<T: Real>(sinr: T, blocklength: usize, payload_bits: u32) -> T {
    assert!(blocklength >= 1 && payload_bits >= 1, "blocklength and payload must be positive");
    if !(sinr > T::zero()) {
        return T::one();
    }
    if sinr.is_infinite() {
        return T::zero();
    }
    let n = T::lit(blocklength as f64);
    let rate = T::lit(f64::from(payload_bits)) / n;
    let x = (n / dispersion(sinr)).sqrt() * (capacity(sinr) - rate);
    let eps = q_function(x.as_f64()).clamp(0.0, 1.0);
    T::lit(eps)
}

/// Received power η* whose interference-free error probability equals
/// `target_error`, found by bisection on the SINR above the rate threshold.
pub fn invert_error_for_power<T: Real>(
    target_error: f64,
    blocklength: usize,
    payload_bits: u32,
    noise_power: T,
) -> Result<T, PhyError> {
    if !(target_error > 0.0 && target_error <= 0.5) {
        return Err(PhyError::NoSolution { target: target_error });
    }
    let eps = |g: f64| fbl_error_probability(g, blocklength, payload_bits);
    // ε(γ0) = ½ where C(γ0) = L/n; ε decreases beyond it.
    let threshold = (f64::from(payload_bits) / blocklength as f64).exp2() - 1.0;
    if target_error == 0.5 {
        return Ok(T::lit(threshold) * noise_power);
    }
    let mut lo = threshold;
    let mut hi = threshold.max(1.0) * 2.0;
    while eps(hi) > target_error {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(PhyError::NoSolution { target: target_error });
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eps(mid) > target_error {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // hi satisfies ε ≤ target; pick whichever endpoint is closer.
    let best = if (eps(lo) - target_error).abs() < (eps(hi) - target_error).abs() { lo } else { hi };
    Ok(T::lit(best) * noise_power)
}
