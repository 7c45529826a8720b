use num_complex::Complex;

use super::{FadingMatrix, PhyError};
use crate::Real;

fn norm_sqr<T: Real>(h: &[Complex<T>]) -> T {
    h.iter().map(|c| c.norm_sqr()).sum()
}

/// η = p · g · ‖h‖²
pub fn received_power<T: Real>(tx_power: T, gain: T, h: &[Complex<T>]) -> T {
    tx_power * gain * norm_sqr(h)
}

/// Interference of device j on the MRC output of device k:
/// η_jk = p_j g_j |h_kᴴ h_j|² / ‖h_k‖².
pub fn cross_interference<T: Real>(
    h_k: &[Complex<T>],
    h_j: &[Complex<T>],
    p_j: T,
    g_j: T,
) -> Result<T, PhyError> {
    let nk = norm_sqr(h_k);
    if nk == T::zero() {
        return Err(PhyError::DegenerateCombiner);
    }
    let inner: Complex<T> = h_k.iter().zip(h_j).map(|(a, b)| a.conj() * b).sum();
    Ok(p_j * g_j * inner.norm_sqr() / nk)
}

/// SIC order over `(device, received_power)` pairs: decreasing power, ties by
/// ascending device index.
pub fn decoding_order<T: Real>(observed: &[(usize, T)]) -> Result<Vec<usize>, PhyError> {
    if observed.is_empty() {
        return Err(PhyError::EmptyInput);
    }
    let mut v = observed.to_vec();
    v.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    Ok(v.into_iter().map(|(k, _)| k).collect())
}

/// Pairwise interference terms η_jk among a set of devices, indexed by
/// device id. Entries for devices outside the set are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTerms<T> {
    num_devices: usize,
    values: Vec<T>,
}

impl<T: Real> CrossTerms<T> {
    pub fn zeros(num_devices: usize) -> Self {
        Self { num_devices, values: vec![T::zero(); num_devices * num_devices] }
    }

    /// Fills η_jk for every ordered pair of distinct devices in `active`.
    pub fn compute(
        active: &[usize],
        fading: &FadingMatrix<T>,
        tx_power: T,
        gains: &[T],
    ) -> Result<Self, PhyError> {
        let mut terms = Self::zeros(fading.num_devices());
        for &k in active {
            for &j in active {
                if j != k {
                    let v = cross_interference(fading.device(k), fading.device(j), tx_power, gains[j])?;
                    terms.set(j, k, v);
                }
            }
        }
        Ok(terms)
    }

    /// Interference of `interferer` on `target`.
    pub fn get(&self, interferer: usize, target: usize) -> T {
        self.values[interferer * self.num_devices + target]
    }

    pub fn set(&mut self, interferer: usize, target: usize, value: T) {
        self.values[interferer * self.num_devices + target] = value;
    }
}

/// SINR of `target` under SIC: devices earlier in `order` interfere only if
/// they were not decoded, later devices always interfere.
///
/// `decoded` and `received` are indexed by device id. Panics if `target` is
/// not in `order`.
pub fn sic_sinr<T: Real>(
    target: usize,
    order: &[usize],
    decoded: &[bool],
    received: &[T],
    cross: &CrossTerms<T>,
    noise_power: T,
) -> T {
    let rank = order
        .iter()
        .position(|&k| k == target)
        .expect("target must be in the decoding order");
    let earlier: T = order[..rank]
        .iter()
        .filter(|&&j| !decoded[j])
        .map(|&j| cross.get(j, target))
        .sum();
    let later: T = order[rank + 1..].iter().map(|&j| cross.get(j, target)).sum();
    received[target] / (earlier + later + noise_power)
}

/// SINR at the combiner output without any cancellation.
pub fn no_sic_sinr<T: Real>(
    target: usize,
    active: &[usize],
    received: &[T],
    cross: &CrossTerms<T>,
    noise_power: T,
) -> T {
    let interference: T = active
        .iter()
        .filter(|&&j| j != target)
        .map(|&j| cross.get(j, target))
        .sum();
    received[target] / (interference + noise_power)
}
