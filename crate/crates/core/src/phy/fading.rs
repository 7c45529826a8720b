use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{PhyError, SPEED_OF_LIGHT};
use crate::Real;

/// Frame-to-frame fading correlation from Jakes' model: J0(2π v f_c T_f / c).
pub fn jakes_coefficient(speed: f64, carrier: f64, frame_duration: f64) -> f64 {
    let arg = 2.0 * std::f64::consts::PI * speed * carrier * frame_duration / SPEED_OF_LIGHT;
    libm::j0(arg)
}

/// Coherence time c / (8 f_c v) in seconds.
pub fn coherence_time(carrier: f64, speed: f64) -> Result<f64, PhyError> {
    if speed <= 0.0 {
        return Err(PhyError::UndefinedCoherence);
    }
    Ok(SPEED_OF_LIGHT / (8.0 * carrier * speed))
}

/// Draws z ~ CN(0, variance).
fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let scale = (variance / T::lit(2.0)).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::lit(re) * scale, T::lit(im) * scale)
}

/// Small-scale fading of every (antenna, device) pair, evolved by a first-order
/// Gauss-Markov process with a per-device correlation coefficient.
///
/// Coefficients are stored device-major so that `device(k)` is the channel
/// vector h_k seen across the BS antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingMatrix<T> {
    num_antennas: usize,
    coefficients: Vec<Complex<T>>,
    correlation: Vec<T>,
}

impl<T: Real> FadingMatrix<T> {
    /// Stationary draw h_ki ~ CN(0, 1).
    pub fn draw<R: Rng + ?Sized>(num_antennas: usize, correlation: Vec<T>, rng: &mut R) -> Self {
        assert!(
            correlation.iter().all(|a| a.abs() <= T::one()),
            "fading correlation must lie in [-1, 1]"
        );
        let len = num_antennas * correlation.len();
        let coefficients = (0..len).map(|_| complex_normal(rng, T::one())).collect();
        Self { num_antennas, coefficients, correlation }
    }

    /// Builds a matrix from explicit coefficients laid out device-major.
    pub fn from_parts(
        num_antennas: usize,
        coefficients: Vec<Complex<T>>,
        correlation: Vec<T>,
    ) -> Result<Self, PhyError> {
        if coefficients.len() != num_antennas * correlation.len() {
            return Err(PhyError::InvalidConfig(format!(
                "{} coefficients do not fill {} antennas x {} devices",
                coefficients.len(),
                num_antennas,
                correlation.len()
            )));
        }
        if correlation.iter().any(|a| a.abs() > T::one()) {
            return Err(PhyError::InvalidConfig("fading correlation outside [-1, 1]".into()));
        }
        Ok(Self { num_antennas, coefficients, correlation })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_devices(&self) -> usize {
        self.correlation.len()
    }

    pub fn correlation(&self) -> &[T] {
        &self.correlation
    }

    pub fn device(&self, k: usize) -> &[Complex<T>] {
        &self.coefficients[k * self.num_antennas..(k + 1) * self.num_antennas]
    }

    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coefficients
    }

    /// One Gauss-Markov step: h ← ā h + z with z ~ CN(0, 1 − ā²), drawn
    /// independently for every antenna and device.
    pub fn evolve<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n_a = self.num_antennas;
        for (k, &a) in self.correlation.iter().enumerate() {
            let innovation = T::one() - a * a;
            for h in &mut self.coefficients[k * n_a..(k + 1) * n_a] {
                let z = complex_normal(rng, innovation);
                *h = *h * a + z;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Power series of J0, summed until terms vanish.
    fn j0_series(x: f64) -> f64 {
        let q = -(x * x) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..200 {
            term *= q / ((m * m) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn jakes_static_device_is_fully_correlated() {
        assert_eq!(jakes_coefficient(0.0, 4e9, 178.35e-6), 1.0);
    }

    #[test]
    fn jakes_matches_series_at_reference_speed() {
        let speed = 3.0 / 3.6;
        let got = jakes_coefficient(speed, 4e9, 178.35e-6);
        let arg = 2.0 * std::f64::consts::PI * speed * 4e9 * 178.35e-6 / SPEED_OF_LIGHT;
        assert!((got - j0_series(arg)).abs() < 1e-14, "{got} vs {}", j0_series(arg));
    }

    #[test]
    fn jakes_vanishes_at_first_bessel_zero() {
        let zero = 2.404_825_557_695_773;
        let (fc, tf) = (4e9, 178.35e-6);
        let speed = zero * SPEED_OF_LIGHT / (2.0 * std::f64::consts::PI * fc * tf);
        let got = jakes_coefficient(speed, fc, tf);
        assert!(got.abs() < 1e-4);
        assert!(j0_series(zero).abs() < 1e-10);
    }

    #[test]
    fn coherence_time_reproduces_reference_values() {
        let tc = coherence_time(4e9, 3.0 / 3.6).unwrap();
        assert_eq!(format!("{:.1}", tc * 1e3), "11.2");
        assert_eq!((tc / 178.35e-6).round(), 63.0);
        let doubled = coherence_time(4e9, 6.0 / 3.6).unwrap();
        assert!((doubled - tc / 2.0).abs() < 1e-15);
        assert_eq!(coherence_time(4e9, 0.0), Err(PhyError::UndefinedCoherence));
    }

    #[test]
    fn unit_correlation_freezes_the_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut h = FadingMatrix::<f64>::draw(4, vec![1.0; 3], &mut rng);
        let before = h.clone();
        h.evolve(&mut rng);
        assert_eq!(h, before);
    }

    #[test]
    fn zero_correlation_is_memoryless() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut h = FadingMatrix::<f64>::draw(1, vec![0.0; 20_000], &mut rng);
        let before = h.clone();
        h.evolve(&mut rng);
        let n = h.num_devices() as f64;
        let cross: f64 = (0..h.num_devices())
            .map(|k| (h.device(k)[0] * before.device(k)[0].conj()).re)
            .sum::<f64>()
            / n;
        let power: f64 = h.coefficients().iter().map(|c| c.norm_sqr()).sum::<f64>() / n;
        assert!(cross.abs() < 0.03, "cross-correlation {cross}");
        assert!((power - 1.0).abs() < 0.03, "power {power}");
    }

    #[test]
    fn single_chain_autocorrelation_matches_coefficient() {
        let a = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut h = FadingMatrix::<f64>::draw(1, vec![a], &mut rng);
        let (mut num, mut den, mut power) = (0.0, 0.0, 0.0);
        let steps = 100_000;
        let mut prev = h.device(0)[0].re;
        for _ in 0..steps {
            h.evolve(&mut rng);
            let cur = h.device(0)[0];
            num += cur.re * prev;
            den += prev * prev;
            power += cur.norm_sqr();
            prev = cur.re;
        }
        assert!((num / den - a).abs() < 0.01);
        assert!((power / steps as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn f32_fading_evolves() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut h = FadingMatrix::<f32>::draw(2, vec![0.9f32; 2], &mut rng);
        h.evolve(&mut rng);
        assert!(h.coefficients().iter().all(|c| c.re.is_finite() && c.im.is_finite()));
    }

    #[test]
    fn from_parts_rejects_bad_shapes() {
        let coeffs = vec![Complex::new(1.0, 0.0); 3];
        assert!(FadingMatrix::from_parts(2, coeffs.clone(), vec![0.5, 0.5]).is_err());
        assert!(FadingMatrix::from_parts(3, coeffs, vec![1.5]).is_err());
    }
}
