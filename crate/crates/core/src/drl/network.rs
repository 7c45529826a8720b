use rand::Rng;

use super::DrlError;
use crate::Real;

/// Squashing applied to the last layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    /// One independent probability per output (branch heads).
    Sigmoid,
    /// Raw affine output (value head).
    Identity,
}

/// Dense network with ReLU hidden layers, parameters stored in one flat vector.
///
/// Layer `l` maps `sizes[l]` inputs to `sizes[l + 1]` outputs; its weights are
/// stored row-major (one row per output) followed by its biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    sizes: Vec<usize>,
    output: OutputActivation,
    params: Vec<T>,
}

/// Activations recorded by [`Network::forward_cached`].
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    /// Input followed by every hidden layer's post-ReLU activation.
    pub activations: Vec<Vec<T>>,
    /// Pre-activation of the last layer.
    pub logits: Vec<T>,
    /// Network output after the output activation.
    pub output: Vec<T>,
}

fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl<T: Real> Network<T> {
    /// All parameters zero.
    pub fn zeros(sizes: &[usize], output: OutputActivation) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|&s| s > 0), "network needs positive layer sizes");
        Self { sizes: sizes.to_vec(), output, params: vec![T::zero(); param_count(sizes)] }
    }

    /// Weights uniform in ±1/√fan_in, biases zero.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], output: OutputActivation, rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes, output);
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut net.params[offset..offset + fan_in * fan_out] {
                *p = T::lit(rng.random_range(-bound..bound));
            }
            offset += fan_in * fan_out + fan_out;
        }
        net
    }

    pub fn from_params(sizes: &[usize], output: OutputActivation, params: Vec<T>) -> Result<Self, DrlError> {
        let expected = param_count(sizes);
        if params.len() != expected {
            return Err(DrlError::Dimension { what: "parameter vector", expected, got: params.len() });
        }
        Ok(Self { sizes: sizes.to_vec(), output, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    fn check_input(&self, x: &[T]) -> Result<(), DrlError> {
        if x.len() != self.input_size() {
            return Err(DrlError::Dimension { what: "network input", expected: self.input_size(), got: x.len() });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>, DrlError> {
        Ok(self.forward_cached(x)?.output)
    }

    pub fn forward_cached(&self, x: &[T]) -> Result<ForwardCache<T>, DrlError> {
        self.check_input(x)?;
        let layers = self.sizes.len() - 1;
        let mut activations = vec![x.to_vec()];
        let mut offset = 0;
        let mut logits = Vec::new();
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let biases = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let input = &activations[l];
            let z: Vec<T> = (0..n_out)
                .map(|o| {
                    let row = &weights[o * n_in..(o + 1) * n_in];
                    row.iter().zip(input).fold(biases[o], |acc, (&w, &a)| acc + w * a)
                })
                .collect();
            offset += n_in * n_out + n_out;
            if l + 1 < layers {
                activations.push(z.into_iter().map(|v| v.max(T::zero())).collect());
            } else {
                logits = z;
            }
        }
        let output = match self.output {
            OutputActivation::Sigmoid => logits.iter().map(|&z| sigmoid(z)).collect(),
            OutputActivation::Identity => logits.clone(),
        };
        Ok(ForwardCache { activations, logits, output })
    }

    /// Accumulates into `grads` the parameter gradient of a loss whose
    /// derivative with respect to the last layer's pre-activation is `grad_logits`.
    pub fn backward(&self, cache: &ForwardCache<T>, grad_logits: &[T], grads: &mut [T]) {
        assert_eq!(grads.len(), self.params.len(), "gradient buffer size");
        assert_eq!(grad_logits.len(), self.output_size(), "output gradient size");
        let layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(layers);
        let mut offset = 0;
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }
        let mut delta = grad_logits.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let base = offsets[l];
            let input = &cache.activations[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == T::zero() {
                    continue;
                }
                let row = &mut grads[base + o * n_in..base + (o + 1) * n_in];
                for (g, &a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
                grads[base + n_in * n_out + o] += d;
            }
            if l == 0 {
                break;
            }
            let weights = &self.params[base..base + n_in * n_out];
            let mut prev = vec![T::zero(); n_in];
            for (o, &d) in delta.iter().enumerate() {
                if d == T::zero() {
                    continue;
                }
                for (p, &w) in prev.iter_mut().zip(&weights[o * n_in..(o + 1) * n_in]) {
                    *p += d * w;
                }
            }
            for (p, &a) in prev.iter_mut().zip(input) {
                if a <= T::zero() {
                    *p = T::zero();
                }
            }
            delta = prev;
        }
    }
}
