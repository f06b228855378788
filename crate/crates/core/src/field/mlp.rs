use alloc::vec::Vec;

use rand::Rng;

use crate::diff::Real;

/// Fully connected network with `tanh` hidden layers and a linear output.
///
/// Parameters live outside the struct as one flat slice so the same
/// network can be evaluated with plain floats or recorded variables.
/// Layout per layer: weights `out × in` row-major, then `out` biases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mlp {
    sizes: Vec<usize>,
}

impl Mlp {
    /// `sizes = [input, hidden…, output]`; needs at least two entries.
    pub fn new(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        Mlp {
            sizes: sizes.to_vec(),
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        for w in self.sizes.windows(2) {
            let bound = libm::sqrt(6.0 / (w[0] + w[1]) as f64);
            p.extend((0..w[0] * w[1]).map(|_| rng.random_range(-bound..bound)));
            p.extend(core::iter::repeat_n(0.0, w[1]));
        }
        p
    }

    pub fn forward<S: Real>(&self, params: &[S], x: &[S]) -> Vec<S> {
        debug_assert_eq!(params.len(), self.num_params());
        debug_assert_eq!(x.len(), self.input_dim());
        let mut h = x.to_vec();
        let mut off = 0;
        let last = self.sizes.len() - 2;
        for (li, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &params[off..off + n_in * n_out];
            let bias = &params[off + n_in * n_out..off + n_in * n_out + n_out];
            off += n_in * n_out + n_out;
            h = (0..n_out)
                .map(|o| {
                    let z = S::dot(&weights[o * n_in..(o + 1) * n_in], &h) + bias[o];
                    if li == last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn one_hidden_unit_by_hand() {
        // 1 → 1 → 1: y = w2·tanh(w1·x + b1) + b2
        let net = Mlp::new(&[1, 1, 1]);
        let p = [0.5, 0.1, -2.0, 0.3];
        let y = net.forward(&p, &[1.2]);
        let want = -2.0 * libm::tanh(0.5 * 1.2 + 0.1) + 0.3;
        assert!((y[0] - want).abs() < 1e-15);
        assert_eq!(net.num_params(), 4);
    }

    #[test]
    fn zero_params_give_zero_output() {
        let net = Mlp::new(&[3, 8, 3]);
        let p = vec![0.0; net.num_params()];
        assert_eq!(net.forward(&p, &[1.0, 2.0, 3.0]), vec![0.0; 3]);
    }
}
