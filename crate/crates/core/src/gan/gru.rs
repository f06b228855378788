use alloc::vec::Vec;

use rand::Rng;

use crate::diff::Real;

/// Gated recurrent cell.
///
/// Layout: input weights `3h × n` (update, reset, candidate), recurrent
/// weights as three `h × h` blocks in the same order, then `3h` biases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gru {
    input: usize,
    hidden: usize,
}

impl Gru {
    pub fn new(input: usize, hidden: usize) -> Self {
        Gru { input, hidden }
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn num_params(&self) -> usize {
        3 * self.hidden * (self.input + self.hidden + 1)
    }

    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let (n, h) = (self.input, self.hidden);
        let bound = 1.0 / libm::sqrt(h as f64);
        (0..3 * h * (n + h))
            .map(|_| rng.random_range(-bound..bound))
            .chain(core::iter::repeat_n(0.0, 3 * h))
            .collect()
    }

    /// Recurrent block `k` (0 update, 1 reset, 2 candidate).
    pub fn recurrent<'a, S>(&self, params: &'a [S], k: usize) -> &'a [S] {
        let (n, h) = (self.input, self.hidden);
        let start = 3 * h * n + k * h * h;
        &params[start..start + h * h]
    }

    /// One step with the recurrent blocks supplied separately, so callers
    /// can substitute normalized copies.
    pub fn step<S: Real>(&self, params: &[S], recurrent: [&[S]; 3], h: &[S], x: &[S]) -> Vec<S> {
        let (n, hd) = (self.input, self.hidden);
        debug_assert_eq!(x.len(), n);
        let w = &params[..3 * hd * n];
        let b = &params[3 * hd * (n + hd)..];
        let gate = |k: usize, j: usize| {
            let r = k * hd + j;
            (
                S::dot(&w[r * n..(r + 1) * n], x) + b[r],
                S::dot(&recurrent[k][j * hd..(j + 1) * hd], h),
            )
        };
        (0..hd)
            .map(|j| {
                let (zx, zh) = gate(0, j);
                let (rx, rh) = gate(1, j);
                let (nx, nh) = gate(2, j);
                let z = (zx + zh).sigmoid();
                let r = (rx + rh).sigmoid();
                let cand = (nx + r * nh).tanh();
                cand + z * (h[j] - cand)
            })
            .collect()
    }
}
