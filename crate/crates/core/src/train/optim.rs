use alloc::vec::Vec;

/// Adam with optional decoupled weight decay.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            m: alloc::vec![0.0; n],
            v: alloc::vec![0.0; n],
            step: 0,
        }
    }

    /// AdamW with the given betas and decay.
    pub fn adamw(n: usize, lr: f64, betas: (f64, f64), weight_decay: f64) -> Self {
        Adam {
            beta1: betas.0,
            beta2: betas.1,
            weight_decay,
            ..Adam::new(n, lr)
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        self.step += 1;
        let b1t = 1.0 - libm::pow(self.beta1, self.step as f64);
        let b2t = 1.0 - libm::pow(self.beta2, self.step as f64);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / b1t;
            let vh = self.v[i] / b2t;
            params[i] -=
                self.lr * (mh / (libm::sqrt(vh) + self.eps) + self.weight_decay * params[i]);
        }
    }
}

/// Rescales `grad` in place so its Euclidean norm is at most `max_norm`;
/// returns the norm before clipping.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = libm::sqrt(grad.iter().map(|g| g * g).sum::<f64>());
    if norm > max_norm {
        let k = max_norm / norm;
        for g in grad.iter_mut() {
            *g *= k;
        }
    }
    norm
}
