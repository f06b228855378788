use alloc::vec::Vec;

use super::TemporalError;
use crate::diff::Real;
use crate::field::Mlp;

/// Largest RK4 substep in seconds.
pub const MAX_SUBSTEP: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct LatentState<S: Real = f64> {
    pub z: Vec<S>,
    pub t: f64,
}

/// Integrates `dz/dt = f(z, t)` to `t_next` with classical RK4 on the
/// fewest equal substeps not exceeding [`MAX_SUBSTEP`].
pub fn latent_ode_integrate<S, F>(
    f: F,
    state: &LatentState<S>,
    t_next: f64,
) -> Result<LatentState<S>, TemporalError>
where
    S: Real,
    F: Fn(&[S], f64) -> Vec<S>,
{
    let span = t_next - state.t;
    if !(span >= 0.0) {
        return Err(TemporalError::Domain(
            "target time precedes the current state",
        ));
    }
    let steps = libm::ceil(span / MAX_SUBSTEP - 1e-12).max(1.0) as usize;
    integrate_rk4(f, state, t_next, steps)
}

/// RK4 with a fixed number of equal substeps.
pub fn integrate_rk4<S, F>(
    f: F,
    state: &LatentState<S>,
    t_next: f64,
    steps: usize,
) -> Result<LatentState<S>, TemporalError>
where
    S: Real,
    F: Fn(&[S], f64) -> Vec<S>,
{
    let span = t_next - state.t;
    if !(span >= 0.0) || steps == 0 {
        return Err(TemporalError::Domain(
            "target time precedes the current state",
        ));
    }
    let mut z = state.z.clone();
    if span == 0.0 {
        return Ok(LatentState { z, t: t_next });
    }
    let h = span / steps as f64;
    let eval = |z: &[S], t: f64| -> Result<Vec<S>, TemporalError> {
        let dz = f(z, t);
        if dz.len() != z.len() {
            return Err(TemporalError::Contract(
                "dynamics changed the state dimension",
            ));
        }
        if dz.iter().any(|v| !v.val().is_finite()) {
            return Err(TemporalError::NonFinite { t });
        }
        Ok(dz)
    };
    let axpy = |z: &[S], k: &[S], a: f64| -> Vec<S> {
        z.iter().zip(k).map(|(&z, &k)| z + k.scale(a)).collect()
    };
    for s in 0..steps {
        let t = state.t + h * s as f64;
        let k1 = eval(&z, t)?;
        let k2 = eval(&axpy(&z, &k1, 0.5 * h), t + 0.5 * h)?;
        let k3 = eval(&axpy(&z, &k2, 0.5 * h), t + 0.5 * h)?;
        let k4 = eval(&axpy(&z, &k3, h), t + h)?;
        for i in 0..z.len() {
            let incr = S::lin(&[1.0, 2.0, 2.0, 1.0], &[k1[i], k2[i], k3[i], k4[i]]).scale(h / 6.0);
            z[i] = z[i] + incr;
        }
    }
    Ok(LatentState { z, t: t_next })
}

/// Dynamics `f(z, t) = MLP([z; t])` and a linear readout `x̂ = g(z)`.
///
/// Layout: dynamics MLP, then readout weights and biases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatentOde {
    dynamics: Mlp,
    readout: Mlp,
}

impl LatentOde {
    pub fn new(latent: usize, hidden: usize, observed: usize) -> Self {
        LatentOde {
            dynamics: Mlp::new(&[latent + 1, hidden, latent]),
            readout: Mlp::new(&[latent, observed]),
        }
    }

    pub fn latent_dim(&self) -> usize {
        self.readout.input_dim()
    }

    pub fn num_params(&self) -> usize {
        self.dynamics.num_params() + self.readout.num_params()
    }

    pub fn init<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .dynamics
            .init(rng)
            .into_iter()
            .map(|w| 0.5 * w)
            .collect();
        p.extend(self.readout.init(rng));
        p
    }

    pub fn dynamics<S: Real>(&self, params: &[S], z: &[S], t: f64) -> Vec<S> {
        let mut input = z.to_vec();
        input.push(S::cst(t));
        self.dynamics
            .forward(&params[..self.dynamics.num_params()], &input)
    }

    pub fn advance<S: Real>(
        &self,
        params: &[S],
        state: &LatentState<S>,
        t_next: f64,
    ) -> Result<LatentState<S>, TemporalError> {
        latent_ode_integrate(|z, t| self.dynamics(params, z, t), state, t_next)
    }

    pub fn decode<S: Real>(&self, params: &[S], z: &[S]) -> Vec<S> {
        self.readout
            .forward(&params[self.dynamics.num_params()..], z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_dynamics_is_identity() {
        let s = LatentState {
            z: vec![1.0, -2.0],
            t: 0.3,
        };
        let out = latent_ode_integrate(|z: &[f64], _| vec![0.0; z.len()], &s, 5.0).unwrap();
        assert_eq!(out.z, s.z);
        assert_eq!(out.t, 5.0);
    }

    #[test]
    fn exponential_growth() {
        let s = LatentState {
            z: vec![1.0],
            t: 0.0,
        };
        let out = latent_ode_integrate(|z: &[f64], _| vec![z[0]], &s, 1.0).unwrap();
        assert!((out.z[0] - libm::exp(1.0)).abs() < 1e-5);
    }

    #[test]
    fn non_finite_dynamics_report_time() {
        let s = LatentState {
            z: vec![1.0],
            t: 0.0,
        };
        let err = latent_ode_integrate(
            |_: &[f64], t| vec![if t > 0.25 { f64::NAN } else { 0.0 }],
            &s,
            1.0,
        );
        assert!(matches!(err, Err(TemporalError::NonFinite { t }) if t > 0.25));
    }

    #[test]
    fn backwards_target_is_rejected() {
        let s = LatentState {
            z: vec![1.0],
            t: 1.0,
        };
        assert!(latent_ode_integrate(|z: &[f64], _| z.to_vec(), &s, 0.5).is_err());
    }
}
