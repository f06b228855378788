//! Forward-mode dual numbers with `N` seeded directions.
//!
//! `Dual { v, d }` carries a value and its partial derivatives along `N`
//! directions. The scalar type `S` is itself generic, so `Dual<Var, 3>`
//! records the spatial derivatives on a reverse-mode tape and a loss built
//! from a curl can be differentiated with respect to parameters.

use core::ops::{Add, Div, Mul, Neg, Sub};

use super::Real;

#[derive(Clone, Copy, Debug)]
pub struct Dual<S: Real, const N: usize> {
    pub v: S,
    pub d: [S; N],
}

impl<S: Real, const N: usize> Dual<S, N> {
    pub fn constant(v: S) -> Self {
        Dual {
            v,
            d: [S::zero(); N],
        }
    }

    /// Value seeded along direction `k`.
    pub fn seeded(v: S, k: usize) -> Self {
        let mut d = [S::zero(); N];
        d[k] = S::one();
        Dual { v, d }
    }

    #[inline]
    fn chain(self, v: S, slope: S) -> Self {
        Dual {
            v,
            d: self.d.map(|x| x * slope),
        }
    }
}

impl<S: Real, const N: usize> Add for Dual<S, N> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a = *a + b;
        }
        Dual { v: self.v + o.v, d }
    }
}

impl<S: Real, const N: usize> Sub for Dual<S, N> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a = *a - b;
        }
        Dual { v: self.v - o.v, d }
    }
}

impl<S: Real, const N: usize> Mul for Dual<S, N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a = S::dot(&[*a, self.v], &[o.v, b]);
        }
        Dual { v: self.v * o.v, d }
    }
}

impl<S: Real, const N: usize> Div for Dual<S, N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let v = self.v / o.v;
        let inv = S::one() / o.v;
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a = (*a - v * b) * inv;
        }
        Dual { v, d }
    }
}

impl<S: Real, const N: usize> Neg for Dual<S, N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual {
            v: -self.v,
            d: self.d.map(|x| -x),
        }
    }
}

impl<S: Real, const N: usize> Real for Dual<S, N> {
    const TRACKS_DERIVATIVES: bool = true;

    fn cst(v: f64) -> Self {
        Self::constant(S::cst(v))
    }

    fn val(&self) -> f64 {
        self.v.val()
    }

    fn tanh(self) -> Self {
        let t = self.v.tanh();
        self.chain(t, S::one() - t * t)
    }

    fn sigmoid(self) -> Self {
        let s = self.v.sigmoid();
        self.chain(s, s * (S::one() - s))
    }

    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }

    fn ln(self) -> Self {
        let inv = S::one() / self.v;
        self.chain(self.v.ln(), inv)
    }

    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, S::cst(0.5) / r)
    }

    fn max(self, other: Self) -> Self {
        if self.v.val() >= other.v.val() {
            self
        } else {
            other
        }
    }

    fn scale(self, k: f64) -> Self {
        Dual {
            v: self.v.scale(k),
            d: self.d.map(|x| x.scale(k)),
        }
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        let n = a.len();
        let mut lhs = alloc::vec::Vec::with_capacity(2 * n);
        let mut rhs = alloc::vec::Vec::with_capacity(2 * n);
        lhs.extend(a.iter().map(|x| x.v));
        rhs.extend(b.iter().map(|x| x.v));
        let v = S::dot(&lhs, &rhs);
        let mut d = [S::zero(); N];
        for (k, dk) in d.iter_mut().enumerate() {
            lhs.clear();
            rhs.clear();
            for (x, y) in a.iter().zip(b) {
                lhs.push(x.d[k]);
                rhs.push(y.v);
                lhs.push(x.v);
                rhs.push(y.d[k]);
            }
            *dk = S::dot(&lhs, &rhs);
        }
        Dual { v, d }
    }

    fn lin(coeffs: &[f64], xs: &[Self]) -> Self {
        let mut buf: alloc::vec::Vec<S> = xs.iter().map(|x| x.v).collect();
        let v = S::lin(coeffs, &buf);
        let mut d = [S::zero(); N];
        for (k, dk) in d.iter_mut().enumerate() {
            for (slot, x) in buf.iter_mut().zip(xs) {
                *slot = x.d[k];
            }
            *dk = S::lin(coeffs, &buf);
        }
        Dual { v, d }
    }
}
