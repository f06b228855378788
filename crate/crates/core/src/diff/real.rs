use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by plain floats, forward-mode duals and tape
/// variables.
///
/// Every model in this crate is written once against `Real` and evaluated
/// with whichever scalar the caller needs: `f64` for inference,
/// [`Dual`](super::Dual) for exact spatial derivatives, [`Var`](super::Var)
/// for parameter gradients, and `Dual<Var, 3>` when a loss depends on a
/// spatial derivative.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// False only for `f64`; lets non-differentiable lookups refuse to run
    /// under a derivative-carrying scalar.
    const TRACKS_DERIVATIVES: bool;

    fn cst(v: f64) -> Self;
    fn val(&self) -> f64;

    fn tanh(self) -> Self;
    fn sigmoid(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    /// Right-continuous subgradient: ties pass the derivative to `self`.
    fn max(self, other: Self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn min(self, other: Self) -> Self {
        -((-self).max(-other))
    }

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }

    fn square(self) -> Self {
        self * self
    }

    fn is_finite(&self) -> bool {
        self.val().is_finite()
    }

    fn sum(xs: &[Self]) -> Self {
        xs.iter().fold(Self::zero(), |acc, &x| acc + x)
    }

    /// `Σ a_i b_i`. Tape scalars record this as a single fused node.
    fn dot(a: &[Self], b: &[Self]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(Self::zero(), |acc, (&x, &y)| acc + x * y)
    }

    /// `Σ c_i x_i` with constant coefficients.
    fn lin(coeffs: &[f64], xs: &[Self]) -> Self {
        debug_assert_eq!(coeffs.len(), xs.len());
        coeffs
            .iter()
            .zip(xs)
            .fold(Self::zero(), |acc, (&c, &x)| acc + x.scale(c))
    }
}

impl Real for f64 {
    const TRACKS_DERIVATIVES: bool = false;

    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn val(&self) -> f64 {
        *self
    }
    #[inline]
    fn tanh(self) -> Self {
        libm::tanh(self)
    }
    #[inline]
    fn sigmoid(self) -> Self {
        sigmoid(self)
    }
    #[inline]
    fn exp(self) -> Self {
        libm::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        libm::log(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn dot(a: &[Self], b: &[Self]) -> Self {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
    fn lin(coeffs: &[f64], xs: &[Self]) -> Self {
        Self::dot(coeffs, xs)
    }
}

/// Logistic function, evaluated without overflow for large `|x|`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Lifts a slice of plain values into constants of `S`.
pub fn lift<S: Real>(xs: &[f64]) -> alloc::vec::Vec<S> {
    xs.iter().map(|&x| S::cst(x)).collect()
}

pub fn lift3<S: Real>(x: [f64; 3]) -> [S; 3] {
    [S::cst(x[0]), S::cst(x[1]), S::cst(x[2])]
}

pub fn values3<S: Real>(x: &[S; 3]) -> [f64; 3] {
    [x[0].val(), x[1].val(), x[2].val()]
}
