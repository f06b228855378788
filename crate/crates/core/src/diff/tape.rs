//! Reverse-mode tape.
//!
//! Each recorded node stores its local partials with respect to its
//! parents at the time it is created, so the backward sweep is a single
//! pass of multiply-adds over a flat edge list. Values that do not depend
//! on any recorded input are carried as constants and never touch the tape.

use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use super::{DiffError, Real};

const CONST: u32 = u32::MAX;

#[derive(Default)]
struct Inner {
    /// `ends[i]` is one past the last edge of node `i`.
    ends: Vec<u32>,
    parents: Vec<u32>,
    partials: Vec<f64>,
}

impl Inner {
    #[inline]
    fn push(&mut self, edges: impl IntoIterator<Item = (u32, f64)>) -> u32 {
        for (p, w) in edges {
            self.parents.push(p);
            self.partials.push(w);
        }
        let idx = self.ends.len() as u32;
        self.ends.push(self.parents.len() as u32);
        idx
    }
}

/// Append-only record of primitive operations.
#[derive(Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops all nodes but keeps the allocations for the next recording.
    pub fn clear(&mut self) {
        let inner = self.inner.get_mut();
        inner.ends.clear();
        inner.parents.clear();
        inner.partials.clear();
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records an independent input.
    pub fn var(&self, value: f64) -> Var<'_> {
        let idx = self.inner.borrow_mut().push(core::iter::empty());
        Var {
            tape: Some(self),
            idx,
            val: value,
        }
    }

    pub fn vars(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    /// A value that does not depend on any recorded input.
    pub fn constant(&self, value: f64) -> Var<'_> {
        Var {
            tape: None,
            idx: CONST,
            val: value,
        }
    }

    /// Replays the tape backward from `output`.
    pub fn gradient(&self, output: Var<'_>) -> Result<Gradient, DiffError> {
        let inner = self.inner.borrow();
        if inner.ends.is_empty() {
            return Err(DiffError::EmptyRecording);
        }
        let mut adj = alloc::vec![0.0; inner.ends.len()];
        if output.idx != CONST {
            adj[output.idx as usize] = 1.0;
            for i in (0..=output.idx as usize).rev() {
                let a = adj[i];
                if a == 0.0 {
                    continue;
                }
                let start = if i == 0 {
                    0
                } else {
                    inner.ends[i - 1] as usize
                };
                let end = inner.ends[i] as usize;
                for e in start..end {
                    adj[inner.parents[e] as usize] += a * inner.partials[e];
                }
            }
        }
        Ok(Gradient { adj })
    }
}

/// Adjoints of every node of a tape with respect to one output.
pub struct Gradient {
    adj: Vec<f64>,
}

impl Gradient {
    pub fn wrt(&self, v: &Var<'_>) -> f64 {
        if v.idx == CONST {
            0.0
        } else {
            self.adj[v.idx as usize]
        }
    }

    pub fn wrt_all(&self, vs: &[Var<'_>]) -> Vec<f64> {
        vs.iter().map(|v| self.wrt(v)).collect()
    }
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    idx: u32,
    val: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.idx == CONST {
            write!(f, "Var(const {})", self.val)
        } else {
            write!(f, "Var(#{} = {})", self.idx, self.val)
        }
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.val
    }

    pub fn is_constant(&self) -> bool {
        self.idx == CONST
    }

    pub fn tape(&self) -> Option<&'t Tape> {
        self.tape
    }

    #[inline]
    fn live_tape(&self) -> &'t Tape {
        self.tape.expect("recorded variable without a tape")
    }

    #[inline]
    fn konst(&self, val: f64) -> Self {
        Var {
            tape: self.tape,
            idx: CONST,
            val,
        }
    }

    #[inline]
    fn unary(self, val: f64, partial: f64) -> Self {
        if self.idx == CONST {
            return self.konst(val);
        }
        let idx = self
            .live_tape()
            .inner
            .borrow_mut()
            .push([(self.idx, partial)]);
        Var {
            tape: self.tape,
            idx,
            val,
        }
    }

    #[inline]
    fn binary(self, o: Self, val: f64, pa: f64, pb: f64) -> Self {
        match (self.idx == CONST, o.idx == CONST) {
            (true, true) => self.konst(val),
            (false, true) => self.unary(val, pa),
            (true, false) => o.unary(val, pb),
            (false, false) => {
                let idx = self
                    .live_tape()
                    .inner
                    .borrow_mut()
                    .push([(self.idx, pa), (o.idx, pb)]);
                Var {
                    tape: self.tape,
                    idx,
                    val,
                }
            }
        }
    }
}

impl Add for Var<'_> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        self.binary(o, self.val + o.val, 1.0, 1.0)
    }
}

impl Sub for Var<'_> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        self.binary(o, self.val - o.val, 1.0, -1.0)
    }
}

impl Mul for Var<'_> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        // d(0·x) = 0 exactly, so a constant zero factor needs no node.
        if (self.idx == CONST && self.val == 0.0) || (o.idx == CONST && o.val == 0.0) {
            return self.konst(0.0);
        }
        self.binary(o, self.val * o.val, o.val, self.val)
    }
}

impl Div for Var<'_> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.val;
        let val = self.val * inv;
        self.binary(o, val, inv, -val * inv)
    }
}

impl Neg for Var<'_> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.unary(-self.val, -1.0)
    }
}

impl Real for Var<'_> {
    const TRACKS_DERIVATIVES: bool = true;

    fn cst(v: f64) -> Self {
        Var {
            tape: None,
            idx: CONST,
            val: v,
        }
    }

    fn val(&self) -> f64 {
        self.val
    }

    fn tanh(self) -> Self {
        let t = libm::tanh(self.val);
        self.unary(t, 1.0 - t * t)
    }

    fn sigmoid(self) -> Self {
        let s = super::sigmoid(self.val);
        self.unary(s, s * (1.0 - s))
    }

    fn exp(self) -> Self {
        let e = libm::exp(self.val);
        self.unary(e, e)
    }

    fn ln(self) -> Self {
        self.unary(libm::log(self.val), 1.0 / self.val)
    }

    fn sqrt(self) -> Self {
        let r = libm::sqrt(self.val);
        self.unary(r, 0.5 / r)
    }

    fn max(self, other: Self) -> Self {
        if self.val >= other.val {
            self
        } else {
            other
        }
    }

    fn scale(self, k: f64) -> Self {
        if k == 0.0 {
            return self.konst(0.0);
        }
        self.unary(self.val * k, k)
    }

    fn sum(xs: &[Self]) -> Self {
        let Some(tape) = Self::tape_of_live(xs) else {
            return Self::cst(xs.iter().map(|x| x.val).sum());
        };
        let val = xs.iter().map(|x| x.val).sum();
        let idx = tape
            .inner
            .borrow_mut()
            .push(xs.iter().filter(|x| x.idx != CONST).map(|x| (x.idx, 1.0)));
        Var {
            tape: Some(tape),
            idx,
            val,
        }
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        let tape = Self::tape_of_live(a).or_else(|| Self::tape_of_live(b));
        let val = a.iter().zip(b).map(|(x, y)| x.val * y.val).sum();
        let Some(tape) = tape else {
            return Self::cst(val);
        };
        let mut inner = tape.inner.borrow_mut();
        let mut any = false;
        for (x, y) in a.iter().zip(b) {
            if x.idx != CONST && y.val != 0.0 {
                inner.parents.push(x.idx);
                inner.partials.push(y.val);
                any = true;
            }
            if y.idx != CONST && x.val != 0.0 {
                inner.parents.push(y.idx);
                inner.partials.push(x.val);
                any = true;
            }
        }
        if !any {
            return Var::cst(val);
        }
        let idx = inner.ends.len() as u32;
        let end = inner.parents.len() as u32;
        inner.ends.push(end);
        Var {
            tape: Some(tape),
            idx,
            val,
        }
    }

    fn lin(coeffs: &[f64], xs: &[Self]) -> Self {
        debug_assert_eq!(coeffs.len(), xs.len());
        let val = coeffs.iter().zip(xs).map(|(c, x)| c * x.val).sum();
        let Some(tape) = Self::tape_of_live(xs) else {
            return Self::cst(val);
        };
        let mut edges = xs
            .iter()
            .zip(coeffs)
            .filter(|(x, &c)| x.idx != CONST && c != 0.0)
            .map(|(x, &c)| (x.idx, c))
            .peekable();
        if edges.peek().is_none() {
            return Var::cst(val);
        }
        let idx = tape.inner.borrow_mut().push(edges);
        Var {
            tape: Some(tape),
            idx,
            val,
        }
    }
}

impl<'t> Var<'t> {
    fn tape_of_live(xs: &[Self]) -> Option<&'t Tape> {
        xs.iter().find(|x| x.idx != CONST).and_then(|x| x.tape)
    }
}
