//! Scalars that carry exact first and second derivatives.
//!
//! Every field that feeds a curvature computation is written once, generic
//! over [`Real`], and evaluated either with plain `f64` or with a [`Jet`]
//! seeded on chart coordinates. A `Jet<N>` propagates the value, gradient and
//! Hessian with respect to `N` independent variables through every operation,
//! so metric second derivatives come out exact up to rounding.

use core::ops::{Add, Div, Mul, Neg, Sub};

/// Minimal real-number interface used by generic field code.
pub trait Real:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    /// Primal value, with derivative information dropped.
    fn value(&self) -> f64;

    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn acos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn tanh(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn recip(self) -> Self;

    fn scale(self, c: f64) -> Self {
        self * Self::cst(c)
    }
    fn shift(self, c: f64) -> Self {
        self + Self::cst(c)
    }
}

impl Real for f64 {
    #[inline]
    fn cst(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn sin(self) -> Self {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        libm::cos(self)
    }
    #[inline]
    fn tan(self) -> Self {
        libm::tan(self)
    }
    #[inline]
    fn acos(self) -> Self {
        libm::acos(self)
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
    fn ln_1p(self) -> Self {
        libm::log1p(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        libm::tanh(self)
    }
    #[inline]
    fn abs(self) -> Self {
        libm::fabs(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        libm::pow(self, n as f64)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// Second-order forward jet in `N` variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        Jet { v, g: [0.0; N], h: [[0.0; N]; N] }
    }

    /// The coordinate function `x_i` evaluated at `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// Seeds all `N` coordinates at `x`.
    pub fn seed(x: &[f64; N]) -> [Self; N] {
        core::array::from_fn(|i| Self::variable(x[i], i))
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.v`.
    #[inline]
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet { v: f0, g: [0.0; N], h: [[0.0; N]; N] };
        for i in 0..N {
            out.g[i] = f1 * self.g[i];
            for j in 0..N {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..N {
            self.g[i] += o.g[i];
            for j in 0..N {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        self.v = -self.v;
        for i in 0..N {
            self.g[i] = -self.g[i];
            for j in 0..N {
                self.h[i][j] = -self.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut out = Jet { v: self.v * o.v, g: [0.0; N], h: [[0.0; N]; N] };
        for i in 0..N {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..N {
                out.h[i][j] = self.h[i][j] * o.v + self.v * o.h[i][j] + self.g[i] * o.g[j] + o.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const N: usize> Real for Jet<N> {
    fn cst(c: f64) -> Self {
        Self::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = libm::sqrt(self.v);
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn sin(self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.chain(c, -s, -c)
    }
    fn tan(self) -> Self {
        let t = libm::tan(self.v);
        let d = 1.0 + t * t;
        self.chain(t, d, 2.0 * t * d)
    }
    fn acos(self) -> Self {
        let x = self.v;
        let q = 1.0 - x * x;
        let r = libm::sqrt(q);
        self.chain(libm::acos(x), -1.0 / r, -x / (q * r))
    }
    fn exp(self) -> Self {
        let e = libm::exp(self.v);
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let x = self.v;
        self.chain(libm::log(x), 1.0 / x, -1.0 / (x * x))
    }
    fn ln_1p(self) -> Self {
        let y = 1.0 + self.v;
        self.chain(libm::log1p(self.v), 1.0 / y, -1.0 / (y * y))
    }
    fn tanh(self) -> Self {
        let t = libm::tanh(self.v);
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }
    fn abs(self) -> Self {
        // sign(0) = +1 keeps jets of even compositions such as V(|x|) exact at 0
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }
    fn powi(self, n: i32) -> Self {
        let x = self.v;
        let nf = n as f64;
        self.chain(libm::pow(x, nf), nf * libm::pow(x, nf - 1.0), nf * (nf - 1.0) * libm::pow(x, nf - 2.0))
    }
    fn recip(self) -> Self {
        let x = self.v;
        let r = 1.0 / x;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}
