//! Second-order forward-mode jets.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to `D` real variables. Arithmetic propagates all three exactly,
//! so any composition of the supported operations yields exact first and
//! second partial derivatives (up to rounding).
//!
//! The scalar type may be real (`f64`) or complex (`Complex64`). Complex jets
//! are still differentiated with respect to *real* variables, which makes
//! `re`, `im` and `conj` componentwise operations.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Minimal field-like scalar used by [`Jet`].
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn powi(self, n: i32) -> Self {
        Complex64::powi(&self, n)
    }
    fn powf(self, p: f64) -> Self {
        Complex64::powf(self, p)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

/// Value, gradient and Hessian of a function of `D` real variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T, const D: usize> {
    pub v: T,
    pub g: [T; D],
    pub h: [[T; D]; D],
}

pub type Jet2 = Jet<f64, 2>;
pub type Jet3 = Jet<f64, 3>;
/// Complex-valued jet over the plane coordinates `(x, y)`.
pub type CJet = Jet<Complex64, 2>;

impl<T: Scalar, const D: usize> Jet<T, D> {
    pub fn constant(v: T) -> Self {
        Jet {
            v,
            g: [T::zero(); D],
            h: [[T::zero(); D]; D],
        }
    }

    /// The coordinate function `x_i` evaluated at `value`.
    pub fn variable(i: usize, value: T) -> Self {
        let mut j = Self::constant(value);
        j.g[i] = T::one();
        j
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    /// Apply a univariate function given its value and first two derivatives
    /// at `self.v`.
    pub fn chain(&self, f0: T, f1: T, f2: T) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..D {
            out.g[i] = f1 * self.g[i];
            for k in 0..D {
                out.h[i][k] = f2 * self.g[i] * self.g[k] + f1 * self.h[i][k];
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let mut out = *self;
        out.v = f(self.v);
        for i in 0..D {
            out.g[i] = f(self.g[i]);
            for k in 0..D {
                out.h[i][k] = f(self.h[i][k]);
            }
        }
        out
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn recip(&self) -> Self {
        let r = T::one() / self.v;
        let r2 = r * r;
        self.chain(r, -r2, T::from_f64(2.0) * r2 * r)
    }

    pub fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Self {
        let r = T::one() / self.v;
        self.chain(self.v.ln(), r, -(r * r))
    }

    pub fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        let d1 = T::from_f64(0.5) / s;
        let d2 = -(d1 / (T::from_f64(2.0) * self.v));
        self.chain(s, d1, d2)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s, -c)
    }

    pub fn powi(&self, n: i32) -> Self {
        match n {
            0 => Self::constant(T::one()),
            1 => *self,
            _ => {
                let nf = T::from_f64(n as f64);
                let nm1 = T::from_f64((n - 1) as f64);
                let p2 = if n == 2 { T::one() } else { self.v.powi(n - 2) };
                let p1 = p2 * self.v;
                self.chain(p1 * self.v, nf * p1, nf * nm1 * p2)
            }
        }
    }

    pub fn powf(&self, p: f64) -> Self {
        let pm2 = self.v.powf(p - 2.0);
        let pm1 = pm2 * self.v;
        self.chain(
            pm1 * self.v,
            T::from_f64(p) * pm1,
            T::from_f64(p * (p - 1.0)) * pm2,
        )
    }

    pub fn laplacian(&self) -> T {
        let mut acc = T::zero();
        for i in 0..D {
            acc = acc + self.h[i][i];
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.g.iter().all(|x| x.is_finite())
            && self.h.iter().flatten().all(|x| x.is_finite())
    }
}

impl<const D: usize> Jet<f64, D> {
    pub fn to_complex(&self) -> Jet<Complex64, D> {
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut out = Jet::<Complex64, D>::constant(c(self.v));
        for i in 0..D {
            out.g[i] = c(self.g[i]);
            for k in 0..D {
                out.h[i][k] = c(self.h[i][k]);
            }
        }
        out
    }
}

impl<const D: usize> Jet<Complex64, D> {
    pub fn from_parts(re: &Jet<f64, D>, im: &Jet<f64, D>) -> Self {
        let c = |a: f64, b: f64| Complex64::new(a, b);
        let mut out = Jet::<Complex64, D>::constant(c(re.v, im.v));
        for i in 0..D {
            out.g[i] = c(re.g[i], im.g[i]);
            for k in 0..D {
                out.h[i][k] = c(re.h[i][k], im.h[i][k]);
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    pub fn re(&self) -> Self {
        self.map(|x| Complex64::new(x.re, 0.0))
    }

    pub fn im(&self) -> Self {
        self.map(|x| Complex64::new(x.im, 0.0))
    }
}

impl CJet {
    /// `f_z = f_x - i f_y` (no factor 1/2).
    pub fn dz(&self) -> Complex64 {
        self.g[0] - Complex64::i() * self.g[1]
    }

    /// `f_zbar = f_x + i f_y` (no factor 1/2).
    pub fn dzbar(&self) -> Complex64 {
        self.g[0] + Complex64::i() * self.g[1]
    }
}

impl<T: Scalar, const D: usize> Add for Jet<T, D> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        out.v = self.v + o.v;
        for i in 0..D {
            out.g[i] = self.g[i] + o.g[i];
            for k in 0..D {
                out.h[i][k] = self.h[i][k] + o.h[i][k];
            }
        }
        out
    }
}

impl<T: Scalar, const D: usize> Sub for Jet<T, D> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Scalar, const D: usize> Neg for Jet<T, D> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl<T: Scalar, const D: usize> Mul for Jet<T, D> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.v * o.v);
        for i in 0..D {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for k in 0..D {
                out.h[i][k] = self.h[i][k] * o.v
                    + self.v * o.h[i][k]
                    + self.g[i] * o.g[k]
                    + self.g[k] * o.g[i];
            }
        }
        out
    }
}

impl<T: Scalar, const D: usize> Div for Jet<T, D> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}
