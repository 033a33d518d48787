//! Complex quaternions (biquaternions) `q0 + q1 i + q2 j + q3 k` with
//! complex components.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CQuat {
    pub q: [Complex64; 4],
}

const fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl CQuat {
    pub const ZERO: CQuat = CQuat { q: [c(0.0); 4] };
    pub const ONE: CQuat = CQuat {
        q: [c(1.0), c(0.0), c(0.0), c(0.0)],
    };
    pub const I: CQuat = CQuat {
        q: [c(0.0), c(1.0), c(0.0), c(0.0)],
    };
    pub const J: CQuat = CQuat {
        q: [c(0.0), c(0.0), c(1.0), c(0.0)],
    };
    pub const K: CQuat = CQuat {
        q: [c(0.0), c(0.0), c(0.0), c(1.0)],
    };

    pub fn new(q0: Complex64, q1: Complex64, q2: Complex64, q3: Complex64) -> Self {
        CQuat {
            q: [q0, q1, q2, q3],
        }
    }

    pub fn real(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        CQuat {
            q: [c(q0), c(q1), c(q2), c(q3)],
        }
    }

    pub fn scalar(s: Complex64) -> Self {
        let mut q = Self::ZERO;
        q.q[0] = s;
        q
    }

    pub fn vector(v: [Complex64; 3]) -> Self {
        CQuat {
            q: [c(0.0), v[0], v[1], v[2]],
        }
    }

    /// The quaternionic unit `e_m` for `m` in `1..=3` (`i`, `j`, `k`).
    pub fn unit(m: usize) -> Self {
        match m {
            0 => Self::ONE,
            1 => Self::I,
            2 => Self::J,
            3 => Self::K,
            _ => panic!("quaternion unit index out of range: {m}"),
        }
    }

    pub fn sc(&self) -> Complex64 {
        self.q[0]
    }

    pub fn vec(&self) -> CQuat {
        let mut v = *self;
        v.q[0] = c(0.0);
        v
    }

    pub fn vec3(&self) -> [Complex64; 3] {
        [self.q[1], self.q[2], self.q[3]]
    }

    /// Scalar and vector parts; `sc + vec` recomposes `self`.
    pub fn sc_vec(&self) -> (Complex64, CQuat) {
        (self.sc(), self.vec())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CQuat {
            q: self.q.map(|x| x * s),
        }
    }

    /// Euclidean norm of the eight real coordinates.
    pub fn norm(&self) -> f64 {
        self.q.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_pure_vector(&self, tol: f64) -> bool {
        self.q[0].norm() <= tol
    }
}

/// Bilinear (not Hermitian) scalar product of the vector parts.
pub fn dot(p: &CQuat, q: &CQuat) -> Complex64 {
    p.q[1] * q.q[1] + p.q[2] * q.q[2] + p.q[3] * q.q[3]
}

impl Mul for CQuat {
    type Output = CQuat;
    fn mul(self, o: CQuat) -> CQuat {
        let [a0, a1, a2, a3] = self.q;
        let [b0, b1, b2, b3] = o.q;
        CQuat {
            q: [
                a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
                a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
                a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
                a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
            ],
        }
    }
}

impl Add for CQuat {
    type Output = CQuat;
    fn add(self, o: CQuat) -> CQuat {
        CQuat {
            q: [
                self.q[0] + o.q[0],
                self.q[1] + o.q[1],
                self.q[2] + o.q[2],
                self.q[3] + o.q[3],
            ],
        }
    }
}

impl Sub for CQuat {
    type Output = CQuat;
    fn sub(self, o: CQuat) -> CQuat {
        self + (-o)
    }
}

impl Neg for CQuat {
    type Output = CQuat;
    fn neg(self) -> CQuat {
        CQuat {
            q: self.q.map(|x| -x),
        }
    }
}

impl fmt::Display for CQuat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}) + ({})i + ({})j + ({})k",
            self.q[0], self.q[1], self.q[2], self.q[3]
        )
    }
}

/// The right-multiplication operator `M^p q = q p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RightMul(pub CQuat);

impl RightMul {
    pub fn apply(&self, q: CQuat) -> CQuat {
        q * self.0
    }

    /// `self ∘ inner`, i.e. `M^p ∘ M^r = M^{r p}`.
    pub fn compose(&self, inner: &RightMul) -> RightMul {
        RightMul(inner.0 * self.0)
    }
}

pub fn right_mul(p: CQuat) -> RightMul {
    RightMul(p)
}

/// A bicomplex number `a + b k`, where `k` is the quaternionic unit and
/// `a`, `b` carry their own (commuting) complex imaginary unit.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct KComplex {
    pub a: Complex64,
    pub b: Complex64,
}

impl KComplex {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        KComplex { a, b }
    }

    /// Identify `k` with the imaginary unit of the plane. Requires real
    /// `a` and `b`.
    pub fn to_plane(&self, tol: f64) -> Option<Complex64> {
        if self.a.im.abs() > tol || self.b.im.abs() > tol {
            return None;
        }
        Some(Complex64::new(self.a.re, self.b.re))
    }

    pub fn from_plane(z: Complex64) -> Self {
        KComplex {
            a: c(z.re),
            b: c(z.im),
        }
    }
}

/// `q = P1 + P2 j` with `P1 = q0 + q3 k`, `P2 = q2 - q1 k`.
pub fn split_2d(q: &CQuat) -> (KComplex, KComplex) {
    (
        KComplex::new(q.q[0], q.q[3]),
        KComplex::new(q.q[2], -q.q[1]),
    )
}

/// Inverse of [`split_2d`].
pub fn join_2d(p1: &KComplex, p2: &KComplex) -> CQuat {
    CQuat::new(p1.a, -p2.b, p2.a, p1.b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_relations() {
        let (i, j, k) = (CQuat::I, CQuat::J, CQuat::K);
        let m1 = -CQuat::ONE;
        assert_eq!(i * i, m1);
        assert_eq!(j * j, m1);
        assert_eq!(k * k, m1);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, -k);
    }

    #[test]
    fn expand_products() {
        let a = CQuat::real(1.0, 1.0, 0.0, 0.0);
        let b = CQuat::real(1.0, 0.0, 1.0, 0.0);
        assert_eq!(a * b, CQuat::real(1.0, 1.0, 1.0, 1.0));
        let q = CQuat::real(0.0, 1.0, 2.0, 3.0);
        assert_eq!(q * q, CQuat::real(-14.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn sc_vec_examples() {
        let q = CQuat::real(5.0, 0.0, 0.0, 2.0);
        let (s, v) = q.sc_vec();
        assert_eq!(s, c(5.0));
        assert_eq!(v, CQuat::real(0.0, 0.0, 0.0, 2.0));
        let p = CQuat::real(0.0, 1.0, -2.0, 0.5);
        assert_eq!(p.sc_vec(), (c(0.0), p));
        assert_eq!(CQuat::ZERO.sc_vec(), (c(0.0), CQuat::ZERO));
    }

    #[test]
    fn right_multiplication() {
        assert_eq!(right_mul(CQuat::J).apply(CQuat::I), CQuat::K);
        let q = CQuat::real(0.3, -1.0, 2.0, 4.0);
        assert_eq!(right_mul(CQuat::ONE).apply(q), q);
        // <p,q> = -1/2 (pq + qp) for p = q = i
        let i = CQuat::I;
        let sp = (i * i + i * i).scale(c(-0.5));
        assert_eq!(sp, CQuat::ONE);
        assert_eq!(dot(&i, &i), c(1.0));
    }

    #[test]
    fn split_examples() {
        let q = CQuat::real(1.0, 2.0, 3.0, 4.0);
        let (p1, p2) = split_2d(&q);
        assert_eq!(p1.to_plane(0.0), Some(Complex64::new(1.0, 4.0)));
        assert_eq!(p2.to_plane(0.0), Some(Complex64::new(3.0, -2.0)));
        let (p1, p2) = split_2d(&CQuat::J);
        assert_eq!(p1.to_plane(0.0), Some(c(0.0)));
        assert_eq!(p2.to_plane(0.0), Some(c(1.0)));
        assert_eq!(join_2d(&p1, &p2), CQuat::J);
    }

    #[test]
    fn split_matches_p1_plus_p2_j() {
        // P1 + P2 j computed with quaternion multiplication, k as quaternion unit
        let q = CQuat::new(
            Complex64::new(0.5, 1.0),
            Complex64::new(-2.0, 0.25),
            Complex64::new(3.0, -1.0),
            Complex64::new(0.75, 2.0),
        );
        let (p1, p2) = split_2d(&q);
        let as_quat = |p: &KComplex| CQuat::scalar(p.a) + CQuat::K.scale(p.b);
        let recomposed = as_quat(&p1) + as_quat(&p2) * CQuat::J;
        assert_eq!(recomposed, q);
    }
}
