//! The operator `D = i∂1 + j∂2 + k∂3` on complex-quaternion fields and the
//! residual checks built on it: Riccati, factorization, logarithmic
//! derivative, the Maxwell-type transform and the splitting of
//! `x3`-independent equations into a pair of Vekua equations.

use num_complex::Complex64;

use crate::cquat::{split_2d, CQuat, KComplex};
use crate::error::{Error, Result};
use crate::exprfield::{Expr, Frame, ScalarJetField};
use crate::jet::Jet;
use crate::{Point2, Point3};

/// Vanish threshold factor for "nonvanishing" preconditions.
pub const ZETA: f64 = 1e-10;
/// Bound on `|∂3|` for fields treated as independent of `x3`.
pub const X3_TOL: f64 = 1e-10;

type CJet3 = Jet<Complex64, 3>;

/// A complex-quaternion field whose components are expressions in a
/// three-dimensional frame.
#[derive(Clone, Debug, PartialEq)]
pub struct QuatField {
    pub frame: Frame,
    pub re: [Expr; 4],
    pub im: [Expr; 4],
}

fn zero() -> Expr {
    Expr::num(0.0)
}

fn zeros() -> [Expr; 4] {
    [zero(), zero(), zero(), zero()]
}

impl QuatField {
    pub fn new(frame: Frame, re: [Expr; 4], im: [Expr; 4]) -> Result<Self> {
        if frame.dim() != 3 {
            return Err(Error::Invalid(format!(
                "quaternion fields live in space, not the {} frame",
                frame.name()
            )));
        }
        for e in re.iter().chain(&im) {
            frame.check(e)?;
        }
        Ok(QuatField { frame, re, im })
    }

    pub fn real(frame: Frame, re: [Expr; 4]) -> Result<Self> {
        QuatField::new(frame, re, zeros())
    }

    /// Components given as source strings (real parts).
    pub fn parse(frame: Frame, src: [&str; 4]) -> Result<Self> {
        let re = [
            crate::exprfield::parse(src[0])?,
            crate::exprfield::parse(src[1])?,
            crate::exprfield::parse(src[2])?,
            crate::exprfield::parse(src[3])?,
        ];
        QuatField::real(frame, re)
    }

    pub fn scalar(f: &ScalarJetField) -> Result<Self> {
        let f = f.lift_to_space()?;
        QuatField::real(f.frame, [f.expr, zero(), zero(), zero()])
    }

    pub fn vector(frame: Frame, v: [Expr; 3]) -> Result<Self> {
        let [a, b, c] = v;
        QuatField::real(frame, [zero(), a, b, c])
    }

    /// Adds a constant complex quaternion.
    pub fn shifted(&self, c: CQuat) -> Self {
        let mut out = self.clone();
        for m in 0..4 {
            out.re[m] = Expr::add(out.re[m].clone(), Expr::num(c.q[m].re));
            out.im[m] = Expr::add(out.im[m].clone(), Expr::num(c.q[m].im));
        }
        out
    }

    /// Component jets at `p`.
    pub fn jets(&self, p: Point3) -> Result<[CJet3; 4]> {
        let mut out = [CJet3::zero(); 4];
        for (m, o) in out.iter_mut().enumerate() {
            let re = self.re[m].eval_jet(self.frame, p)?;
            let im = self.im[m].eval_jet(self.frame, p)?;
            *o = CJet3::from_parts(&re, &im);
        }
        Ok(out)
    }

    pub fn value(&self, p: Point3) -> Result<CQuat> {
        let j = self.jets(p)?;
        Ok(CQuat::new(j[0].v, j[1].v, j[2].v, j[3].v))
    }

    /// Symbolic `∂_slot` of every component.
    pub fn partial(&self, slot: usize) -> QuatField {
        let d = |e: &Expr| e.diff(self.frame, slot);
        QuatField {
            frame: self.frame,
            re: self.re.clone().map(|e| d(&e)),
            im: self.im.clone().map(|e| d(&e)),
        }
    }
}

fn quat_from(j: &[CJet3; 4], f: impl Fn(&CJet3) -> Complex64) -> CQuat {
    CQuat::new(f(&j[0]), f(&j[1]), f(&j[2]), f(&j[3]))
}

/// `Dq(p) = Σ e_m ∂_m q = -div q + grad q0 + rot q`.
pub fn apply_d(q: &QuatField, p: Point3) -> Result<CQuat> {
    let j = q.jets(p)?;
    Ok((0..3).fold(CQuat::ZERO, |acc, m| {
        acc + CQuat::unit(m + 1) * quat_from(&j, |c| c.g[m])
    }))
}

/// `D²q(p) = Σ e_m e_n ∂_m∂_n q`, from the Hessians.
pub fn apply_d2(q: &QuatField, p: Point3) -> Result<CQuat> {
    let j = q.jets(p)?;
    let mut acc = CQuat::ZERO;
    for m in 0..3 {
        for n in 0..3 {
            let e = CQuat::unit(m + 1) * CQuat::unit(n + 1);
            acc = acc + e * quat_from(&j, |c| c.h[m][n]);
        }
    }
    Ok(acc)
}

/// `-Δq(p)` componentwise.
pub fn neg_laplacian(q: &QuatField, p: Point3) -> Result<CQuat> {
    let j = q.jets(p)?;
    Ok(-quat_from(&j, |c| c.laplacian()))
}

fn pure_vector_check(q: &CQuat) -> Result<()> {
    let s = q.sc().norm();
    if s > 1e-12 * (1.0 + q.norm()) {
        return Err(Error::NotPureVector(s));
    }
    Ok(())
}

/// `Dq + q² + u` at `p`; zero iff `q` solves the Riccati equation there.
pub fn riccati_residual(q: &QuatField, u: &ScalarJetField, p: Point3) -> Result<CQuat> {
    let qv = q.value(p)?;
    pure_vector_check(&qv)?;
    let u = u.lift_to_space()?.value(&p)?;
    Ok(apply_d(q, p)? + qv * qv + CQuat::real(u, 0.0, 0.0, 0.0))
}

/// `|(D + M^h)(D - M^h) f - (-Δ + u) f|` at `p`. The outer `D` is a central
/// difference with step `1e-4 (1 + |p|)`.
pub fn factorization_residual(
    h: &QuatField,
    f: &ScalarJetField,
    u: &ScalarJetField,
    p: Point3,
) -> Result<f64> {
    let f = f.lift_to_space()?;
    let u = u.lift_to_space()?;
    let fq = QuatField::scalar(&f)?;
    let inner = |x: Point3| -> Result<CQuat> {
        let fv = Complex64::new(f.value(&x)?, 0.0);
        Ok(apply_d(&fq, x)? - CQuat::scalar(fv) * h.value(x)?)
    };
    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let step = 1e-4 * (1.0 + norm);
    let mut d_inner = CQuat::ZERO;
    for m in 0..3 {
        let (mut a, mut b) = (p, p);
        a[m] += step;
        b[m] -= step;
        if a[m] == p[m] || b[m] == p[m] {
            return Err(Error::Invalid(format!(
                "difference step underflows at {p:?}"
            )));
        }
        let dm = (inner(a)? - inner(b)?).scale(Complex64::new(0.5 / step, 0.0));
        d_inner = d_inner + CQuat::unit(m + 1) * dm;
    }
    let lhs = d_inner + inner(p)? * h.value(p)?;
    let j = f.jet3(p)?;
    let rhs = -j.laplacian() + u.value(&p)? * j.v;
    Ok((lhs - CQuat::real(rhs, 0.0, 0.0, 0.0)).norm())
}

/// `Df / f` as a pure-vector field.
pub fn log_derivative(f: &ScalarJetField) -> Result<QuatField> {
    let f = f.lift_to_space()?;
    let comp = |m: usize| Expr::div(f.expr.diff(f.frame, m), f.expr.clone());
    QuatField::vector(f.frame, [comp(0), comp(1), comp(2)])
}

/// Value of `Df / f` at `p`, refusing points where `|f|` is below the
/// vanish threshold.
pub fn log_derivative_at(f: &ScalarJetField, p: Point3) -> Result<CQuat> {
    let fs = f.lift_to_space()?;
    let j = fs.jet3(p)?;
    let scale = 1.0 + j.g.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if j.v.abs() <= ZETA * scale {
        return Err(Error::Vanishing {
            what: fs.expr.to_string(),
            value: j.v.abs(),
            threshold: ZETA * scale,
            at: p.to_vec(),
        });
    }
    log_derivative(f)?.value(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `F = √ε E`.
    Forward,
    /// `E = F / √ε`.
    Backward,
}

/// The correspondence between `div(εE) = 0, rot E = 0` and
/// `(D + M^h) F = 0` with `F = √ε E`, `h = D√ε / √ε`.
#[derive(Clone, Debug)]
pub struct Maxwell {
    pub eps: ScalarJetField,
    pub sqrt_eps: ScalarJetField,
    pub h: QuatField,
}

impl Maxwell {
    pub fn new(eps: &ScalarJetField) -> Result<Self> {
        let eps = eps.lift_to_space()?;
        let sqrt_eps = ScalarJetField {
            expr: Expr::call(crate::exprfield::Func::Sqrt, eps.expr.clone()),
            frame: eps.frame,
        };
        let h = log_derivative(&sqrt_eps)?;
        Ok(Maxwell { eps, sqrt_eps, h })
    }

    fn check_eps(&self, p: Point3) -> Result<()> {
        let e = self.eps.value(&p)?;
        if e.abs() <= ZETA {
            return Err(Error::Vanishing {
                what: self.eps.expr.to_string(),
                value: e.abs(),
                threshold: ZETA,
                at: p.to_vec(),
            });
        }
        Ok(())
    }

    /// Forward: `√ε·q`; backward: `q/√ε`. Input must be a pure vector field
    /// in the same frame as `ε` (checked at `probe`).
    pub fn transform(&self, q: &QuatField, dir: Direction, probe: Point3) -> Result<QuatField> {
        self.check_eps(probe)?;
        pure_vector_check(&q.value(probe)?)?;
        if q.frame != self.eps.frame {
            return Err(Error::Invalid("field and ε use different frames".into()));
        }
        let s = self.sqrt_eps.expr.clone();
        let op = |e: Expr| match dir {
            Direction::Forward => Expr::mul(s.clone(), e),
            Direction::Backward => Expr::div(e, s.clone()),
        };
        Ok(QuatField {
            frame: q.frame,
            re: q.re.clone().map(op),
            im: q.im.clone().map(op),
        })
    }

    /// `|div(εE)|` at `p`.
    pub fn div_residual(&self, e: &QuatField, p: Point3) -> Result<f64> {
        self.check_eps(p)?;
        let ej = e.jets(p)?;
        let eps = self.eps.jet3(p)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..3 {
            acc += ej[m + 1].g[m] * eps.v + ej[m + 1].v * eps.g[m];
        }
        Ok(acc.norm())
    }

    /// `|rot E|` at `p`.
    pub fn rot_residual(&self, e: &QuatField, p: Point3) -> Result<f64> {
        let de = apply_d(e, p)?;
        Ok(de.vec().norm())
    }

    /// `|(D + M^h) F|` at `p`.
    pub fn dirac_residual(&self, f: &QuatField, p: Point3) -> Result<f64> {
        self.check_eps(p)?;
        Ok((apply_d(f, p)? + f.value(p)? * self.h.value(p)?).norm())
    }
}

/// Map a plane point `(x, y)` to space, `(x1, x2, x3) = (y, x, 0)`.
pub fn plane_to_space(p: Point2) -> Point3 {
    [p[1], p[0], 0.0]
}

/// Sixteen probe points around `pt` used for the `x3`-independence check.
fn x3_probes(pt: Point2) -> Vec<Point3> {
    let base = plane_to_space(pt);
    (0..16)
        .map(|k| {
            let a = k as f64 * 0.39;
            [
                base[0] + 0.05 * a.cos(),
                base[1] + 0.05 * a.sin(),
                -1.0 + 2.0 * k as f64 / 15.0,
            ]
        })
        .collect()
}

/// Fail unless every component of `q` has `|∂3| < X3_TOL` at all probes.
pub fn check_x3_independent(q: &QuatField, pt: Point2) -> Result<()> {
    for p in x3_probes(pt) {
        for j in q.jets(p)? {
            let d = j.g[2].norm();
            if d >= X3_TOL {
                return Err(Error::DependsOnX3(d));
            }
        }
    }
    Ok(())
}

fn plane_of(k: &KComplex, what: &str) -> Result<Complex64> {
    k.to_plane(1e-12).ok_or_else(|| {
        Error::Invalid(format!(
            "{what} has complex components; only real fields split"
        ))
    })
}

/// `∂z̄` of the `k`-complex part `(a, b)` with `∂z̄ = ∂2 + i∂1`.
fn dzbar_k(a: &CJet3, b: &CJet3) -> Complex64 {
    let (ar, br) = (a.g.map(|x| x.re), b.g.map(|x| x.re));
    Complex64::new(ar[1] - br[0], br[1] + ar[0])
}

/// Residuals `∂z̄P1 + conj(H2 P1)` and `∂z̄P2 + H2 conj(P2)` of the split
/// equations at a plane point, where `p = P1 + P2 j` and `h = H1 + H2 j`.
pub fn split_to_vekua(p: &QuatField, h: &QuatField, pt: Point2) -> Result<(Complex64, Complex64)> {
    check_x3_independent(p, pt)?;
    check_x3_independent(h, pt)?;
    let x = plane_to_space(pt);
    let pj = p.jets(x)?;
    let hv = h.value(x)?;
    let pv = CQuat::new(pj[0].v, pj[1].v, pj[2].v, pj[3].v);
    let (p1, p2) = split_2d(&pv);
    let (_, h2) = split_2d(&hv);
    let (p1, p2) = (plane_of(&p1, "p")?, plane_of(&p2, "p")?);
    let h2 = plane_of(&h2, "h")?;
    // P1 = q0 + q3 k, P2 = q2 - q1 k
    let d1 = dzbar_k(&pj[0], &pj[3]);
    let d2 = dzbar_k(&pj[2], &-pj[1]);
    Ok((d1 + (h2 * p1).conj(), d2 + h2 * p2.conj()))
}
