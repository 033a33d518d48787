//! Expression-backed scalar fields with exact first and second partial
//! derivatives.
//!
//! Expressions are parsed once and evaluated in a [`Frame`], which decides
//! which coordinate each variable name refers to:
//!
//! | frame          | slots            | names                                   |
//! |----------------|------------------|-----------------------------------------|
//! | `Plane`        | `(x, y)`         | `x`, `y`; `x1` is `y`, `x2` is `x`       |
//! | `Space`        | `(x1, x2, x3)`   | `x1`..`x3`; `x`, `y`, `z` alias them     |
//! | `PlaneInSpace` | `(x1, x2, x3)`   | a plane expression lifted to 3D         |
//! | `Param`        | `(t)`            | `t`                                     |
//! | `Profile`      | `(rho)`          | `rho`                                   |
//!
//! The plane identification `z = x + iy` with `x = x2`, `y = x1` is the
//! convention used throughout the two-dimensional machinery; `PlaneInSpace`
//! applies it when a plane expression must be evaluated at a point of
//! `(x1, x2, x3)` space.
//!
//! Wirtinger derivatives are taken *without* the customary factor 1/2:
//! `d_z = d_x - i d_y` and `d_zbar = d_x + i d_y`, so `d_z d_zbar = Laplacian`.

mod ast;
mod eval;
mod parse;

use num_complex::Complex64;

pub use ast::{BinOp, Expr, Func, Var};
pub use parse::parse;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    Plane,
    Space,
    PlaneInSpace,
    Param,
    Profile,
}

impl Frame {
    pub fn slot(&self, v: Var) -> Option<usize> {
        use Var::*;
        match (self, v) {
            (Frame::Plane, X | X2) => Some(0),
            (Frame::Plane, Y | X1) => Some(1),
            (Frame::Space, X | X1) => Some(0),
            (Frame::Space, Y | X2) => Some(1),
            (Frame::Space, Z | X3) => Some(2),
            (Frame::PlaneInSpace, Y | X1) => Some(0),
            (Frame::PlaneInSpace, X | X2) => Some(1),
            (Frame::Param, T) => Some(0),
            (Frame::Profile, Rho) => Some(0),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Frame::Plane => 2,
            Frame::Space | Frame::PlaneInSpace => 3,
            Frame::Param | Frame::Profile => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Frame::Plane => "plane",
            Frame::Space => "space",
            Frame::PlaneInSpace => "plane-in-space",
            Frame::Param => "curve parameter",
            Frame::Profile => "profile",
        }
    }

    /// Check that every variable of `e` is bound in this frame.
    pub fn check(&self, e: &Expr) -> Result<()> {
        let mut vars = Vec::new();
        e.vars(&mut vars);
        for v in vars {
            if self.slot(v).is_none() {
                return Err(Error::UnboundVariable {
                    name: v.name().to_string(),
                    frame: self.name(),
                });
            }
        }
        Ok(())
    }
}

impl Expr {
    /// Value, gradient and Hessian at `p`.
    pub fn eval_jet<const D: usize>(&self, frame: Frame, p: [f64; D]) -> Result<Jet<f64, D>> {
        if frame.dim() != D {
            return Err(Error::Invalid(format!(
                "{} frame evaluated at a {D}-dimensional point",
                frame.name()
            )));
        }
        let bind = |i: usize| Jet::<f64, D>::variable(i, p[i]);
        eval::eval(self, frame, &bind)
    }

    pub fn eval_at(&self, frame: Frame, p: &[f64]) -> Result<f64> {
        if frame.dim() != p.len() {
            return Err(Error::Invalid(format!(
                "{} frame evaluated at a {}-dimensional point",
                frame.name(),
                p.len()
            )));
        }
        eval::eval(self, frame, &|i| p[i])
    }

    /// Value of a constant expression.
    pub fn eval_const(&self) -> Result<f64> {
        if !self.is_constant() {
            return Err(Error::Invalid(format!("`{self}` is not constant")));
        }
        eval::eval(self, Frame::Profile, &|_| 0.0)
    }
}

/// A parsed expression together with the frame it is evaluated in.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarJetField {
    pub expr: Expr,
    pub frame: Frame,
}

impl ScalarJetField {
    pub fn parse(src: &str, frame: Frame) -> Result<Self> {
        let expr = parse(src)?;
        frame.check(&expr)?;
        Ok(ScalarJetField { expr, frame })
    }

    pub fn from_expr(expr: Expr, frame: Frame) -> Result<Self> {
        frame.check(&expr)?;
        Ok(ScalarJetField { expr, frame })
    }

    pub fn jet2(&self, p: [f64; 2]) -> Result<Jet<f64, 2>> {
        self.expr.eval_jet(self.frame, p)
    }

    pub fn jet3(&self, p: [f64; 3]) -> Result<Jet<f64, 3>> {
        self.expr.eval_jet(self.frame, p)
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        self.expr.eval_at(self.frame, p)
    }

    /// The same expression evaluated in the lifted frame. Only plane fields
    /// can be lifted.
    pub fn lift_to_space(&self) -> Result<Self> {
        match self.frame {
            Frame::Plane => Ok(ScalarJetField {
                expr: self.expr.clone(),
                frame: Frame::PlaneInSpace,
            }),
            Frame::Space | Frame::PlaneInSpace => Ok(self.clone()),
            _ => Err(Error::Invalid(format!(
                "cannot lift a {} field into space",
                self.frame.name()
            ))),
        }
    }

    pub fn diff(&self, slot: usize) -> Self {
        ScalarJetField {
            expr: self.expr.diff(self.frame, slot),
            frame: self.frame,
        }
    }
}

/// Wirtinger derivatives `(f_z, f_zbar)` of a plane field at `p = (x, y)`.
pub fn wirtinger(f: &ScalarJetField, p: [f64; 2]) -> Result<(Complex64, Complex64)> {
    if f.frame != Frame::Plane {
        return Err(Error::Invalid(
            "wirtinger derivatives need a plane field".into(),
        ));
    }
    let j = f.jet2(p)?;
    let i = Complex64::i();
    Ok((j.g[0] - i * j.g[1], j.g[0] + i * j.g[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(src: &str) -> ScalarJetField {
        ScalarJetField::parse(src, Frame::Plane).unwrap()
    }

    #[test]
    fn jets_of_sum_of_squares() {
        let f = plane("x^2+y^2");
        let j = f.jet2([3.0, 4.0]).unwrap();
        assert_eq!(j.v, 25.0);
        assert_eq!(j.laplacian(), 4.0);
    }

    #[test]
    fn jets_of_exp_xy_match_central_differences() {
        let f = plane("exp(x*y)");
        let j = f.jet2([1.0, 2.0]).unwrap();
        let e2 = 2f64.exp();
        assert!((j.v - e2).abs() < 1e-14);
        // oracle: central differences with h = 1e-5
        let h = 1e-5;
        let v = |x: f64, y: f64| f.value(&[x, y]).unwrap();
        let fx = (v(1.0 + h, 2.0) - v(1.0 - h, 2.0)) / (2.0 * h);
        let fy = (v(1.0, 2.0 + h) - v(1.0, 2.0 - h)) / (2.0 * h);
        assert!((j.g[0] - fx).abs() <= 1e-6 * fx.abs());
        assert!((j.g[1] - fy).abs() <= 1e-6 * fy.abs());
        assert!((j.g[0] - 2.0 * e2).abs() < 1e-13);
        assert!((j.g[1] - e2).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        let f = ScalarJetField::parse("ln(x)", Frame::Space).unwrap();
        assert!(matches!(f.jet3([0.0, 1.0, 0.0]), Err(Error::Domain(_))));
        let g = plane("1/(x-y)");
        assert!(matches!(g.jet2([1.0, 1.0]), Err(Error::Domain(_))));
        let h = plane("sqrt(x)");
        assert!(matches!(h.jet2([-1.0, 0.0]), Err(Error::Domain(_))));
        let k = plane("x^0.5");
        assert!(matches!(k.jet2([-1.0, 0.0]), Err(Error::Domain(_))));
        // integer powers of negative bases are fine
        assert_eq!(plane("x^3").jet2([-2.0, 0.0]).unwrap().v, -8.0);
    }

    #[test]
    fn frames_bind_names() {
        // x1 is the plane's y coordinate
        let f = plane("x1 + 10*x2");
        assert_eq!(f.value(&[1.0, 2.0]).unwrap(), 2.0 + 10.0);
        let lifted = f.lift_to_space().unwrap();
        assert_eq!(lifted.value(&[2.0, 1.0, 7.0]).unwrap(), 12.0);
        let xy = plane("x - y").lift_to_space().unwrap();
        // x = x2, y = x1
        assert_eq!(xy.value(&[5.0, 1.0, 0.0]).unwrap(), 1.0 - 5.0);
        assert!(matches!(
            ScalarJetField::parse("x3", Frame::Plane),
            Err(Error::UnboundVariable { .. })
        ));
        let sp = ScalarJetField::parse("x*y*z + x3", Frame::Space).unwrap();
        assert_eq!(sp.value(&[1.0, 2.0, 3.0]).unwrap(), 9.0);
    }

    #[test]
    fn wirtinger_examples() {
        let f = plane("exp(x*y)");
        let (x, y) = (0.4, -1.1);
        let (fz, fzb) = wirtinger(&f, [x, y]).unwrap();
        let e = (x * y).exp();
        assert!((fz - Complex64::new(y, -x) * e).norm() < 1e-14);
        // -f_zbar / f = -(y + ix)
        let b = -fzb / e;
        assert!((b - Complex64::new(-y, -x)).norm() < 1e-14);

        let (fz, fzb) = wirtinger(&plane("x"), [0.3, 0.2]).unwrap();
        assert_eq!(
            (fz, fzb),
            (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
        );
        let (fz, fzb) = wirtinger(&plane("7.5"), [0.3, 0.2]).unwrap();
        assert_eq!((fz.norm(), fzb.norm()), (0.0, 0.0));
    }

    #[test]
    fn symbolic_derivative_matches_jet() {
        let f = plane("sin(x*y)/(1+x^2) + y^2.5 + x^y");
        let p = [0.7, 1.3];
        let j = f.jet2(p).unwrap();
        for slot in 0..2 {
            let d = f.diff(slot).jet2(p).unwrap();
            assert!((d.v - j.g[slot]).abs() < 1e-12);
            for k in 0..2 {
                assert!((d.g[k] - j.h[slot][k]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn eval_const_and_pi() {
        assert_eq!(
            parse("2*pi").unwrap().eval_const().unwrap(),
            2.0 * std::f64::consts::PI
        );
        assert!(parse("x").unwrap().eval_const().is_err());
    }
}
