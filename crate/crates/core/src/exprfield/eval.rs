use std::f64::consts::PI;

use super::ast::{BinOp, Expr, Func, Var};
use super::Frame;
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Number types an expression can be evaluated in.
pub(crate) trait Arith: Copy {
    fn constant(x: f64) -> Self;
    fn value(&self) -> f64;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;
}

impl Arith for f64 {
    fn constant(x: f64) -> Self {
        x
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
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
}

impl<const D: usize> Arith for Jet<f64, D> {
    fn constant(x: f64) -> Self {
        Jet::constant(x)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn exp(self) -> Self {
        Jet::exp(&self)
    }
    fn ln(self) -> Self {
        Jet::ln(&self)
    }
    fn sqrt(self) -> Self {
        Jet::sqrt(&self)
    }
    fn sin(self) -> Self {
        Jet::sin(&self)
    }
    fn cos(self) -> Self {
        Jet::cos(&self)
    }
    fn powi(self, n: i32) -> Self {
        Jet::powi(&self, n)
    }
    fn powf(self, p: f64) -> Self {
        Jet::powf(&self, p)
    }
}

pub(crate) fn eval<N: Arith>(e: &Expr, frame: Frame, bind: &dyn Fn(usize) -> N) -> Result<N> {
    Ok(match e {
        Expr::Num(x) => N::constant(*x),
        Expr::Pi => N::constant(PI),
        Expr::Var(v) => bind(slot(frame, *v)?),
        Expr::Neg(a) => eval(a, frame, bind)?.neg(),
        Expr::Call(f, a) => {
            let a = eval(a, frame, bind)?;
            let x = a.value();
            match f {
                Func::Exp => a.exp(),
                Func::Ln => {
                    if x <= 0.0 {
                        return Err(Error::Domain(format!("ln of non-positive value {x}")));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(Error::Domain(format!("sqrt of negative value {x}")));
                    }
                    a.sqrt()
                }
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
            }
        }
        Expr::Bin(op, a, b) => {
            if *op == BinOp::Pow && b.is_constant() {
                let base = eval(a, frame, bind)?;
                let p: f64 = eval(b, frame, &|_| 0.0)?;
                return pow_const(base, p);
            }
            let a = eval(a, frame, bind)?;
            let b = eval(b, frame, bind)?;
            match op {
                BinOp::Add => a.add(b),
                BinOp::Sub => a.sub(b),
                BinOp::Mul => a.mul(b),
                BinOp::Div => {
                    if b.value() == 0.0 {
                        return Err(Error::Domain("division by zero".into()));
                    }
                    a.div(b)
                }
                BinOp::Pow => {
                    if a.value() <= 0.0 {
                        return Err(Error::Domain(format!(
                            "variable exponent requires a positive base, got {}",
                            a.value()
                        )));
                    }
                    b.mul(a.ln()).exp()
                }
            }
        }
    })
}

fn pow_const<N: Arith>(base: N, p: f64) -> Result<N> {
    let x = base.value();
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        if p < 0.0 && x == 0.0 {
            return Err(Error::Domain("zero raised to a negative power".into()));
        }
        return Ok(base.powi(p as i32));
    }
    if x <= 0.0 {
        return Err(Error::Domain(format!(
            "non-integer power {p} of non-positive value {x}"
        )));
    }
    Ok(base.powf(p))
}

fn slot(frame: Frame, v: Var) -> Result<usize> {
    frame.slot(v).ok_or(Error::UnboundVariable {
        name: v.name().to_string(),
        frame: frame.name(),
    })
}
