//! Complex-valued fields on the plane.
//!
//! A [`Field`] is a node of a shared expression graph. Leaves are constants,
//! parsed expressions and potentials (real functions known through their
//! Wirtinger gradient, `Φ_z = g`, and an anchor value). Every node carries
//! symbolic `∂z` / `∂z̄` (cached), so derivatives of derived fields never
//! need more than the second-order jets produced by evaluation.
//!
//! Potentials are evaluated by integrating `Re(g dz)` along the straight
//! segment from their anchor. When a field is evaluated at `p`, all nodes are
//! evaluated at the Gauss nodes of the segment `anchor → p`, so a potential
//! whose integrand itself contains potentials with the same anchor is
//! integrated cumulatively in a single pass.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exprfield::{Expr, Frame, Var};
use crate::jet::{CJet, Jet};
use crate::quad::{self, pairwise_sum, GaussRule, Quadrature, MAX_PANELS};
use crate::Point2;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// A function of one real variable, composed with a real field.
#[derive(Clone, Debug)]
pub enum Profile {
    /// Expression in `rho`.
    Expr(Expr),
    /// `∫_{rho_ref}^{rho} s`, evaluated by adaptive quadrature.
    IntegralOf { s: Expr, rho_ref: f64 },
}

impl Profile {
    pub fn derivative(&self) -> Profile {
        match self {
            Profile::Expr(e) => Profile::Expr(e.diff(Frame::Profile, 0)),
            Profile::IntegralOf { s, .. } => Profile::Expr(s.clone()),
        }
    }

    /// Value and first two derivatives at `rho`.
    pub fn jet(&self, rho: f64) -> Result<(f64, f64, f64)> {
        match self {
            Profile::Expr(e) => {
                let j = e.eval_jet(Frame::Profile, [rho])?;
                Ok((j.v, j.g[0], j.h[0][0]))
            }
            Profile::IntegralOf { s, rho_ref } => {
                let v = quad::integrate_1d(
                    &|r| s.eval_at(Frame::Profile, &[r]),
                    *rho_ref,
                    rho,
                    Quadrature::new(4, 8)?,
                )?;
                let j = s.eval_jet(Frame::Profile, [rho])?;
                Ok((v, j.v, j.g[0]))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Un {
    Neg,
    Conj,
    Re,
    Im,
    Exp,
    Recip,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Bin {
    Add,
    Sub,
    Mul,
    Div,
}

struct Potential {
    grad: Field,
    anchor: Point2,
    anchor_value: f64,
}

enum Kind {
    Const(Complex64),
    Expr { re: Expr, im: Option<Expr> },
    Unary(Un, Field),
    Scale(Complex64, Field),
    Binary(Bin, Field, Field),
    Compose(Field, Profile),
    Potential(Potential),
}

struct Node {
    id: u64,
    kind: Kind,
    dz: OnceLock<Field>,
    dzbar: OnceLock<Field>,
    anchor: OnceLock<Option<Point2>>,
}

/// Shared handle to a complex field on the plane.
#[derive(Clone)]
pub struct Field(Arc<Node>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Const(c) => write!(f, "Const({c})"),
            Kind::Expr { re, im: None } => write!(f, "Expr({re})"),
            Kind::Expr { re, im: Some(im) } => write!(f, "Expr({re} + i*({im}))"),
            Kind::Unary(op, a) => write!(f, "{op:?}({a:?})"),
            Kind::Scale(c, a) => write!(f, "({c})*{a:?}"),
            Kind::Binary(op, a, b) => write!(f, "{op:?}({a:?}, {b:?})"),
            Kind::Compose(a, p) => write!(f, "Compose({a:?}, {p:?})"),
            Kind::Potential(p) => write!(f, "Potential#{}(anchor {:?})", self.0.id, p.anchor),
        }
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl Field {
    fn node(kind: Kind) -> Field {
        Field(Arc::new(Node {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            kind,
            dz: OnceLock::new(),
            dzbar: OnceLock::new(),
            anchor: OnceLock::new(),
        }))
    }

    pub fn constant(v: Complex64) -> Field {
        Field::node(Kind::Const(v))
    }

    pub fn real(v: f64) -> Field {
        Field::constant(c(v))
    }

    pub fn zero() -> Field {
        Field::real(0.0)
    }

    /// `re + i·im` from plane expressions. Fails if a variable is not bound
    /// in the plane frame.
    pub fn from_exprs(re: Expr, im: Option<Expr>) -> Result<Field> {
        Frame::Plane.check(&re)?;
        if let Some(im) = &im {
            Frame::Plane.check(im)?;
        }
        if re.is_constant() && im.as_ref().is_none_or(|e| e.is_constant()) {
            let r = re.eval_const()?;
            let i = im.map(|e| e.eval_const()).transpose()?.unwrap_or(0.0);
            return Ok(Field::constant(Complex64::new(r, i)));
        }
        Ok(Field::node(Kind::Expr { re, im }))
    }

    pub fn parse(re: &str, im: Option<&str>) -> Result<Field> {
        let re = crate::exprfield::parse(re)?;
        let im = im.map(crate::exprfield::parse).transpose()?;
        Field::from_exprs(re, im)
    }

    /// A real potential `Φ` with `∂zΦ = grad` and `Φ(anchor) = anchor_value`.
    /// Path independence is not checked here.
    pub fn potential(grad: Field, anchor: Point2, anchor_value: f64) -> Field {
        Field::node(Kind::Potential(Potential {
            grad,
            anchor,
            anchor_value,
        }))
    }

    /// `profile ∘ self`; `self` must be real valued.
    pub fn compose(&self, profile: Profile) -> Field {
        if let Profile::Expr(e) = &profile {
            if let Ok(v) = e.eval_const() {
                return Field::real(v);
            }
        }
        if let Some(v) = self.as_const() {
            if let Ok((p, _, _)) = profile.jet(v.re) {
                return Field::real(p);
            }
        }
        Field::node(Kind::Compose(self.clone(), profile))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self.0.kind {
            Kind::Const(v) => Some(v),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_const() == Some(c(0.0))
    }

    fn unary(op: Un, a: &Field) -> Field {
        if let Some(v) = a.as_const() {
            let r = match op {
                Un::Neg => -v,
                Un::Conj => v.conj(),
                Un::Re => c(v.re),
                Un::Im => c(v.im),
                Un::Exp => v.exp(),
                Un::Recip if v != c(0.0) => v.inv(),
                Un::Recip => return Field::node(Kind::Unary(op, a.clone())),
            };
            return Field::constant(r);
        }
        Field::node(Kind::Unary(op, a.clone()))
    }

    pub fn conj(&self) -> Field {
        Field::unary(Un::Conj, self)
    }

    pub fn re(&self) -> Field {
        Field::unary(Un::Re, self)
    }

    pub fn im(&self) -> Field {
        Field::unary(Un::Im, self)
    }

    pub fn exp(&self) -> Field {
        Field::unary(Un::Exp, self)
    }

    pub fn recip(&self) -> Field {
        Field::unary(Un::Recip, self)
    }

    pub fn scale(&self, k: Complex64) -> Field {
        if k == c(1.0) {
            return self.clone();
        }
        if k == c(0.0) {
            return Field::zero();
        }
        if let Some(v) = self.as_const() {
            return Field::constant(k * v);
        }
        Field::node(Kind::Scale(k, self.clone()))
    }

    pub fn scale_re(&self, k: f64) -> Field {
        self.scale(c(k))
    }

    pub fn times_i(&self) -> Field {
        self.scale(Complex64::i())
    }

    fn binary(op: Bin, a: &Field, b: &Field) -> Field {
        match (op, a.as_const(), b.as_const()) {
            (Bin::Add, Some(x), Some(y)) => return Field::constant(x + y),
            (Bin::Sub, Some(x), Some(y)) => return Field::constant(x - y),
            (Bin::Mul, Some(x), Some(y)) => return Field::constant(x * y),
            (Bin::Add, _, _) if a.is_zero() => return b.clone(),
            (Bin::Add | Bin::Sub, _, _) if b.is_zero() => return a.clone(),
            (Bin::Sub, _, _) if a.is_zero() => return Field::unary(Un::Neg, b),
            (Bin::Mul, Some(x), _) => return b.scale(x),
            (Bin::Mul, _, Some(y)) => return a.scale(y),
            (Bin::Div, _, Some(y)) if y != c(0.0) => return a.scale(y.inv()),
            (Bin::Div, _, _) if a.is_zero() => return Field::zero(),
            _ => {}
        }
        Field::node(Kind::Binary(op, a.clone(), b.clone()))
    }

    /// `∂z = ∂x - i∂y` as a field.
    pub fn dz(&self) -> Field {
        self.0.dz.get_or_init(|| self.wirtinger(false)).clone()
    }

    /// `∂z̄ = ∂x + i∂y` as a field.
    pub fn dzbar(&self) -> Field {
        self.0.dzbar.get_or_init(|| self.wirtinger(true)).clone()
    }

    fn d(&self, bar: bool) -> Field {
        if bar {
            self.dzbar()
        } else {
            self.dz()
        }
    }

    fn wirtinger(&self, bar: bool) -> Field {
        let i = Complex64::i();
        match &self.0.kind {
            Kind::Const(_) => Field::zero(),
            Kind::Expr { re, im } => {
                let d = |e: &Expr, s| e.diff(Frame::Plane, s);
                let zero = Expr::num(0.0);
                let im = im.as_ref().unwrap_or(&zero);
                let (ux, uy, vx, vy) = (d(re, 0), d(re, 1), d(im, 0), d(im, 1));
                // (u + iv)_x ∓ i (u + iv)_y
                let (r, m) = if bar {
                    (Expr::sub(ux, vy), Expr::add(vx, uy))
                } else {
                    (Expr::add(ux, vy), Expr::sub(vx, uy))
                };
                Field::from_exprs(r, Some(m)).expect("derivative of a plane expression")
            }
            Kind::Unary(op, a) => match op {
                Un::Neg => -a.d(bar),
                Un::Conj => a.d(!bar).conj(),
                Un::Re => (a.d(bar) + a.d(!bar).conj()).scale_re(0.5),
                Un::Im => (a.d(bar) - a.d(!bar).conj()).scale(-0.5 * i),
                Un::Exp => a.exp() * a.d(bar),
                Un::Recip => {
                    let r = a.recip();
                    -(a.d(bar) * r.clone() * r)
                }
            },
            Kind::Scale(k, a) => a.d(bar).scale(*k),
            Kind::Binary(op, a, b) => match op {
                Bin::Add => a.d(bar) + b.d(bar),
                Bin::Sub => a.d(bar) - b.d(bar),
                Bin::Mul => a.d(bar) * b.clone() + a.clone() * b.d(bar),
                Bin::Div => (a.d(bar) * b.clone() - a.clone() * b.d(bar)) / (b.clone() * b.clone()),
            },
            Kind::Compose(inner, p) => inner.compose(p.derivative()) * inner.d(bar),
            Kind::Potential(p) => {
                if bar {
                    p.grad.conj()
                } else {
                    p.grad.clone()
                }
            }
        }
    }

    /// Anchor of the first potential found in the graph, if any.
    pub fn anchor(&self) -> Option<Point2> {
        *self.0.anchor.get_or_init(|| {
            let mut seen = HashSet::new();
            self.find_anchor(&mut seen)
        })
    }

    fn find_anchor(&self, seen: &mut HashSet<u64>) -> Option<Point2> {
        if !seen.insert(self.0.id) {
            return None;
        }
        if let Some(a) = self.0.anchor.get() {
            return *a;
        }
        match &self.0.kind {
            Kind::Const(_) | Kind::Expr { .. } => None,
            Kind::Potential(p) => Some(p.anchor),
            Kind::Unary(_, a) | Kind::Scale(_, a) | Kind::Compose(a, _) => a.find_anchor(seen),
            Kind::Binary(_, a, b) => a.find_anchor(seen).or_else(|| b.find_anchor(seen)),
        }
    }

    /// Number of distinct nodes in the graph.
    pub fn size(&self) -> usize {
        fn walk(f: &Field, seen: &mut HashSet<u64>) {
            if !seen.insert(f.0.id) {
                return;
            }
            match &f.0.kind {
                Kind::Const(_) | Kind::Expr { .. } => {}
                Kind::Potential(p) => walk(&p.grad, seen),
                Kind::Unary(_, a) | Kind::Scale(_, a) | Kind::Compose(a, _) => walk(a, seen),
                Kind::Binary(_, a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
            }
        }
        let mut seen = HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }
}

impl Add for Field {
    type Output = Field;
    fn add(self, o: Field) -> Field {
        Field::binary(Bin::Add, &self, &o)
    }
}

impl Sub for Field {
    type Output = Field;
    fn sub(self, o: Field) -> Field {
        Field::binary(Bin::Sub, &self, &o)
    }
}

impl Mul for Field {
    type Output = Field;
    fn mul(self, o: Field) -> Field {
        Field::binary(Bin::Mul, &self, &o)
    }
}

impl Div for Field {
    type Output = Field;
    fn div(self, o: Field) -> Field {
        Field::binary(Bin::Div, &self, &o)
    }
}

impl Neg for Field {
    type Output = Field;
    fn neg(self) -> Field {
        Field::unary(Un::Neg, &self)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, o: &Field) -> Field {
        Field::binary(Bin::Add, self, o)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, o: &Field) -> Field {
        Field::binary(Bin::Sub, self, o)
    }
}

impl Mul for &Field {
    type Output = Field;
    fn mul(self, o: &Field) -> Field {
        Field::binary(Bin::Mul, self, o)
    }
}

impl Div for &Field {
    type Output = Field;
    fn div(self, o: &Field) -> Field {
        Field::binary(Bin::Div, self, o)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        Field::unary(Un::Neg, self)
    }
}

struct Ray {
    anchor: Point2,
    end: Point2,
    rule: Arc<GaussRule>,
    panels: usize,
}

/// Evaluation context: a set of points plus a per-node memo.
struct Ctx {
    pts: Vec<Point2>,
    ray: Option<Ray>,
    quad: Quadrature,
    memo: HashMap<u64, Arc<Vec<CJet>>>,
}

impl Ctx {
    fn points(pts: Vec<Point2>, quad: Quadrature) -> Ctx {
        Ctx {
            pts,
            ray: None,
            quad,
            memo: HashMap::new(),
        }
    }

    /// Gauss nodes of every panel of `anchor → end`, followed by `end`.
    fn ray(anchor: Point2, end: Point2, quad: Quadrature) -> Ctx {
        let d = [end[0] - anchor[0], end[1] - anchor[1]];
        let mut pts: Vec<Point2> = quad
            .unit_nodes()
            .into_iter()
            .map(|(t, _)| [anchor[0] + t * d[0], anchor[1] + t * d[1]])
            .collect();
        pts.push(end);
        Ctx {
            pts,
            ray: Some(Ray {
                anchor,
                end,
                rule: quad.rule(),
                panels: quad.panels,
            }),
            quad,
            memo: HashMap::new(),
        }
    }

    fn eval(&mut self, f: &Field) -> Result<Arc<Vec<CJet>>> {
        if let Some(v) = self.memo.get(&f.0.id) {
            return Ok(v.clone());
        }
        let out = Arc::new(self.compute(f)?);
        self.memo.insert(f.0.id, out.clone());
        Ok(out)
    }

    fn singular(&self, what: impl Into<String>, k: usize) -> Error {
        Error::Singular {
            what: what.into(),
            at: self.pts[k],
        }
    }

    fn compute(&mut self, f: &Field) -> Result<Vec<CJet>> {
        let n = self.pts.len();
        match &f.0.kind {
            Kind::Const(v) => Ok(vec![CJet::constant(*v); n]),
            Kind::Expr { re, im } => (0..n)
                .map(|k| {
                    let p = self.pts[k];
                    let r = re
                        .eval_jet(Frame::Plane, p)
                        .map_err(|e| self.expr_error(e, re, k))?;
                    let i = match im {
                        Some(im) => im
                            .eval_jet(Frame::Plane, p)
                            .map_err(|e| self.expr_error(e, im, k))?,
                        None => Jet::zero(),
                    };
                    Ok(CJet::from_parts(&r, &i))
                })
                .collect(),
            Kind::Unary(op, a) => {
                let a = self.eval(a)?;
                a.iter()
                    .enumerate()
                    .map(|(k, x)| {
                        Ok(match op {
                            Un::Neg => -*x,
                            Un::Conj => x.conj(),
                            Un::Re => x.re(),
                            Un::Im => x.im(),
                            Un::Exp => x.exp(),
                            Un::Recip => {
                                if x.v.norm() == 0.0 || !x.v.is_finite() {
                                    return Err(self.singular("reciprocal of zero", k));
                                }
                                x.recip()
                            }
                        })
                    })
                    .collect()
            }
            Kind::Scale(s, a) => Ok(self.eval(a)?.iter().map(|x| x.scale(*s)).collect()),
            Kind::Binary(op, a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                a.iter()
                    .zip(b.iter())
                    .enumerate()
                    .map(|(k, (x, y))| {
                        Ok(match op {
                            Bin::Add => *x + *y,
                            Bin::Sub => *x - *y,
                            Bin::Mul => *x * *y,
                            Bin::Div => {
                                if y.v.norm() == 0.0 || !y.v.is_finite() {
                                    return Err(self.singular("division by zero", k));
                                }
                                *x / *y
                            }
                        })
                    })
                    .collect()
            }
            Kind::Compose(inner, p) => {
                let r = self.eval(inner)?;
                r.iter()
                    .enumerate()
                    .map(|(k, x)| {
                        let (v0, v1, v2) = p.jet(x.v.re).map_err(|e| match e {
                            Error::Domain(m) => self.singular(format!("profile: {m}"), k),
                            other => other,
                        })?;
                        Ok(x.chain(c(v0), c(v1), c(v2)))
                    })
                    .collect()
            }
            Kind::Potential(pot) => self.potential(pot),
        }
    }

    fn expr_error(&self, e: Error, expr: &Expr, k: usize) -> Error {
        match e {
            Error::Domain(m) => self.singular(format!("`{expr}`: {m}"), k),
            other => other,
        }
    }

    fn potential(&mut self, pot: &Potential) -> Result<Vec<CJet>> {
        let same_ray = self.ray.as_ref().is_some_and(|r| r.anchor == pot.anchor);
        if same_ray {
            let g = self.eval(&pot.grad)?;
            let vals = self.cumulative(&g, pot)?;
            return Ok(g
                .iter()
                .zip(vals)
                .map(|(g, v)| potential_jet(v, g))
                .collect());
        }
        // other anchor: one sub-ray per point
        let mut out = Vec::with_capacity(self.pts.len());
        for k in 0..self.pts.len() {
            let mut sub = Ctx::ray(pot.anchor, self.pts[k], self.quad);
            let g = sub.eval(&pot.grad)?;
            let vals = sub.cumulative(&g, pot)?;
            out.push(potential_jet(
                *vals.last().expect("ray has an endpoint"),
                g.last().expect("ray has an endpoint"),
            ));
        }
        Ok(out)
    }

    /// `Φ(anchor) + ∫_0^t Re(g (end - anchor)) ds` at every ray node.
    fn cumulative(&self, g: &[CJet], pot: &Potential) -> Result<Vec<f64>> {
        let ray = self.ray.as_ref().expect("cumulative integration on a ray");
        let d = Complex64::new(ray.end[0] - ray.anchor[0], ray.end[1] - ray.anchor[1]);
        let n = ray.rule.x.len();
        let half = 0.5 / ray.panels as f64;
        let f: Vec<f64> = g.iter().map(|j| (j.v * d).re).collect();
        for (k, v) in f.iter().enumerate() {
            if !v.is_finite() {
                return Err(self.singular("potential integrand", k));
            }
        }
        let mut out = Vec::with_capacity(f.len());
        let mut panel_sums = Vec::with_capacity(ray.panels);
        let mut acc = pot.anchor_value;
        for m in 0..ray.panels {
            let fp = &f[m * n..(m + 1) * n];
            for row in &ray.rule.cumulative {
                let part: f64 = row.iter().zip(fp).map(|(w, y)| w * y).sum();
                out.push(acc + half * part);
            }
            let s: f64 = ray.rule.w.iter().zip(fp).map(|(w, y)| w * y).sum();
            panel_sums.push(half * s);
            acc += half * s;
        }
        out.push(pot.anchor_value + pairwise_sum(&panel_sums, 0.0));
        Ok(out)
    }
}

/// Jet of a real potential from its value and the jet of `g = Φ_z`:
/// `Φ_x = Re g`, `Φ_y = -Im g`.
fn potential_jet(v: f64, g: &CJet) -> CJet {
    let (gx, gy) = (g.g[0], g.g[1]);
    let mut j = CJet::constant(c(v));
    j.g = [c(g.v.re), c(-g.v.im)];
    let xy = 0.5 * (gy.re - gx.im);
    j.h = [[c(gx.re), c(xy)], [c(xy), c(-gy.im)]];
    j
}

fn close(a: &CJet, b: &CJet) -> bool {
    let near = |x: Complex64, y: Complex64| {
        let d = (x - y).norm();
        d <= quad::DOUBLING_ABS_TOL || d <= quad::DOUBLING_REL_TOL * y.norm()
    };
    near(a.v, b.v) && near(a.g[0], b.g[0]) && near(a.g[1], b.g[1])
}

/// Starting rule for potential rays; doubled until converged.
pub const RAY_QUAD: Quadrature = Quadrature {
    panels: 4,
    nodes: 8,
};

/// Evaluates fields at points, refining the potential quadrature until
/// two successive panel counts agree.
#[derive(Clone, Copy, Debug)]
pub struct Evaluator {
    pub quad: Quadrature,
    /// Compare against the doubled rule (and keep doubling) when true.
    pub adaptive: bool,
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator {
            quad: RAY_QUAD,
            adaptive: true,
        }
    }
}

impl Evaluator {
    pub fn new(quad: Quadrature) -> Self {
        Evaluator {
            quad,
            adaptive: true,
        }
    }

    fn once(&self, fields: &[&Field], p: Point2, quad: Quadrature) -> Result<Vec<CJet>> {
        let anchor = fields.iter().find_map(|f| f.anchor());
        let mut ctx = match anchor {
            Some(a) => Ctx::ray(a, p, quad),
            None => Ctx::points(vec![p], quad),
        };
        fields
            .iter()
            .map(|f| {
                let v = ctx.eval(f)?;
                let j = *v.last().expect("nonempty context");
                if !j.is_finite() {
                    return Err(Error::Singular {
                        what: "non-finite field value".into(),
                        at: p,
                    });
                }
                Ok(j)
            })
            .collect()
    }

    /// Jets of several fields at one point, sharing intermediate results.
    pub fn jets(&self, fields: &[&Field], p: Point2) -> Result<Vec<CJet>> {
        let has_potential = fields.iter().any(|f| f.anchor().is_some());
        let mut q = self.quad;
        let mut prev = self.once(fields, p, q)?;
        if !self.adaptive || !has_potential {
            return Ok(prev);
        }
        loop {
            q = q.doubled();
            if q.panels > MAX_PANELS {
                return Err(Error::NonConvergence(format!(
                    "potential at ({}, {}) not settled at {} panels",
                    p[0],
                    p[1],
                    q.panels / 2
                )));
            }
            let next = self.once(fields, p, q)?;
            if prev.iter().zip(&next).all(|(a, b)| close(a, b)) {
                return Ok(next);
            }
            prev = next;
        }
    }

    pub fn jet(&self, f: &Field, p: Point2) -> Result<CJet> {
        Ok(self.jets(&[f], p)?[0])
    }

    pub fn value(&self, f: &Field, p: Point2) -> Result<Complex64> {
        Ok(self.jet(f, p)?.v)
    }

    /// Jets of `fields` at every point; parallel over points.
    pub fn sample(&self, fields: &[&Field], pts: &[Point2]) -> Result<Vec<Vec<CJet>>> {
        pts.par_iter().map(|p| self.jets(fields, *p)).collect()
    }

    /// Jets of a potential-free field at many points in one pass.
    pub fn sample_direct(&self, f: &Field, pts: &[Point2]) -> Result<Vec<CJet>> {
        if f.anchor().is_some() {
            return Ok(self.sample(&[f], pts)?.into_iter().map(|v| v[0]).collect());
        }
        let mut ctx = Ctx::points(pts.to_vec(), self.quad);
        Ok(ctx.eval(f)?.as_ref().clone())
    }
}

/// Real plane field from an expression in `x`, `y`.
pub fn real_expr(src: &str) -> Result<Field> {
    Field::parse(src, None)
}

/// The coordinate function `z = x + iy`.
pub fn z() -> Field {
    Field::from_exprs(Expr::var(Var::X), Some(Expr::var(Var::Y))).expect("plane variables")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev() -> Evaluator {
        Evaluator::default()
    }

    fn cz(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn expression_jets_and_wirtinger() {
        let f = real_expr("exp(x*y)").unwrap();
        let (x, y) = (0.3, 0.8);
        let e = f64::exp(x * y);
        let j = ev().jet(&f, [x, y]).unwrap();
        assert!((j.dz() - cz(y, -x) * e).norm() < 1e-14);
        let dz = ev().jet(&f.dz(), [x, y]).unwrap();
        assert!((dz.v - j.dz()).norm() < 1e-14);
        // ∂z∂z̄ f = Δf
        let lap = ev().value(&f.dzbar().dz(), [x, y]).unwrap();
        assert!((lap - j.laplacian()).norm() < 1e-13);
    }

    #[test]
    fn z_squared_has_wirtinger_derivative_4z() {
        let z = z();
        let w = &z * &z;
        let p = [0.4, -0.7];
        let dz = ev().value(&w.dz(), p).unwrap();
        assert!((dz - 4.0 * cz(p[0], p[1])).norm() < 1e-14);
        assert!(ev().value(&w.dzbar(), p).unwrap().norm() < 1e-14);
        assert!((ev().value(&z.conj().dzbar(), p).unwrap() - 2.0).norm() < 1e-14);
    }

    #[test]
    fn symbolic_derivatives_match_jets() {
        let f = Field::parse("x^2*y", Some("sin(x)+y")).unwrap();
        let g = (f.exp() * f.conj().recip() + f.re() - f.im().scale(cz(0.5, 2.0))) / f.clone();
        let p = [0.6, 0.9];
        let j = ev().jet(&g, p).unwrap();
        let dz = ev().jet(&g.dz(), p).unwrap();
        let dzb = ev().jet(&g.dzbar(), p).unwrap();
        assert!((dz.v - j.dz()).norm() < 1e-12);
        assert!((dzb.v - j.dzbar()).norm() < 1e-12);
        // mixed second derivative through the Hessian
        let i = Complex64::i();
        let lap = j.h[0][0] + j.h[1][1];
        assert!((dz.dzbar() - lap).norm() < 1e-11);
        let zz = j.h[0][0] - j.h[1][1] - 2.0 * i * j.h[0][1];
        assert!((dz.dz() - zz).norm() < 1e-11);
    }

    #[test]
    fn potential_reconstructs_quadratic() {
        // Φ = (x^2 - y^2)/2 has Φ_z = x + iy
        let phi = Field::potential(z(), [0.0, 0.0], 0.0);
        let p = [0.9, 0.4];
        let j = ev().jet(&phi, p).unwrap();
        assert!((j.v.re - (0.81 - 0.16) / 2.0).abs() < 1e-14);
        assert!((j.g[0].re - 0.9).abs() < 1e-15 && (j.g[1].re + 0.4).abs() < 1e-15);
        assert!((j.h[0][0].re - 1.0).abs() < 1e-15 && (j.h[1][1].re + 1.0).abs() < 1e-15);
        assert!(j.h[0][1].norm() < 1e-15);
    }

    #[test]
    fn nested_potentials_share_the_ray() {
        // Φ1 = x (Φ1_z = 1), Φ2 with Φ2_z = Φ1 → Φ2 = x^2/2 + c(y)? needs
        // Re(Φ1 dz) = x dx exact, so Φ2 = x^2/2.
        let a = [0.2, -0.3];
        let phi1 = Field::potential(Field::real(1.0), a, 0.2);
        let phi2 = Field::potential(phi1.clone(), a, 0.02);
        let p = [1.1, 0.7];
        let js = ev().jets(&[&phi1, &phi2], p).unwrap();
        assert!((js[0].v.re - 1.1).abs() < 1e-14);
        assert!((js[1].v.re - 1.21 / 2.0).abs() < 1e-13);
        // other anchor falls back to sub-rays
        let phi3 = Field::potential(phi1.clone(), [0.0, 0.0], 0.0);
        let v = ev().value(&phi3, p).unwrap();
        assert!((v.re - 1.21 / 2.0).abs() < 1e-13);
        assert_eq!(phi2.anchor(), Some(a));
    }

    #[test]
    fn singular_points_are_reported() {
        let f = real_expr("1/(x-y)").unwrap();
        assert!(matches!(
            ev().jet(&f, [0.5, 0.5]),
            Err(Error::Singular { .. })
        ));
        let g = real_expr("x - y").unwrap().recip();
        assert!(matches!(
            ev().jet(&g, [0.5, 0.5]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn compose_profiles() {
        let rho = real_expr("x*y").unwrap();
        let f0 = rho.compose(Profile::Expr(crate::exprfield::parse("exp(rho)").unwrap()));
        let direct = real_expr("exp(x*y)").unwrap();
        let p = [0.7, 0.2];
        let (a, b) = (ev().jet(&f0, p).unwrap(), ev().jet(&direct, p).unwrap());
        assert!((a.v - b.v).norm() < 1e-15 && (a.laplacian() - b.laplacian()).norm() < 1e-13);
        let s = Profile::IntegralOf {
            s: crate::exprfield::parse("1/rho").unwrap(),
            rho_ref: 1.0,
        };
        let r = real_expr("sqrt(x^2+y^2)").unwrap();
        let big_s = r.compose(s);
        let j = ev().jet(&big_s, [1.2, 0.9]).unwrap();
        assert!((j.v.re - 1.5f64.ln()).abs() < 1e-9);
        let dz = ev().value(&big_s.dz(), [1.2, 0.9]).unwrap();
        assert!((dz - j.dz()).norm() < 1e-12);
    }
}
