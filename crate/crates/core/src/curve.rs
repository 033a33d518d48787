//! Rectifiable curves and contour integrals `∫_Γ h dz`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exprfield::{parse, Expr, Frame};
use crate::field::{Evaluator, Field};
use crate::quad::{self, pairwise_sum, Quadrature, MAX_PANELS};
use crate::Point2;

/// Endpoint coincidence tolerance for closed curves.
pub const CLOSED_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum Shape {
    /// `t ↦ (x(t), y(t))`, `t ∈ [0, 1]`.
    Param {
        x: Expr,
        y: Expr,
    },
    Polyline(Vec<Point2>),
}

#[derive(Clone, Debug)]
pub struct Curve {
    pub shape: Shape,
    /// Panels per parametric curve, or per polyline segment.
    pub quad: Quadrature,
}

/// A quadrature node on a curve: position and `weight · γ'(t)`.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub z: Point2,
    pub dz: Complex64,
}

impl Curve {
    pub fn param(x: &str, y: &str) -> Result<Curve> {
        let (x, y) = (parse(x)?, parse(y)?);
        Frame::Param.check(&x)?;
        Frame::Param.check(&y)?;
        Ok(Curve {
            shape: Shape::Param { x, y },
            quad: Quadrature::default(),
        })
    }

    pub fn polyline(points: Vec<Point2>) -> Result<Curve> {
        if points.len() < 2 {
            return Err(Error::Invalid(
                "polyline needs at least two vertices".into(),
            ));
        }
        Ok(Curve {
            shape: Shape::Polyline(points),
            quad: Quadrature::default(),
        })
    }

    pub fn segment(a: Point2, b: Point2) -> Curve {
        Curve {
            shape: Shape::Polyline(vec![a, b]),
            quad: Quadrature::default(),
        }
    }

    /// Counter-clockwise circle.
    pub fn circle(center: Point2, r: f64) -> Curve {
        let x = format!("{} + {}*cos(2*pi*t)", center[0], r);
        let y = format!("{} + {}*sin(2*pi*t)", center[1], r);
        Curve::param(&x, &y).expect("circle expressions")
    }

    pub fn with_quad(mut self, quad: Quadrature) -> Curve {
        self.quad = quad;
        self
    }

    pub fn point(&self, t: f64) -> Result<Point2> {
        match &self.shape {
            Shape::Param { x, y } => Ok([
                x.eval_at(Frame::Param, &[t])?,
                y.eval_at(Frame::Param, &[t])?,
            ]),
            Shape::Polyline(v) => {
                let m = v.len() - 1;
                let s = (t.clamp(0.0, 1.0) * m as f64).min(m as f64 - 1e-300);
                let i = (s.floor() as usize).min(m - 1);
                let u = s - i as f64;
                Ok([
                    v[i][0] + u * (v[i + 1][0] - v[i][0]),
                    v[i][1] + u * (v[i + 1][1] - v[i][1]),
                ])
            }
        }
    }

    pub fn start(&self) -> Result<Point2> {
        match &self.shape {
            Shape::Polyline(v) => Ok(v[0]),
            _ => self.point(0.0),
        }
    }

    pub fn end(&self) -> Result<Point2> {
        match &self.shape {
            Shape::Polyline(v) => Ok(*v.last().expect("nonempty polyline")),
            _ => self.point(1.0),
        }
    }

    pub fn is_closed(&self) -> Result<bool> {
        let (a, b) = (self.start()?, self.end()?);
        Ok((a[0] - b[0]).abs() <= CLOSED_TOL && (a[1] - b[1]).abs() <= CLOSED_TOL)
    }

    /// Quadrature nodes for the given rule.
    pub fn nodes(&self, q: Quadrature) -> Result<Vec<Node>> {
        let unit = q.unit_nodes();
        match &self.shape {
            Shape::Param { x, y } => unit
                .iter()
                .map(|&(t, w)| {
                    let jx = x.eval_jet(Frame::Param, [t])?;
                    let jy = y.eval_jet(Frame::Param, [t])?;
                    Ok(Node {
                        z: [jx.v, jy.v],
                        dz: Complex64::new(jx.g[0], jy.g[0]) * w,
                    })
                })
                .collect(),
            Shape::Polyline(v) => Ok(v
                .windows(2)
                .flat_map(|s| {
                    let (a, b) = (s[0], s[1]);
                    let d = Complex64::new(b[0] - a[0], b[1] - a[1]);
                    unit.iter().map(move |&(t, w)| Node {
                        z: [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
                        dz: d * w,
                    })
                })
                .collect()),
        }
    }

    /// `∫_Γ h(z) dz` for a batch integrand, doubling the panel count until
    /// two successive values agree.
    pub fn integrate(&self, h: &dyn Fn(&[Point2]) -> Result<Vec<Complex64>>) -> Result<Complex64> {
        let once = |q: Quadrature| -> Result<Complex64> {
            let nodes = self.nodes(q)?;
            let pts: Vec<Point2> = nodes.iter().map(|n| n.z).collect();
            let vals = h(&pts)?;
            let terms: Vec<Complex64> = vals
                .iter()
                .zip(&nodes)
                .map(|(v, n)| {
                    if v.is_finite() {
                        Ok(v * n.dz)
                    } else {
                        Err(Error::Singular {
                            what: "curve integrand".into(),
                            at: n.z,
                        })
                    }
                })
                .collect::<Result<_>>()?;
            Ok(pairwise_sum(&terms, Complex64::new(0.0, 0.0)))
        };
        let mut q = self.quad;
        let mut prev = once(q)?;
        loop {
            q = q.doubled();
            if q.panels > MAX_PANELS {
                return Err(Error::NonConvergence(format!(
                    "contour integral not settled at {} panels",
                    q.panels / 2
                )));
            }
            let next = once(q)?;
            let d = (next - prev).norm();
            if d <= quad::DOUBLING_ABS_TOL || d <= quad::DOUBLING_REL_TOL * next.norm() {
                return Ok(next);
            }
            prev = next;
        }
    }

    /// `∫_Γ f dz` for a plane field.
    pub fn integrate_field(&self, f: &Field, ev: &Evaluator) -> Result<Complex64> {
        self.integrate(&|pts| Ok(ev.sample_direct(f, pts)?.iter().map(|j| j.v).collect()))
    }
}
