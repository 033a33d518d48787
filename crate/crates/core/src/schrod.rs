//! The two-dimensional Schrödinger machinery: `(-Δ + u) f = 0` with a known
//! nonvanishing solution `f0`.
//!
//! The main pair `(F, G) = (1/f0, i f0)` has coefficients `a = A = 0`,
//! `b = -∂z̄f0/f0`, `B = -∂zf0/f0`. Its Vekua equation `w_z̄ = b w̄` is
//! called Vek1 below; `v_z̄ = b̄ v̄` is Vek2. Solutions move between the
//! two through `v = i ẇ`, and a Vek2 solution yields a Schrödinger solution
//! through the potentials `∂zΨ = v/f0`, `∂zΦ = ∂zf0/f0 + ∂zΨ/Ψ`,
//! `f = C e^Φ`.
//!
//! When `f0` is a function of a real `ρ` with `Δρ/|∇ρ|² = s(ρ)`, the pair
//! `F_I = i f0 e^{-S} ρ_z`, `G_I = -e^{-S} ρ_z / f0` (`S' = s`) generates
//! Vek2, and iterating antiderivatives produces an unbounded sequence of
//! solutions.

use num_complex::Complex64;

use crate::bers::{GeneratingPair, PairCoefficients};
use crate::curve::Curve;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::exprfield::{parse, Expr, Frame, ScalarJetField};
use crate::field::{Evaluator, Field, Profile};
use crate::jet::CJet;
use crate::quatcalc::ZETA;
use crate::Point2;

/// Default residual tolerance with analytic jets.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Largest sampled residual and where it occurred.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stats {
    pub max: f64,
    pub at: Option<Point2>,
    pub samples: usize,
}

impl Stats {
    fn push(&mut self, r: f64, p: Point2) {
        self.samples += 1;
        if r > self.max || self.at.is_none() || r.is_nan() {
            self.max = if r.is_nan() {
                f64::INFINITY
            } else {
                r.max(self.max)
            };
            self.at = Some(p);
        }
    }

    pub fn merge(self, o: Stats) -> Stats {
        let (hi, lo) = if o.max > self.max {
            (o, self)
        } else {
            (self, o)
        };
        Stats {
            max: hi.max,
            at: hi.at.or(lo.at),
            samples: hi.samples + lo.samples,
        }
    }

    pub fn require(&self, what: &str, tol: f64) -> Result<()> {
        if self.max <= tol {
            Ok(())
        } else {
            Err(Error::Residual {
                what: match self.at {
                    Some(p) => format!("{what} at ({}, {})", p[0], p[1]),
                    None => what.to_string(),
                },
                residual: self.max,
                tolerance: tol,
            })
        }
    }
}

/// Relative residual of `w_z̄ = a w + b w̄` from jets.
pub fn vekua_rel(w: &CJet, a: Complex64, b: Complex64) -> f64 {
    let (aw, bw) = (a * w.v, b * w.v.conj());
    let r = w.dzbar() - aw - bw;
    r.norm() / (1.0 + w.dzbar().norm() + aw.norm() + bw.norm())
}

/// Sampled relative Vekua residual of `w` for the given coefficients.
pub fn vekua_stats(
    w: &Field,
    c: &PairCoefficients,
    pts: &[Point2],
    ev: &Evaluator,
) -> Result<Stats> {
    let vals = ev.sample(&[w, &c.a, &c.b], pts)?;
    let mut s = Stats::default();
    for (p, v) in pts.iter().zip(&vals) {
        s.push(vekua_rel(&v[0], v[1].v, v[2].v), *p);
    }
    Ok(s)
}

/// Sampled `|∂y Re g + ∂x Im g| / (1 + |∇g|)`; zero iff `g = ∂zΦ` for a
/// real `Φ`.
pub fn curl_stats(g: &Field, pts: &[Point2], ev: &Evaluator) -> Result<Stats> {
    let vals = ev.sample(&[g], pts)?;
    let mut s = Stats::default();
    for (p, v) in pts.iter().zip(&vals) {
        let j = &v[0];
        let curl = j.g[1].re + j.g[0].im;
        s.push(curl.abs() / (1.0 + j.g[0].norm() + j.g[1].norm()), *p);
    }
    Ok(s)
}

/// `|(-Δ + u) f| / (1 + |f||u|)` from the jet of `f`.
pub fn schrodinger_rel(f: &CJet, u: Complex64) -> f64 {
    let r = -f.laplacian() + u * f.v;
    r.norm() / (1.0 + f.v.norm() * u.norm())
}

#[derive(Clone, Debug)]
pub struct SchrodingerProblem {
    pub u: ScalarJetField,
    pub f0: ScalarJetField,
    pub u_field: Field,
    pub f0_field: Field,
    pub domain: Domain,
    /// Samples per axis.
    pub grid: usize,
    pub zeta: f64,
    pub tol: f64,
}

impl SchrodingerProblem {
    pub fn new(u: &str, f0: &str, domain: Domain) -> Result<Self> {
        let u = ScalarJetField::parse(u, Frame::Plane)?;
        let f0 = ScalarJetField::parse(f0, Frame::Plane)?;
        Ok(SchrodingerProblem {
            u_field: Field::from_exprs(u.expr.clone(), None)?,
            f0_field: Field::from_exprs(f0.expr.clone(), None)?,
            u,
            f0,
            domain,
            grid: crate::domain::DEFAULT_GRID,
            zeta: ZETA,
            tol: DEFAULT_TOL,
        })
    }

    pub fn samples(&self) -> Vec<Point2> {
        self.domain.grid(self.grid)
    }

    pub fn interior_samples(&self) -> Vec<Point2> {
        self.domain.interior_grid(self.grid)
    }

    /// `|(-Δ + u) f| / (1 + |f||u|)` at the samples.
    pub fn residual_stats(&self, f: &Field, pts: &[Point2], ev: &Evaluator) -> Result<Stats> {
        let vals = ev.sample(&[f, &self.u_field], pts)?;
        let mut s = Stats::default();
        for (p, v) in pts.iter().zip(&vals) {
            s.push(schrodinger_rel(&v[0], v[1].v), *p);
        }
        Ok(s)
    }

    /// Residual of `f0` itself and its nonvanishing on the sample grid.
    pub fn validate(&self, ev: &Evaluator) -> Result<Stats> {
        let pts = self.samples();
        nonvanishing(&self.f0_field, "f0", &pts, self.zeta, ev)?;
        let s = self.residual_stats(&self.f0_field, &pts, ev)?;
        s.require("(-Δ+u) f0", self.tol)?;
        Ok(s)
    }
}

/// Fail with [`Error::Vanishing`] where `|f| <= zeta (1 + |∇f|)`.
pub fn nonvanishing(
    f: &Field,
    what: &str,
    pts: &[Point2],
    zeta: f64,
    ev: &Evaluator,
) -> Result<()> {
    let vals = ev.sample(&[f], pts)?;
    for (p, v) in pts.iter().zip(&vals) {
        let j = &v[0];
        let thr = zeta * (1.0 + j.g[0].norm() + j.g[1].norm());
        if j.v.norm().is_nan() || j.v.norm() <= thr {
            return Err(Error::Vanishing {
                what: what.to_string(),
                value: j.v.norm(),
                threshold: thr,
                at: p.to_vec(),
            });
        }
    }
    Ok(())
}

/// `(F, G) = (1/f0, i f0)`, after checking that `f0` does not vanish.
pub fn main_pair(prob: &SchrodingerProblem, ev: &Evaluator) -> Result<GeneratingPair> {
    nonvanishing(&prob.f0_field, "f0", &prob.samples(), prob.zeta, ev)?;
    Ok(GeneratingPair::new(
        prob.f0_field.recip(),
        prob.f0_field.times_i(),
    ))
}

/// `v = i ẇ = i (w_z + (∂zf0/f0) w̄)`, with residual checks on input and
/// output.
pub fn vek1_to_vek2(w: &Field, prob: &SchrodingerProblem, ev: &Evaluator) -> Result<Field> {
    let main = main_pair(prob, ev)?;
    let pts = prob.interior_samples();
    vekua_stats(w, &main.coefficients(), &pts, ev)?.require("Vek1 residual of w", prob.tol)?;
    let v = main.coefficients().fg_derivative_field(w).times_i();
    vekua_stats(&v, &vek2_coefficients(prob), &pts, ev)?.require("Vek2 residual of v", prob.tol)?;
    Ok(v)
}

/// Coefficients of Vek2: `a = 0`, `b = -∂zf0/f0`.
pub fn vek2_coefficients(prob: &SchrodingerProblem) -> PairCoefficients {
    let f0 = &prob.f0_field;
    let b = -(f0.dz() / f0.clone());
    PairCoefficients {
        a: Field::zero(),
        b: b.clone(),
        big_a: Field::zero(),
        big_b: Field::zero(),
    }
}

/// `v = f0 ∂z(f1/f0)`, a Vek2 solution when `f1` solves the equation.
pub fn schrod_to_vek2(f1: &Field, prob: &SchrodingerProblem, ev: &Evaluator) -> Result<Field> {
    let pts = prob.interior_samples();
    prob.residual_stats(f1, &pts, ev)?
        .require("(-Δ+u) f1", prob.tol)?;
    let f0 = &prob.f0_field;
    let v = f0 * &(f1 / f0).dz();
    vekua_stats(&v, &vek2_coefficients(prob), &pts, ev)?.require("Vek2 residual of v", prob.tol)?;
    Ok(v)
}

/// `Φ(p) - Φ(anchor) = Re∫_Γ Q dz` along `path`, after a curl check at the
/// path's own nodes.
pub fn potential_from_gradient_2d(
    q: &Field,
    anchor: Point2,
    p: Point2,
    path: &Curve,
    tol: f64,
    ev: &Evaluator,
) -> Result<f64> {
    let near = |a: Point2, b: Point2| (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12;
    if !near(path.start()?, anchor) || !near(path.end()?, p) {
        return Err(Error::Invalid(format!(
            "path does not run from {anchor:?} to {p:?}"
        )));
    }
    let probes: Vec<Point2> = path
        .nodes(crate::quad::Quadrature::new(4, 4)?)?
        .iter()
        .map(|n| n.z)
        .collect();
    curl_stats(q, &probes, ev)?.require("curl of the gradient", tol)?;
    Ok(path.integrate_field(q, ev)?.re)
}

/// Fields produced by [`generate_solution`].
#[derive(Clone, Debug)]
pub struct Generated {
    /// `∂zΨ = v/f0`.
    pub psi: Field,
    /// `∂zΦ = Q = ∂zf0/f0 + ∂zΨ/Ψ`.
    pub phi: Field,
    pub q: Field,
    /// `f = C e^Φ`.
    pub f: Field,
    pub psi_anchor: f64,
}

/// Schrödinger solution from a Vek2 solution `v`. `psi_anchor` is the
/// integration constant `Ψ(anchor)`; when `None` it is chosen as
/// `1 + max|Ψ - Ψ(anchor)|` over the domain, keeping `Ψ` away from zero.
pub fn generate_solution(
    v: &Field,
    prob: &SchrodingerProblem,
    anchor: Point2,
    psi_anchor: Option<f64>,
    c: f64,
    ev: &Evaluator,
) -> Result<Generated> {
    let f0 = &prob.f0_field;
    let grad_psi = v / f0;
    let probes = prob.domain.hull_with(anchor).grid(7);
    curl_stats(&grad_psi, &probes, ev)?.require("curl of v/f0", prob.tol)?;
    let psi_anchor = match psi_anchor {
        Some(a) => a,
        None => {
            let psi0 = Field::potential(grad_psi.clone(), anchor, 0.0);
            let vals = ev.sample(&[&psi0], &prob.domain.grid(11))?;
            1.0 + vals.iter().map(|v| v[0].v.re.abs()).fold(0.0, f64::max)
        }
    };
    if psi_anchor.abs() <= prob.zeta {
        return Err(Error::Vanishing {
            what: "Ψ".into(),
            value: psi_anchor.abs(),
            threshold: prob.zeta,
            at: anchor.to_vec(),
        });
    }
    let psi = Field::potential(grad_psi.clone(), anchor, psi_anchor);
    let q = f0.dz() / f0.clone() + grad_psi / psi.clone();
    let f0a = ev.value(f0, anchor)?.re;
    if f0a.abs() <= prob.zeta {
        return Err(Error::Vanishing {
            what: "f0".into(),
            value: f0a.abs(),
            threshold: prob.zeta,
            at: anchor.to_vec(),
        });
    }
    let phi = Field::potential(q.clone(), anchor, (f0a * psi_anchor).abs().ln());
    let f = phi.exp().scale_re(c);
    Ok(Generated {
        psi,
        phi,
        q,
        f,
        psi_anchor,
    })
}

/// Data of the condition `f0 = f0(ρ)`, `Δρ/|∇ρ|² = s(ρ)`.
#[derive(Clone, Debug)]
pub struct RhoStructure {
    pub rho: ScalarJetField,
    pub s: Expr,
    /// `S` with `S' = s`.
    pub big_s: Profile,
    pub f0_of_rho: Expr,
}

impl RhoStructure {
    /// `big_s = None` integrates `s` from `rho_ref`.
    pub fn new(
        rho: &str,
        s: &str,
        big_s: Option<&str>,
        f0_of_rho: &str,
        rho_ref: f64,
    ) -> Result<Self> {
        let rho = ScalarJetField::parse(rho, Frame::Plane)?;
        let s = parse(s)?;
        Frame::Profile.check(&s)?;
        let big_s = match big_s {
            Some(src) => {
                let e = parse(src)?;
                Frame::Profile.check(&e)?;
                Profile::Expr(e)
            }
            None => Profile::IntegralOf {
                s: s.clone(),
                rho_ref,
            },
        };
        let f0_of_rho = parse(f0_of_rho)?;
        Frame::Profile.check(&f0_of_rho)?;
        Ok(RhoStructure {
            rho,
            s,
            big_s,
            f0_of_rho,
        })
    }

    pub fn rho_field(&self) -> Field {
        Field::from_exprs(self.rho.expr.clone(), None).expect("plane expression")
    }

    /// `e^{-S(ρ)}` as a field.
    pub fn exp_minus_s(&self) -> Field {
        (-self.rho_field().compose(self.big_s.clone())).exp()
    }

    /// Worst relative mismatch of `Δρ/|∇ρ|² = s(ρ)`, `f0(ρ) = f0` and
    /// `S' = s` at `n` reproducible random points.
    pub fn consistency_error(
        &self,
        prob: &SchrodingerProblem,
        n: usize,
        seed: u64,
    ) -> Result<Stats> {
        let mut st = Stats::default();
        for p in prob.domain.random_points(n, seed) {
            let r = self.rho.jet2(p)?;
            let grad2 = r.g[0] * r.g[0] + r.g[1] * r.g[1];
            if grad2.sqrt() <= ZETA {
                return Err(Error::Vanishing {
                    what: "|grad ρ|".into(),
                    value: grad2.sqrt(),
                    threshold: ZETA,
                    at: p.to_vec(),
                });
            }
            let s = self.s.eval_at(Frame::Profile, &[r.v])?;
            let e1 = (r.laplacian() / grad2 - s).abs() / (1.0 + s.abs());
            let f0p = self.f0_of_rho.eval_at(Frame::Profile, &[r.v])?;
            let f0 = prob.f0.value(&p)?;
            let e2 = (f0p - f0).abs() / (1.0 + f0.abs());
            let (_, ds, _) = self.big_s.jet(r.v)?;
            let e3 = (ds - s).abs() / (1.0 + s.abs());
            st.push(e1.max(e2).max(e3), p);
        }
        Ok(st)
    }
}

/// `(F_I, G_I) = (i f0 e^{-S} ρ_z, -e^{-S} ρ_z / f0)`, checked for
/// validity on the sample grid.
pub fn rho_pair(
    prob: &SchrodingerProblem,
    rho: &RhoStructure,
    ev: &Evaluator,
) -> Result<GeneratingPair> {
    let rz = rho.rho_field().dz();
    let es = rho.exp_minus_s();
    let f0 = &prob.f0_field;
    let fi = (f0 * &es * rz.clone()).times_i();
    let gi = -(&es * &rz / f0.clone());
    let pair = GeneratingPair::new(fi, gi);
    let pts = prob.samples();
    nonvanishing(&rz, "ρ_z", &pts, prob.zeta, ev)?;
    pair.validate(&pts, ev)?;
    Ok(pair)
}

/// Profile derivatives `φ' = e^{-S} f0²` and `ψ' = e^{-S} / f0²` of the
/// ansatz `φ = φ(ρ)` (resp. `ψ = ψ(ρ)`).
#[derive(Clone, Debug)]
pub struct PhiProfile {
    rho: RhoStructure,
}

pub fn phi_profile(rho: &RhoStructure) -> PhiProfile {
    PhiProfile { rho: rho.clone() }
}

impl PhiProfile {
    /// `(φ'(ρ), ψ'(ρ))`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let (s, _, _) = self.rho.big_s.jet(r)?;
        let f0 = self.rho.f0_of_rho.eval_at(Frame::Profile, &[r])?;
        let e = f64::exp(-s);
        Ok((e * f0 * f0, e / (f0 * f0)))
    }

    /// `φ'' + (s - 2 f0'/f0) φ'` with `φ''` differentiated through `S`.
    pub fn ode_residual(&self, r: f64) -> Result<f64> {
        let (big_s, ds, _) = self.rho.big_s.jet(r)?;
        let f = self.rho.f0_of_rho.eval_jet(Frame::Profile, [r])?;
        let s = self.rho.s.eval_at(Frame::Profile, &[r])?;
        let e = f64::exp(-big_s);
        let p1 = e * f.v * f.v;
        let p2 = e * (-ds * f.v * f.v + 2.0 * f.v * f.g[0]);
        Ok(p2 + (s - 2.0 * f.g[0] / f.v) * p1)
    }

    /// `φ(ρ)` with `φ(ρ(anchor)) = 0` as a field, and the potential `ψ` of
    /// `ψ_z = -i e^{-S} ρ_z` anchored at zero.
    pub fn first_pair(&self, anchor: Point2) -> Result<(Field, Field)> {
        let rho = self.rho.rho_field();
        let rz = rho.dz();
        let es = self.rho.exp_minus_s();
        let f0r = rho.compose(Profile::Expr(self.rho.f0_of_rho.clone()));
        let phi = Field::potential(&es * &f0r * f0r.clone() * rz.clone(), anchor, 0.0);
        let psi = Field::potential((&es * &rz).scale(-Complex64::i()), anchor, 0.0);
        Ok((phi, psi))
    }

    /// The second profile solution: `φ_z = i e^{-S} ρ_z`,
    /// `ψ_z = e^{-S} ρ_z / f0²`.
    pub fn second_pair(&self, anchor: Point2) -> Result<(Field, Field)> {
        let rho = self.rho.rho_field();
        let rz = rho.dz();
        let es = self.rho.exp_minus_s();
        let f0r = rho.compose(Profile::Expr(self.rho.f0_of_rho.clone()));
        let phi = Field::potential((&es * &rz).times_i(), anchor, 0.0);
        let psi = Field::potential(&es * &rz / (&f0r * &f0r), anchor, 0.0);
        Ok((phi, psi))
    }
}

/// `Re∫_Γ ∂z(f1/f0) dz` and `Im∫_Γ f0² ∂z(f1/f0) dz` over a closed curve.
pub fn cauchy_check(
    prob: &SchrodingerProblem,
    f1: &Field,
    gamma: &Curve,
    ev: &Evaluator,
) -> Result<(f64, f64)> {
    if !gamma.is_closed()? {
        return Err(Error::Invalid("Cauchy check needs a closed curve".into()));
    }
    let f0 = &prob.f0_field;
    let d = (f1 / f0).dz();
    let i1 = gamma.integrate_field(&d, ev)?.re;
    let i2 = gamma.integrate_field(&(f0 * f0 * d.clone()), ev)?.im;
    Ok((i1, i2))
}

/// Sampled residual of `φ_z̄ + i f0² ψ_z̄ = 0`, relative to the size of the
/// two terms.
pub fn first_kind_stats(
    phi: &Field,
    psi: &Field,
    f0: &Field,
    pts: &[Point2],
    ev: &Evaluator,
) -> Result<Stats> {
    let vals = ev.sample(&[phi, psi, f0], pts)?;
    let mut s = Stats::default();
    for (p, v) in pts.iter().zip(&vals) {
        let a = v[0].dzbar();
        let b = Complex64::i() * v[2].v * v[2].v * v[1].dzbar();
        s.push((a + b).norm() / (1.0 + a.norm() + b.norm()), *p);
    }
    Ok(s)
}

/// Sampled residual of `i f0² φ_z̄ - ψ_z̄ = 0`.
pub fn second_kind_stats(
    phi: &Field,
    psi: &Field,
    f0: &Field,
    pts: &[Point2],
    ev: &Evaluator,
) -> Result<Stats> {
    let vals = ev.sample(&[phi, psi, f0], pts)?;
    let mut s = Stats::default();
    for (p, v) in pts.iter().zip(&vals) {
        let a = Complex64::i() * v[2].v * v[2].v * v[0].dzbar();
        let b = v[1].dzbar();
        s.push((a - b).norm() / (1.0 + a.norm() + b.norm()), *p);
    }
    Ok(s)
}

/// `max |φ_x ψ_x + φ_y ψ_y|` over the samples, after checking that
/// `φ_z̄ + i f0² ψ_z̄ = 0` holds there.
pub fn orthogonality_check(
    phi: &Field,
    psi: &Field,
    f0: &Field,
    pts: &[Point2],
    tol: f64,
    ev: &Evaluator,
) -> Result<f64> {
    first_kind_stats(phi, psi, f0, pts, ev)?.require("φ_z̄ + i f0² ψ_z̄", tol)?;
    let vals = ev.sample(&[phi, psi], pts)?;
    Ok(vals
        .iter()
        .map(|v| (v[0].g[0] * v[1].g[0] + v[0].g[1] * v[1].g[1]).norm())
        .fold(0.0, f64::max))
}

/// `(φ, ψ) ↦ (ψ, -φ)`, taking solutions of `φ_z̄ + i f0² ψ_z̄ = 0` to
/// solutions of `i f0² φ_z̄ - ψ_z̄ = 0`. Both sides are residual-checked.
pub fn second_kind_swap(
    phi: &Field,
    psi: &Field,
    f0: &Field,
    pts: &[Point2],
    tol: f64,
    ev: &Evaluator,
) -> Result<(Field, Field)> {
    first_kind_stats(phi, psi, f0, pts, ev)?.require("φ_z̄ + i f0² ψ_z̄", tol)?;
    let (p1, q1) = (psi.clone(), -phi);
    second_kind_stats(&p1, &q1, f0, pts, ev)?.require("i f0² φ_z̄ - ψ_z̄", tol)?;
    Ok((p1, q1))
}

/// Residuals recorded for one cycle of the sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepLog {
    pub step: usize,
    /// Curl of the gradients fed to the potentials.
    pub curl: Stats,
    /// Vek2 residual of `v`.
    pub vek2: Stats,
    /// Schrödinger residual of `f`.
    pub schrod: Stats,
    /// Vek1 residual of the next `w`.
    pub vek1: Stats,
}

/// Immutable snapshot of the solution sequence.
#[derive(Clone, Debug)]
pub struct SequenceState {
    pub n: usize,
    /// Current Vek1 solution.
    pub w: Field,
    pub v: Option<Field>,
    pub f: Option<Field>,
    pub phi_psi: Option<(Field, Field)>,
    pub log: Vec<StepLog>,
}

impl SequenceState {
    pub fn start(w: Field) -> Self {
        SequenceState {
            n: 0,
            w,
            v: None,
            f: None,
            phi_psi: None,
            log: Vec::new(),
        }
    }
}

/// Everything the sequence needs, computed once.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub prob: SchrodingerProblem,
    pub rho: RhoStructure,
    pub anchor: Point2,
    pub c: f64,
    pub ev: Evaluator,
    pub main: GeneratingPair,
    pub main_coeffs: PairCoefficients,
    /// `(F_I, G_I)`.
    pub pair_i: GeneratingPair,
    pub coeffs_i: PairCoefficients,
    /// `(F_I*, G_I*)`; its adjoint is `(F_I, G_I)`.
    pub pair_i_star: GeneratingPair,
}

impl Pipeline {
    pub fn new(
        prob: SchrodingerProblem,
        rho: RhoStructure,
        anchor: Point2,
        c: f64,
        ev: Evaluator,
    ) -> Result<Self> {
        let main = main_pair(&prob, &ev)?;
        let pair_i = rho_pair(&prob, &rho, &ev)?;
        Ok(Pipeline {
            main_coeffs: main.coefficients(),
            coeffs_i: pair_i.coefficients(),
            pair_i_star: pair_i.adjoint(),
            main,
            pair_i,
            prob,
            rho,
            anchor,
            c,
            ev,
        })
    }

    /// The sequence starting from `w = F`.
    pub fn start(&self) -> SequenceState {
        SequenceState::start(self.main.f.clone())
    }

    /// `(φ, ψ)` with `φ + iψ` the star antiderivative of `w` with respect
    /// to `(F_I*, G_I*)`, anchored at zero: `φ_z = G_I w`, `ψ_z = F_I w`.
    pub fn antiderivative_i(&self, w: &Field) -> (Field, Field, [Field; 2]) {
        let adj = self.pair_i_star.adjoint();
        let gphi = &adj.g * w;
        let gpsi = &adj.f * w;
        (
            Field::potential(gphi.clone(), self.anchor, 0.0),
            Field::potential(gpsi.clone(), self.anchor, 0.0),
            [gphi, gpsi],
        )
    }

    /// One cycle: `w → (φ, ψ) → v = φF_I + ψG_I → f`, and
    /// `w' = φ'F + ψ'G` from the star antiderivative of `iv` with respect
    /// to `(F, G)`.
    pub fn sequence_step(&self, state: &SequenceState) -> Result<SequenceState> {
        let tol = self.prob.tol;
        let pts = self.prob.interior_samples();
        let probes = self.prob.domain.grid(7);

        let (phi, psi, grads) = self.antiderivative_i(&state.w);
        let v = self.pair_i.compose(&phi, &psi);
        let gen = generate_solution(&v, &self.prob, self.anchor, None, self.c, &self.ev)?;

        let adj = self.main.adjoint();
        let iv = v.times_i();
        let g1 = &adj.g * &iv;
        let g2 = &adj.f * &iv;
        let phi1 = Field::potential(g1.clone(), self.anchor, 0.0);
        let psi1 = Field::potential(g2.clone(), self.anchor, 0.0);
        let w_next = self.main.compose(&phi1, &psi1);

        let mut curl = Stats::default();
        for g in grads.iter().chain([&g1, &g2, &gen.q]) {
            curl = curl.merge(curl_stats(g, &probes, &self.ev)?);
        }
        curl.require("curl of a potential gradient", tol)?;

        let (ca, cb) = (&self.coeffs_i, &self.main_coeffs);
        let u = &self.prob.u_field;
        let fields = [&v, &ca.a, &ca.b, &gen.f, u, &gen.psi, &w_next, &cb.a, &cb.b];
        let vals = self.ev.sample(&fields, &pts)?;
        let (mut vek2, mut schrod, mut vek1) =
            (Stats::default(), Stats::default(), Stats::default());
        for (p, j) in pts.iter().zip(&vals) {
            vek2.push(vekua_rel(&j[0], j[1].v, j[2].v), *p);
            schrod.push(schrodinger_rel(&j[3], j[4].v), *p);
            vek1.push(vekua_rel(&j[6], j[7].v, j[8].v), *p);
            let psi = j[5].v.norm();
            if psi <= self.prob.zeta {
                return Err(Error::Vanishing {
                    what: "Ψ".into(),
                    value: psi,
                    threshold: self.prob.zeta,
                    at: p.to_vec(),
                });
            }
        }
        vek2.require("Vek2 residual of v", tol)?;
        schrod.require("Schrödinger residual of f", tol)?;
        vek1.require("Vek1 residual of the next w", tol)?;

        let mut log = state.log.clone();
        log.push(StepLog {
            step: state.n + 1,
            curl,
            vek2,
            schrod,
            vek1,
        });
        Ok(SequenceState {
            n: state.n + 1,
            w: w_next,
            v: Some(v),
            f: Some(gen.f),
            phi_psi: Some((phi, psi)),
            log,
        })
    }
}
