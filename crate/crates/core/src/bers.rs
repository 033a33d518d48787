//! Generating pairs and pseudoanalytic functions.
//!
//! Every formula uses the Wirtinger convention without the factor 1/2.
//! For a pair `(F, G)` with `Im(F̄G) > 0` the characteristic coefficients
//! are
//!
//! ```text
//! a = -(F̄ G_z̄ - F_z̄ Ḡ) / (F Ḡ - F̄ G)     b = (F G_z̄ - F_z̄ G) / (F Ḡ - F̄ G)
//! A = -(F̄ G_z  - F_z  Ḡ) / (F Ḡ - F̄ G)     B = (F G_z  - F_z  G) / (F Ḡ - F̄ G)
//! ```
//!
//! `w` is `(F, G)`-pseudoanalytic when `w_z̄ = a w + b w̄` (the Vekua
//! equation); its `(F, G)`-derivative is `ẇ = w_z - A w - B w̄`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::field::{Evaluator, Field};
use crate::Point2;

/// Relative threshold below which `Im(F̄G)` counts as zero.
pub const DEGENERACY: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct GeneratingPair {
    pub f: Field,
    pub g: Field,
    /// Set on pairs produced by [`GeneratingPair::adjoint`], so that taking
    /// the adjoint twice returns the original fields exactly.
    dual: Option<Arc<(Field, Field)>>,
}

#[derive(Clone, Debug)]
pub struct PairCoefficients {
    pub a: Field,
    pub b: Field,
    pub big_a: Field,
    pub big_b: Field,
}

/// `Im(F̄G)` of two values.
pub fn im_fbar_g(f: Complex64, g: Complex64) -> f64 {
    (f.conj() * g).im
}

fn degenerate(f: Complex64, g: Complex64) -> bool {
    let d = im_fbar_g(f, g);
    !d.is_finite() || d <= DEGENERACY * f.norm() * g.norm()
}

impl GeneratingPair {
    pub fn new(f: Field, g: Field) -> Self {
        GeneratingPair { f, g, dual: None }
    }

    /// Check `Im(F̄G) > 0` at every sample.
    pub fn validate(&self, samples: &[Point2], ev: &Evaluator) -> Result<()> {
        let vals = ev.sample(&[&self.f, &self.g], samples)?;
        for (p, v) in samples.iter().zip(&vals) {
            if degenerate(v[0].v, v[1].v) {
                return Err(Error::DegeneratePair(format!(
                    "Im(conj(F) G) = {:e} at ({}, {})",
                    im_fbar_g(v[0].v, v[1].v),
                    p[0],
                    p[1]
                )));
            }
        }
        Ok(())
    }

    /// `F Ḡ - F̄ G = -2i Im(F̄G)`.
    fn den(&self) -> Field {
        &self.f * &self.g.conj() - &self.f.conj() * &self.g
    }

    pub fn coefficients(&self) -> PairCoefficients {
        let (f, g) = (&self.f, &self.g);
        let (fb, gb) = (f.conj(), g.conj());
        let den = self.den();
        let (fz, fzb, gz, gzb) = (f.dz(), f.dzbar(), g.dz(), g.dzbar());
        PairCoefficients {
            a: -((&fb * &gzb - &fzb * &gb) / den.clone()),
            b: (f * &gzb - &fzb * g) / den.clone(),
            big_a: -((&fb * &gz - &fz * &gb) / den.clone()),
            big_b: (f * &gz - &fz * g) / den,
        }
    }

    /// `(F*, G*) = (-2F̄, 2Ḡ) / (F Ḡ - F̄ G)`.
    pub fn adjoint(&self) -> GeneratingPair {
        if let Some(d) = &self.dual {
            return GeneratingPair {
                f: d.0.clone(),
                g: d.1.clone(),
                dual: Some(Arc::new((self.f.clone(), self.g.clone()))),
            };
        }
        let mut adj = self.adjoint_by_formula();
        adj.dual = Some(Arc::new((self.f.clone(), self.g.clone())));
        adj
    }

    /// The adjoint computed from the defining formula, ignoring any
    /// remembered dual.
    pub fn adjoint_by_formula(&self) -> GeneratingPair {
        let den = self.den();
        GeneratingPair::new(
            self.f.conj().scale_re(-2.0) / den.clone(),
            self.g.conj().scale_re(2.0) / den,
        )
    }

    /// Representation `w = φF + ψG` as real fields `(φ, ψ)`:
    /// `φ = Im(w̄G) / Im(F̄G)`, `ψ = Im(F̄w) / Im(F̄G)`.
    pub fn decompose_field(&self, w: &Field) -> (Field, Field) {
        let det = (&self.f.conj() * &self.g).im();
        let phi = (&w.conj() * &self.g).im() / det.clone();
        let psi = (&self.f.conj() * w).im() / det;
        (phi, psi)
    }

    /// `φF + ψG` for real fields `φ`, `ψ`.
    pub fn compose(&self, phi: &Field, psi: &Field) -> Field {
        phi * &self.f + psi * &self.g
    }
}

/// Unique real `(φ, ψ)` with `w = φF + ψG`.
pub fn decompose(w: Complex64, f: Complex64, g: Complex64) -> Result<(f64, f64)> {
    if degenerate(f, g) {
        return Err(Error::DegeneratePair(format!(
            "Im(conj(F) G) = {:e}",
            im_fbar_g(f, g)
        )));
    }
    let det = im_fbar_g(f, g);
    let phi = (w.conj() * g).im / det;
    let psi = (f.conj() * w).im / det;
    let back = f * phi + g * psi;
    if (back - w).norm() > 1e-9 * (1.0 + w.norm()) {
        return Err(Error::DegeneratePair(format!(
            "decomposition leaves residual {:e}",
            (back - w).norm()
        )));
    }
    Ok((phi, psi))
}

impl PairCoefficients {
    /// `w_z̄ - a w - b w̄` as a field.
    pub fn vekua_residual_field(&self, w: &Field) -> Field {
        w.dzbar() - &self.a * w - &self.b * &w.conj()
    }

    /// `ẇ = w_z - A w - B w̄` as a field.
    pub fn fg_derivative_field(&self, w: &Field) -> Field {
        w.dz() - &self.big_a * w - &self.big_b * &w.conj()
    }

    /// Coefficients of the successor pair: `a1 = a`, `b1 = -B`.
    pub fn successor_ab(&self) -> (Field, Field) {
        (self.a.clone(), -&self.big_b)
    }
}

pub fn vekua_residual(
    w: &Field,
    c: &PairCoefficients,
    p: Point2,
    ev: &Evaluator,
) -> Result<Complex64> {
    ev.value(&c.vekua_residual_field(w), p)
}

pub fn fg_derivative(
    w: &Field,
    c: &PairCoefficients,
    p: Point2,
    ev: &Evaluator,
) -> Result<Complex64> {
    ev.value(&c.fg_derivative_field(w), p)
}

/// Worst deviation from the successor identities `a1 = a`, `b1 = -B`,
/// measured as `|Δ| / (1 + |ref|)`.
pub fn successor_error(
    pred: &PairCoefficients,
    succ: &PairCoefficients,
    samples: &[Point2],
    ev: &Evaluator,
) -> Result<f64> {
    let fields = [&pred.a, &pred.big_b, &succ.a, &succ.b];
    let vals = ev.sample(&fields, samples)?;
    Ok(vals
        .iter()
        .map(|v| {
            let ea = (v[2].v - v[0].v).norm() / (1.0 + v[0].v.norm());
            let eb = (v[3].v + v[1].v).norm() / (1.0 + v[1].v.norm());
            ea.max(eb)
        })
        .fold(0.0, f64::max))
}

/// True iff `succ` is a successor of `pred` within `tol` at all samples.
pub fn successor_check(
    pred: &PairCoefficients,
    succ: &PairCoefficients,
    samples: &[Point2],
    tol: f64,
    ev: &Evaluator,
) -> Result<bool> {
    Ok(successor_error(pred, succ, samples, ev)? <= tol)
}

/// `∫_Γ w d(F,G)z = Re∫ F* w dz - i Re∫ G* w dz`.
pub fn fg_integral(
    w: &Field,
    pair: &GeneratingPair,
    gamma: &Curve,
    ev: &Evaluator,
) -> Result<Complex64> {
    let adj = pair.adjoint();
    let i1 = gamma.integrate_field(&(&adj.f * w), ev)?;
    let i2 = gamma.integrate_field(&(&adj.g * w), ev)?;
    Ok(Complex64::new(i1.re, -i2.re))
}

fn same_point(a: Point2, b: Point2) -> bool {
    (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12
}

/// `*∫_Γ w d(F,G)z = Re∫ G* w dz + i Re∫ F* w dz` along `path` from `z0`
/// to `z1`.
pub fn star_antiderivative(
    w: &Field,
    pair: &GeneratingPair,
    z0: Point2,
    z1: Point2,
    path: &Curve,
    ev: &Evaluator,
) -> Result<Complex64> {
    if !same_point(path.start()?, z0) || !same_point(path.end()?, z1) {
        return Err(Error::Invalid(format!(
            "path does not run from {z0:?} to {z1:?}"
        )));
    }
    let adj = pair.adjoint();
    let ig = path.integrate_field(&(&adj.g * w), ev)?;
    let if_ = path.integrate_field(&(&adj.f * w), ev)?;
    Ok(Complex64::new(ig.re, if_.re))
}

/// [`star_antiderivative`] along two paths, failing with
/// [`Error::PathDependent`] when they disagree by more than `tol`.
pub fn star_antiderivative_checked(
    w: &Field,
    pair: &GeneratingPair,
    z0: Point2,
    z1: Point2,
    paths: [&Curve; 2],
    tol: f64,
    ev: &Evaluator,
) -> Result<Complex64> {
    let a = star_antiderivative(w, pair, z0, z1, paths[0], ev)?;
    let b = star_antiderivative(w, pair, z0, z1, paths[1], ev)?;
    if (a - b).norm() > tol * (1.0 + a.norm()) {
        return Err(Error::PathDependent(format!(
            "two paths give {a} and {b} (difference {:e})",
            (a - b).norm()
        )));
    }
    Ok(a)
}
