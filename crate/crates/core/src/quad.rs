//! Composite Gauss–Legendre quadrature.

use std::f64::consts::PI;
use std::ops::Add;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Absolute and relative tolerances of the panel-doubling loop.
pub const DOUBLING_ABS_TOL: f64 = 1e-10;
pub const DOUBLING_REL_TOL: f64 = 1e-9;
pub const MAX_PANELS: usize = 4096;

/// Number of panels and Gauss nodes per panel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quadrature {
    pub panels: usize,
    pub nodes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            panels: 32,
            nodes: 8,
        }
    }
}

impl Quadrature {
    pub fn new(panels: usize, nodes: usize) -> Result<Self> {
        if panels == 0 || nodes == 0 || nodes > 64 {
            return Err(Error::Invalid(format!(
                "bad quadrature: {panels} panels x {nodes} nodes"
            )));
        }
        Ok(Quadrature { panels, nodes })
    }

    pub fn doubled(&self) -> Self {
        Quadrature {
            panels: self.panels * 2,
            nodes: self.nodes,
        }
    }

    pub fn rule(&self) -> Arc<GaussRule> {
        GaussRule::cached(self.nodes)
    }

    /// Nodes `t` and weights on `[0, 1]`, panel by panel.
    pub fn unit_nodes(&self) -> Vec<(f64, f64)> {
        let rule = self.rule();
        let h = 1.0 / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.nodes);
        for p in 0..self.panels {
            let a = p as f64 * h;
            for (x, w) in rule.x.iter().zip(&rule.w) {
                out.push((a + 0.5 * h * (x + 1.0), 0.5 * h * w));
            }
        }
        out
    }
}

/// Gauss–Legendre rule on `[-1, 1]` plus the matrix of partial integrals
/// `cumulative[i][j] = ∫_{-1}^{x_i} ℓ_j(s) ds` of the Lagrange basis.
#[derive(Debug)]
pub struct GaussRule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub cumulative: Vec<Vec<f64>>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut cumulative = vec![vec![0.0; n]; n];
        for (i, row) in cumulative.iter_mut().enumerate() {
            // map the rule onto [-1, x_i]; exact for the degree n-1 basis
            let half = 0.5 * (x[i] + 1.0);
            for (xk, wk) in x.iter().zip(&w) {
                let s = -1.0 + half * (xk + 1.0);
                for (j, r) in row.iter_mut().enumerate() {
                    *r += half * wk * lagrange(&x, j, s);
                }
            }
        }
        GaussRule { x, w, cumulative }
    }

    pub fn cached(n: usize) -> Arc<GaussRule> {
        static CACHE: OnceLock<Mutex<Vec<Option<Arc<GaussRule>>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(vec![None; 65]));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard[n]
            .get_or_insert_with(|| Arc::new(GaussRule::new(n)))
            .clone()
    }
}

fn lagrange(x: &[f64], j: usize, s: f64) -> f64 {
    x.iter()
        .enumerate()
        .filter(|(k, _)| *k != j)
        .map(|(_, xk)| (s - xk) / (x[j] - xk))
        .product()
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// in increasing node order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Pairwise (tree) summation, fixed order for reproducibility.
pub fn pairwise_sum<T: Copy + Add<Output = T>>(xs: &[T], zero: T) -> T {
    match xs.len() {
        0 => zero,
        1 => xs[0],
        n if n <= 8 => xs[1..].iter().fold(xs[0], |a, b| a + *b),
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid], zero) + pairwise_sum(&xs[mid..], zero)
        }
    }
}

pub(crate) fn converged(prev: f64, next: f64) -> bool {
    let d = (next - prev).abs();
    d <= DOUBLING_ABS_TOL || d <= DOUBLING_REL_TOL * next.abs()
}

/// Integrate a real function over `[a, b]` with panel doubling.
pub fn integrate_1d(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    quad: Quadrature,
) -> Result<f64> {
    let once = |q: Quadrature| -> Result<f64> {
        let terms = q
            .unit_nodes()
            .into_iter()
            .map(|(t, w)| Ok(w * f(a + t * (b - a))?))
            .collect::<Result<Vec<f64>>>()?;
        Ok((b - a) * pairwise_sum(&terms, 0.0))
    };
    let mut q = quad;
    let mut prev = once(q)?;
    loop {
        q = q.doubled();
        if q.panels > MAX_PANELS {
            return Err(Error::NonConvergence(format!(
                "1D integral on [{a}, {b}] not settled at {} panels",
                q.panels / 2
            )));
        }
        let next = once(q)?;
        if converged(prev, next) {
            return Ok(next);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n = {n}");
            // ∫ s^(2n-2) ds over [-1, 1] = 2 / (2n-1)
            let deg = 2 * n - 2;
            let q: f64 = x.iter().zip(&w).map(|(s, w)| w * s.powi(deg as i32)).sum();
            assert!((q - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n = {n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn cumulative_matrix_integrates_basis() {
        let rule = GaussRule::new(8);
        // ∫_{-1}^{x_i} s^3 ds = (x_i^4 - 1) / 4
        for (i, xi) in rule.x.iter().enumerate() {
            let q: f64 = (0..8)
                .map(|j| rule.cumulative[i][j] * rule.x[j].powi(3))
                .sum();
            assert!((q - (xi.powi(4) - 1.0) / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_1d() {
        let v = integrate_1d(&|x| Ok(x.exp()), 0.0, 1.0, Quadrature::default()).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        let v = integrate_1d(&|r| Ok(1.0 / r), 1.0, 3.0, Quadrature::new(2, 4).unwrap()).unwrap();
        assert!((v - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn pairwise_sum_is_exact_for_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs, 0.0), 500500.0);
    }
}
