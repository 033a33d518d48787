//! Rectangular computational domains and their sample sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::Point2;

/// Default number of samples per axis.
pub const DEFAULT_GRID: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Domain {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(x) || !ok(y) {
            return Err(Error::Invalid(format!("degenerate box {x:?} x {y:?}")));
        }
        Ok(Domain { x, y })
    }

    pub fn center(&self) -> Point2 {
        [0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1])]
    }

    pub fn contains(&self, p: Point2) -> bool {
        (self.x[0]..=self.x[1]).contains(&p[0]) && (self.y[0]..=self.y[1]).contains(&p[1])
    }

    /// `n × n` points including the boundary, row by row in `y`.
    pub fn grid(&self, n: usize) -> Vec<Point2> {
        let at = |r: [f64; 2], i: usize| {
            if n == 1 {
                0.5 * (r[0] + r[1])
            } else {
                r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
            }
        };
        (0..n)
            .flat_map(|j| (0..n).map(move |i| [at(self.x, i), at(self.y, j)]))
            .collect()
    }

    /// `n × n` points strictly inside the box.
    pub fn interior_grid(&self, n: usize) -> Vec<Point2> {
        let at = |r: [f64; 2], i: usize| r[0] + (r[1] - r[0]) * (i + 1) as f64 / (n + 1) as f64;
        (0..n)
            .flat_map(|j| (0..n).map(move |i| [at(self.x, i), at(self.y, j)]))
            .collect()
    }

    /// Reproducible uniformly random points in the box.
    pub fn random_points(&self, n: usize, seed: u64) -> Vec<Point2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                [
                    rng.gen_range(self.x[0]..self.x[1]),
                    rng.gen_range(self.y[0]..self.y[1]),
                ]
            })
            .collect()
    }

    /// Smallest box containing this one and `p`.
    pub fn hull_with(&self, p: Point2) -> Domain {
        Domain {
            x: [self.x[0].min(p[0]), self.x[1].max(p[0])],
            y: [self.y[0].min(p[1]), self.y[1].max(p[1])],
        }
    }
}
