//! Unit-mass smoothing with the standard `C^inf` bump `exp(-1/(1-t^2))`.
//!
//! Quadrature weights are normalised to sum to one, so constants are
//! reproduced up to rounding.

use crate::error::{Error, Result};

const RADIAL_POINTS: usize = 96;
const PLANAR_RINGS: usize = 24;
const PLANAR_ANGLES: usize = 32;

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

#[derive(Debug, Clone)]
pub struct Mollifier {
    epsilon: f64,
    // offsets in units of epsilon together with their weights
    line: Vec<(f64, f64)>,
    disk: Vec<([f64; 2], f64)>,
}

impl Mollifier {
    /// `epsilon = 0` gives the identity map.
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::Input(format!(
                "mollification width must be finite and nonnegative, got {epsilon}"
            )));
        }
        let mut line: Vec<(f64, f64)> = (0..RADIAL_POINTS)
            .map(|k| {
                let t = -1.0 + (2 * k + 1) as f64 / RADIAL_POINTS as f64;
                (t, bump(t))
            })
            .collect();
        normalise(&mut line);

        let mut disk = Vec::with_capacity(PLANAR_RINGS * PLANAR_ANGLES);
        for i in 0..PLANAR_RINGS {
            let rho = (i as f64 + 0.5) / PLANAR_RINGS as f64;
            for j in 0..PLANAR_ANGLES {
                // stagger alternate rings
                let phi = std::f64::consts::TAU * (j as f64 + 0.5 * (i % 2) as f64)
                    / PLANAR_ANGLES as f64;
                disk.push(([rho * phi.cos(), rho * phi.sin()], bump(rho) * rho));
            }
        }
        normalise(&mut disk);
        Ok(Self { epsilon, line, disk })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Convolution of a function on `(0, inf)` reflected evenly at the origin.
    pub fn radial(&self, f: &dyn Fn(f64) -> f64, r: f64) -> f64 {
        if self.epsilon == 0.0 {
            return f(r);
        }
        self.line
            .iter()
            .map(|&(t, w)| w * f((r - self.epsilon * t).abs()))
            .sum()
    }

    /// Convolution over the disk of radius `epsilon` in the plane.
    pub fn planar(&self, f: &dyn Fn([f64; 2]) -> f64, x: [f64; 2]) -> f64 {
        if self.epsilon == 0.0 {
            return f(x);
        }
        self.disk
            .iter()
            .map(|&(y, w)| w * f([x[0] - self.epsilon * y[0], x[1] - self.epsilon * y[1]]))
            .sum()
    }
}

fn normalise<T>(pts: &mut [(T, f64)]) {
    let total: f64 = pts.iter().map(|p| p.1).sum();
    for p in pts.iter_mut() {
        p.1 /= total;
    }
}
