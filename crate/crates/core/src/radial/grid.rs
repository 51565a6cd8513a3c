use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Grading {
    Uniform,
    /// Consecutive radii shrink by `ratio` toward the origin until the
    /// spacing reaches `r_min`; away from the origin spacing is capped at
    /// the uniform width.
    GeometricTowardZero { ratio: f64, r_min: f64 },
}

/// Nodes `0 < r_1 < ... < r_M = R`. The last node carries the Dirichlet
/// condition.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: Grading,
}

impl RadialGrid {
    /// `r_i = i R / n` for `i = 1..=n`.
    pub fn uniform(radius: f64, n: usize) -> Result<Self> {
        check_radius(radius)?;
        if n < MIN_NODES {
            return Err(Error::Parameter(format!(
                "radial grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let h = radius / n as f64;
        let mut nodes: Vec<f64> = (1..=n).map(|i| h * i as f64).collect();
        nodes[n - 1] = radius;
        Ok(Self {
            nodes,
            grading: Grading::Uniform,
        })
    }

    /// Graded grid: spacing at most `radius / n_uniform`, and geometric with
    /// `ratio` between consecutive radii near the origin down to `r_min`.
    pub fn geometric(radius: f64, n_uniform: usize, ratio: f64, r_min: f64) -> Result<Self> {
        check_radius(radius)?;
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Parameter(format!(
                "geometric ratio must lie in (0, 1), got {ratio}"
            )));
        }
        if n_uniform == 0 {
            return Err(Error::Parameter("uniform node count must be positive".into()));
        }
        let h = radius / n_uniform as f64;
        if !(r_min > 0.0 && r_min < h) {
            return Err(Error::Parameter(format!(
                "innermost radius must lie in (0, {h}), got {r_min}"
            )));
        }
        let mut nodes = vec![r_min];
        let mut r = r_min;
        loop {
            let next = (r / ratio).min(r + h);
            if next - r >= h * (1.0 - 1e-12) || next >= radius {
                break;
            }
            nodes.push(next);
            r = next;
        }
        let remaining = radius - r;
        let steps = ((remaining / h).ceil() as usize).max(1);
        let width = remaining / steps as f64;
        for k in 1..=steps {
            nodes.push(r + width * k as f64);
        }
        let last = nodes.len() - 1;
        nodes[last] = radius;
        if nodes.len() < MIN_NODES {
            return Err(Error::Parameter(format!(
                "radial grid needs at least {MIN_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        Ok(Self {
            nodes,
            grading: Grading::GeometricTowardZero { ratio, r_min },
        })
    }

    /// Arbitrary strictly increasing positive radii.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(Error::Parameter(format!(
                "radial grid needs at least {MIN_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        if !(nodes[0] > 0.0) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("radial nodes must be positive and strictly increasing".into()));
        }
        check_radius(*nodes.last().unwrap())?;
        let grading = Grading::Uniform;
        Ok(Self { nodes, grading })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Control-volume faces: `0`, the midpoints, and `R`. Volume `i` is
    /// `[faces[i], faces[i+1]]`.
    pub fn faces(&self) -> Vec<f64> {
        let mut faces = Vec::with_capacity(self.len() + 1);
        faces.push(0.0);
        faces.extend(self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        faces.push(self.radius());
        faces
    }

    /// Largest spacing between consecutive nodes (including `r_1 - 0`).
    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(self.nodes[0], f64::max)
    }

    /// Trapezoid rule over the nodes (no contribution from `(0, r_1)`).
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.nodes
            .windows(2)
            .zip(values.windows(2))
            .map(|(r, v)| 0.5 * (r[1] - r[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Piecewise-linear interpolation of nodal values; constant below `r_1`.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let nodes = &self.nodes;
        if r <= nodes[0] {
            return values[0];
        }
        if r >= self.radius() {
            return values[values.len() - 1];
        }
        let k = nodes.partition_point(|&x| x <= r);
        let (r0, r1) = (nodes[k - 1], nodes[k]);
        let t = (r - r0) / (r1 - r0);
        values[k - 1] * (1.0 - t) + values[k] * t
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Parameter(format!("outer radius must be positive, got {radius}")));
    }
    Ok(())
}
