use super::stencil::{uneven_second_difference, DirectionStencil};
use crate::error::{Error, Result};

pub const MIN_ACTIVE_NODES: usize = 25;

/// Where one arm of a stencil line ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmEnd {
    Node(usize),
    /// Index into [`CartesianGrid2::boundary_points`].
    Boundary(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub end: ArmEnd,
    /// Physical length of the arm.
    pub length: f64,
}

/// Lattice points `h (i, j)` strictly inside the disk of the given radius
/// centred at the origin. Stencil arms that leave the disk are cut at the
/// circle, where the Dirichlet value is imposed.
#[derive(Debug, Clone)]
pub struct CartesianGrid2 {
    h: f64,
    radius: f64,
    stencil: DirectionStencil,
    nodes: Vec<[i32; 2]>,
    half_width: i32,
    lookup: Vec<u32>,
    // per node, per direction, [plus, minus]
    arms: Vec<[Arm; 2]>,
    boundary_points: Vec<[f64; 2]>,
    touches_boundary: Vec<bool>,
}

const NONE: u32 = u32::MAX;

impl CartesianGrid2 {
    pub fn new(radius: f64, h: f64, stencil: DirectionStencil) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0 && h.is_finite() && h > 0.0) {
            return Err(Error::Parameter(format!("need positive radius and spacing, got R={radius}, h={h}")));
        }
        let half_width = (radius / h).floor() as i32 + 1;
        let side = (2 * half_width + 1) as usize;
        let mut lookup = vec![NONE; side * side];
        let inside = |i: i32, j: i32| {
            let (x, y) = (i as f64 * h, j as f64 * h);
            x * x + y * y < radius * radius
        };
        let mut nodes = Vec::new();
        for j in -half_width..=half_width {
            for i in -half_width..=half_width {
                if inside(i, j) {
                    lookup[((j + half_width) as usize) * side + (i + half_width) as usize] = nodes.len() as u32;
                    nodes.push([i, j]);
                }
            }
        }
        if nodes.len() < MIN_ACTIVE_NODES {
            return Err(Error::Parameter(format!(
                "grid has {} active nodes, need at least {MIN_ACTIVE_NODES}",
                nodes.len()
            )));
        }
        let dirs = stencil.directions();
        let mut arms = Vec::with_capacity(nodes.len() * dirs.len());
        let mut boundary_points = Vec::new();
        let mut touches_boundary = vec![false; nodes.len()];
        let mut grid = Self {
            h,
            radius,
            stencil,
            nodes,
            half_width,
            lookup,
            arms: Vec::new(),
            boundary_points: Vec::new(),
            touches_boundary: Vec::new(),
        };
        for (n, &[i, j]) in grid.nodes.iter().enumerate() {
            let x = [i as f64 * h, j as f64 * h];
            for v in &dirs {
                let mut pair = [Arm {
                    end: ArmEnd::Node(0),
                    length: 0.0,
                }; 2];
                for (side, sign) in [(0usize, 1i32), (1, -1)] {
                    let (di, dj) = (sign * v[0], sign * v[1]);
                    let w = [di as f64 * h, dj as f64 * h];
                    let full = w[0].hypot(w[1]);
                    pair[side] = match grid.index_of(i + di, j + dj) {
                        Some(m) if inside(i + di, j + dj) => Arm {
                            end: ArmEnd::Node(m),
                            length: full,
                        },
                        _ => {
                            let t = exit_fraction(x, w, radius);
                            touches_boundary[n] = true;
                            boundary_points.push([x[0] + t * w[0], x[1] + t * w[1]]);
                            Arm {
                                end: ArmEnd::Boundary(boundary_points.len() - 1),
                                length: t * full,
                            }
                        }
                    };
                }
                arms.push(pair);
            }
        }
        grid.arms = arms;
        grid.boundary_points = boundary_points;
        grid.touches_boundary = touches_boundary;
        Ok(grid)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn stencil(&self) -> &DirectionStencil {
        &self.stencil
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lattice indices of the active nodes.
    pub fn lattice(&self) -> &[[i32; 2]] {
        &self.nodes
    }

    pub fn point(&self, node: usize) -> [f64; 2] {
        let [i, j] = self.nodes[node];
        [i as f64 * self.h, j as f64 * self.h]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|n| self.point(n)).collect()
    }

    pub fn index_of(&self, i: i32, j: i32) -> Option<usize> {
        let w = self.half_width;
        if i < -w || i > w || j < -w || j > w {
            return None;
        }
        let side = (2 * w + 1) as usize;
        match self.lookup[((j + w) as usize) * side + (i + w) as usize] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    /// Whether some stencil arm of `node` ends on the circle.
    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.touches_boundary[node]
    }

    pub fn boundary_points(&self) -> &[[f64; 2]] {
        &self.boundary_points
    }

    /// Dirichlet values at the arm end points on the circle.
    pub fn sample_boundary(&self, g: &dyn Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.boundary_points.iter().map(|&p| g(p)).collect()
    }

    /// The two arms of direction `dir` (see [`DirectionStencil::directions`]).
    pub fn arms(&self, node: usize, dir: usize) -> &[Arm; 2] {
        &self.arms[node * 2 * self.stencil.len() + dir]
    }

    pub fn end_value(&self, end: ArmEnd, u: &[f64], boundary: &[f64]) -> f64 {
        match end {
            ArmEnd::Node(m) => u[m],
            ArmEnd::Boundary(b) => boundary[b],
        }
    }

    /// Second difference of the grid function along direction `dir`, with
    /// `boundary` the values from [`Self::sample_boundary`].
    pub fn second_difference(&self, u: &[f64], boundary: &[f64], node: usize, dir: usize) -> f64 {
        let [p, m] = self.arms(node, dir);
        uneven_second_difference(
            u[node],
            self.end_value(p.end, u, boundary),
            p.length,
            self.end_value(m.end, u, boundary),
            m.length,
        )
    }

    /// Sampled `sup |u|` over nodes with `|x| <= r`.
    pub fn sup_within(&self, u: &[f64], r: f64) -> f64 {
        (0..self.len())
            .filter(|&n| {
                let x = self.point(n);
                x[0].hypot(x[1]) <= r
            })
            .map(|n| u[n])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Fraction `t` in `(0, 1]` at which `x + t w` meets the circle of radius
/// `radius`, for `|x| < radius`.
fn exit_fraction(x: [f64; 2], w: [f64; 2], radius: f64) -> f64 {
    let a = w[0] * w[0] + w[1] * w[1];
    let b = x[0] * w[0] + x[1] * w[1];
    let c = radius * radius - (x[0] * x[0] + x[1] * x[1]);
    // positive root of a t^2 + 2 b t - c = 0 without cancellation
    let t = c / (b + (b * b + a * c).sqrt());
    t.min(1.0)
}
