use serde::Serialize;

/// Orthogonal direction pairs `(v, v_perp)` with `v_perp = (-q, p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionStencil {
    pairs: Vec<[[i32; 2]; 2]>,
    max_width: i32,
}

fn gcd(a: i32, b: i32) -> i32 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl DirectionStencil {
    /// Eight pairs of width at most 3, covering the half-turn in steps of
    /// roughly `pi / 16`. Pair 0 is the axes, pair 4 the diagonals.
    pub fn standard() -> Self {
        Self::from_primary(&[[1, 0], [3, 1], [2, 1], [3, 2], [1, 1], [2, 3], [1, 2], [1, 3]])
            .expect("standard stencil is valid")
    }

    /// Axes only: the five-point stencil.
    pub fn axes() -> Self {
        Self::from_primary(&[[1, 0]]).expect("axis stencil is valid")
    }

    /// Builds pairs from primary directions. Every direction must be
    /// primitive, and no line may appear twice.
    pub fn from_primary(primary: &[[i32; 2]]) -> Option<Self> {
        if primary.is_empty() {
            return None;
        }
        let mut pairs: Vec<[[i32; 2]; 2]> = Vec::with_capacity(primary.len());
        for &[p, q] in primary {
            if gcd(p, q) != 1 {
                return None;
            }
            pairs.push([[p, q], [-q, p]]);
        }
        let same_line = |a: [i32; 2], b: [i32; 2]| a[0] * b[1] == a[1] * b[0];
        let lines: Vec<[i32; 2]> = pairs.iter().flatten().copied().collect();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                if same_line(lines[i], lines[j]) {
                    return None;
                }
            }
        }
        let max_width = lines.iter().map(|v| v[0].abs().max(v[1].abs())).max().unwrap_or(1);
        Some(Self { pairs, max_width })
    }

    pub fn pairs(&self) -> &[[[i32; 2]; 2]] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn max_width(&self) -> i32 {
        self.max_width
    }

    /// Flattened direction list: direction `2k` is `v` of pair `k`,
    /// direction `2k + 1` its partner.
    pub fn directions(&self) -> Vec<[i32; 2]> {
        self.pairs.iter().flatten().copied().collect()
    }
}

/// `[u(x + h v) - 2 u(x) + u(x - h v)] / (h^2 |v|^2)` for a function on the
/// plane.
pub fn directional_second_difference(u: &dyn Fn([f64; 2]) -> f64, x: [f64; 2], v: [i32; 2], h: f64) -> f64 {
    let w = [h * v[0] as f64, h * v[1] as f64];
    let len2 = w[0] * w[0] + w[1] * w[1];
    (u([x[0] + w[0], x[1] + w[1]]) - 2.0 * u(x) + u([x[0] - w[0], x[1] - w[1]])) / len2
}

/// Second difference on uneven arms of lengths `lp`, `lm`:
/// `2/(lp+lm) [(up - u0)/lp - (u0 - um)/lm]`.
pub fn uneven_second_difference(u0: f64, up: f64, lp: f64, um: f64, lm: f64) -> f64 {
    2.0 / (lp + lm) * ((up - u0) / lp - (u0 - um) / lm)
}
