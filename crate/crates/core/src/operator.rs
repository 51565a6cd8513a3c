//! Pointwise Pucci operators and the power nonlinearity.
//!
//! `M+(X)` weights nonnegative eigenvalues of `X` by `Lambda` and negative ones
//! by `lambda`; `M-` swaps the weights. The branch test is always `>= 0`, so a
//! zero eigenvalue sits on the `Lambda` branch.

use crate::error::{Error, Result};
use crate::params::ProblemParams;

/// `Lambda` for `t >= 0`, `lambda` for `t < 0`.
#[inline]
pub fn theta(t: f64, params: &ProblemParams) -> f64 {
    if t >= 0.0 {
        params.Lambda()
    } else {
        params.lambda()
    }
}

/// Weight used by `M-`: `lambda` on positive eigenvalues, `Lambda` otherwise.
#[inline]
pub fn theta_minus(t: f64, params: &ProblemParams) -> f64 {
    if t > 0.0 {
        params.lambda()
    } else {
        params.Lambda()
    }
}

fn check_len(eigs: &[f64], params: &ProblemParams) -> Result<()> {
    if eigs.len() != params.dim() {
        return Err(Error::Parameter(format!(
            "expected {} eigenvalues, got {}",
            params.dim(),
            eigs.len()
        )));
    }
    Ok(())
}

pub fn pucci_plus_eigen(eigs: &[f64], params: &ProblemParams) -> Result<f64> {
    check_len(eigs, params)?;
    Ok(eigs.iter().map(|&e| theta(e, params) * e).sum())
}

pub fn pucci_minus_eigen(eigs: &[f64], params: &ProblemParams) -> Result<f64> {
    check_len(eigs, params)?;
    Ok(eigs.iter().map(|&e| theta_minus(e, params) * e).sum())
}

/// `M+` of a radial profile at radius `r`, using the eigenvalues `u''` (once)
/// and `u'/r` (`N-1` times). The value of `u` does not enter.
pub fn pucci_radial(_u: f64, du: f64, d2u: f64, r: f64, params: &ProblemParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radial operator needs r > 0, got {r}")));
    }
    let n1 = params.dim() as f64 - 1.0;
    Ok(theta(d2u, params) * d2u + theta(du, params) * n1 * du / r)
}

/// `|u|^{s-1} u`.
#[inline]
pub fn power_nonlinearity(u: f64, s: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.abs().powf(s - 1.0) * u
    }
}

/// Derivative `s |u|^{s-1}` of [`power_nonlinearity`].
#[inline]
pub fn power_nonlinearity_derivative(u: f64, s: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        s * u.abs().powf(s - 1.0)
    }
}

/// Constant `delta(s) = 2^{1-s}` in `| |a|^{s-1}a - |b|^{s-1}b | >= delta |a-b|^s`.
///
/// Equality holds at `a = -b`, so the constant is sharp. The test suite
/// checks it against a brute-force scan of the ratio.
pub fn power_gap_delta(s: f64) -> Result<f64> {
    if !(s.is_finite() && s > 1.0) {
        return Err(Error::Parameter(format!("gap constant needs s > 1, got {s}")));
    }
    Ok((1.0 - s).exp2())
}

/// Symmetric 2x2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricMatrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymmetricMatrix2 {
    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn diag(a11: f64, a22: f64) -> Self {
        Self::new(a11, 0.0, a22)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    /// Eigenvalues in nondecreasing order.
    ///
    /// The larger-magnitude root comes from the quadratic formula and the
    /// other from `det / root`, which avoids cancellation when one eigenvalue
    /// is much smaller than the other.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.a11 + self.a22);
        let radius = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
        let big = if mean >= 0.0 { mean + radius } else { mean - radius };
        let small = if big != 0.0 { self.det() / big } else { 0.0 };
        if big <= small {
            [big, small]
        } else {
            [small, big]
        }
    }

    /// `v^T X v` for a (not necessarily unit) vector.
    pub fn quadratic_form(&self, v: [f64; 2]) -> f64 {
        self.a11 * v[0] * v[0] + 2.0 * self.a12 * v[0] * v[1] + self.a22 * v[1] * v[1]
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        // R X R^T
        let a11 = c * c * self.a11 - 2.0 * c * s * self.a12 + s * s * self.a22;
        let a22 = s * s * self.a11 + 2.0 * c * s * self.a12 + c * c * self.a22;
        let a12 = c * s * (self.a11 - self.a22) + (c * c - s * s) * self.a12;
        Self::new(a11, a12, a22)
    }

    pub fn pucci_plus(&self, params: &ProblemParams) -> f64 {
        self.eigenvalues().iter().map(|&e| theta(e, params) * e).sum()
    }

    pub fn pucci_minus(&self, params: &ProblemParams) -> f64 {
        self.eigenvalues().iter().map(|&e| theta_minus(e, params) * e).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(lambda: f64, big: f64, dim: usize, s: f64) -> ProblemParams {
        ProblemParams::new(lambda, big, dim, s).unwrap()
    }

    #[test]
    fn theta_branches() {
        let q = p(1.0, 2.0, 2, 2.0);
        assert_eq!(theta(1.0, &q), 2.0);
        assert_eq!(theta(-0.5, &q), 1.0);
        assert_eq!(theta(0.0, &q), 2.0);
    }

    #[test]
    fn eigen_formula_examples() {
        let q = p(1.0, 2.0, 2, 2.0);
        assert_eq!(pucci_plus_eigen(&[3.0, -1.0], &q).unwrap(), 5.0);
        assert_eq!(pucci_minus_eigen(&[3.0, -1.0], &q).unwrap(), 1.0);
        // u = 1 - |x|^2 has D^2 u = -2 I
        assert_eq!(pucci_plus_eigen(&[-2.0, -2.0], &q).unwrap(), -4.0);
        assert!(matches!(
            pucci_plus_eigen(&[1.0], &q),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn radial_examples() {
        let q = p(1.0, 2.0, 2, 3.0);
        assert_eq!(pucci_radial(0.75, -1.0, -2.0, 0.5, &q).unwrap(), -4.0);
        assert_eq!(pucci_radial(0.3, 0.0, 0.0, 0.7, &q).unwrap(), 0.0);
        let q3 = p(1.0, 2.0, 3, 3.0);
        assert_eq!(pucci_radial(0.0, 1.0, 1.0, 1.0, &q3).unwrap(), 6.0);
        assert!(matches!(
            pucci_radial(0.0, 1.0, 1.0, 0.0, &q3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn power_examples() {
        assert_eq!(power_nonlinearity(-2.0, 3.0), -8.0);
        assert_eq!(power_nonlinearity(0.0, 1.5), 0.0);
        assert_relative_eq!(power_nonlinearity(4.0, 1.5), 8.0, max_relative = 1e-15);
    }

    #[test]
    fn gap_delta_values() {
        assert_eq!(power_gap_delta(2.0).unwrap(), 0.5);
        assert!(power_gap_delta(1.0).is_err());
        let delta = power_gap_delta(3.0).unwrap();
        // s = 3, a = 1, b = 0
        assert!(1.0 >= delta);
        // s = 2, a = 1, b = -1 is the equality case
        let lhs = (power_nonlinearity(1.0, 2.0) - power_nonlinearity(-1.0, 2.0)).abs();
        assert_relative_eq!(lhs, power_gap_delta(2.0).unwrap() * 4.0, max_relative = 1e-15);
    }

    /// Brute-force infimum of `|F(a)-F(b)| / |a-b|^s` over a dense grid of
    /// `[-10, 10]^2`.
    fn scanned_gap_infimum(s: f64) -> f64 {
        let n = 401;
        let step = 20.0 / (n - 1) as f64;
        let mut inf = f64::INFINITY;
        for i in 0..n {
            let a = -10.0 + step * i as f64;
            for j in 0..n {
                let b = -10.0 + step * j as f64;
                if i == j {
                    continue;
                }
                let num = (power_nonlinearity(a, s) - power_nonlinearity(b, s)).abs();
                inf = inf.min(num / (a - b).abs().powf(s));
            }
        }
        inf
    }

    #[test]
    fn gap_delta_matches_brute_force_oracle() {
        for s in [1.1, 1.5, 2.0, 3.0, 5.0] {
            let oracle = scanned_gap_infimum(s);
            let delta = power_gap_delta(s).unwrap();
            // the grid contains a = -b pairs so the scan hits the sharp value
            assert!(oracle >= delta * (1.0 - 1e-12), "s={s}: {oracle} < {delta}");
            assert_relative_eq!(oracle, delta, max_relative = 1e-9);
        }
    }

    #[test]
    fn gap_inequality_on_random_triples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let s = rng.gen_range(1.01..6.0);
            let a: f64 = rng.gen_range(-50.0..50.0);
            let b: f64 = rng.gen_range(-50.0..50.0);
            let lhs = (power_nonlinearity(a, s) - power_nonlinearity(b, s)).abs();
            let rhs = power_gap_delta(s).unwrap() * (a - b).abs().powf(s);
            assert!(lhs >= rhs * (1.0 - 1e-12), "a={a} b={b} s={s}");
        }
    }

    #[test]
    fn eigenvalues_small_root_is_accurate() {
        let m = SymmetricMatrix2::new(1e8, 1.0, 1e-8);
        let [lo, hi] = m.eigenvalues();
        assert_relative_eq!(lo * hi, m.det(), max_relative = 1e-12, epsilon = 1e-300);
        assert_relative_eq!(lo + hi, m.trace(), max_relative = 1e-12);
        assert_eq!(SymmetricMatrix2::new(0.0, 0.0, 0.0).eigenvalues(), [0.0, 0.0]);
    }

    fn arb_params() -> impl Strategy<Value = ProblemParams> {
        (0.1f64..3.0, 1.0f64..6.0, 1usize..6, 1.05f64..6.0)
            .prop_map(|(l, ratio, n, s)| ProblemParams::new(l, l * ratio, n, s).unwrap())
    }

    proptest! {
        #[test]
        fn eigenvalue_invariants(a11 in -1e3f64..1e3, a12 in -1e3f64..1e3, a22 in -1e3f64..1e3) {
            let m = SymmetricMatrix2::new(a11, a12, a22);
            let [lo, hi] = m.eigenvalues();
            prop_assert!(lo <= hi);
            let scale = a11.abs() + a22.abs() + a12.abs() + 1e-300;
            prop_assert!(((lo + hi) - m.trace()).abs() <= 1e-12 * scale);
            prop_assert!((lo * hi - m.det()).abs() <= 1e-12 * scale * scale);
        }

        #[test]
        fn swap_ordering_homogeneity(params in arb_params(), raw in proptest::collection::vec(-10.0f64..10.0, 5), t in 0.0f64..10.0) {
            let e = &raw[..params.dim()];
            let plus = pucci_plus_eigen(e, &params).unwrap();
            let minus = pucci_minus_eigen(e, &params).unwrap();
            let neg: Vec<f64> = e.iter().map(|x| -x).collect();
            prop_assert_eq!(minus, -pucci_plus_eigen(&neg, &params).unwrap());
            prop_assert!(minus <= plus);
            let scaled: Vec<f64> = e.iter().map(|x| t * x).collect();
            let lhs = pucci_plus_eigen(&scaled, &params).unwrap();
            prop_assert!((lhs - t * plus).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn laplacian_degeneration(raw in proptest::collection::vec(-10.0f64..10.0, 1..5)) {
            let params = ProblemParams::new(1.0, 1.0, raw.len(), 2.0).unwrap();
            let sum: f64 = raw.iter().sum();
            prop_assert_eq!(pucci_plus_eigen(&raw, &params).unwrap(), sum);
            prop_assert_eq!(pucci_minus_eigen(&raw, &params).unwrap(), sum);
        }

        #[test]
        fn radial_matches_eigen(params in arb_params(), du in -10.0f64..10.0, d2u in -10.0f64..10.0, r in 1e-3f64..10.0) {
            let mut eigs = vec![du / r; params.dim()];
            eigs[0] = d2u;
            let a = pucci_radial(0.0, du, d2u, r, &params).unwrap();
            let b = pucci_plus_eigen(&eigs, &params).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
        }

        #[test]
        fn power_is_odd_and_increasing(s in 1.01f64..6.0, a in -100.0f64..100.0, gap in 1e-6f64..10.0) {
            prop_assert_eq!(power_nonlinearity(-a, s), -power_nonlinearity(a, s));
            prop_assert!(power_nonlinearity(a + gap, s) > power_nonlinearity(a, s));
        }
    }
}
