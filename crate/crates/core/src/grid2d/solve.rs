use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;
use serde::{Deserialize, Serialize};

use super::bellman::{controlled_value, discrete_pucci_plus, value_magnitude, Extremal, Policy, PolicyEntry};
use super::grid::{ArmEnd, CartesianGrid2};
use crate::error::{Error, Result};
use crate::operator::{power_nonlinearity, power_nonlinearity_derivative};
use crate::params::ProblemParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid2Config {
    /// Max-norm residual tolerance. Each node also gets a rounding floor of
    /// 64 eps times the magnitude of the terms summed there.
    pub tol: f64,
    pub max_policy: usize,
    pub max_newton: usize,
    pub max_halvings: usize,
    /// A node switches control only when the new value beats the current
    /// one by this multiple of the value's term magnitude.
    pub improvement_tol: f64,
    pub extremal: Extremal,
}

impl Default for Grid2Config {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_policy: 50,
            max_newton: 50,
            max_halvings: 30,
            improvement_tol: 64.0 * f64::EPSILON,
            extremal: Extremal::Plus,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Grid2Report {
    pub policy_updates: usize,
    pub newton_iterations: usize,
    pub factorizations: usize,
    pub symbolic_reuses: usize,
    /// Bellman residual max-norm after each policy step.
    pub residual: f64,
    pub residual_history: Vec<f64>,
    /// Nodes whose control changed at each policy step.
    pub policy_changes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Grid2Solution {
    pub u: Vec<f64>,
    pub policy: Policy,
    pub boundary: Vec<f64>,
    pub report: Grid2Report,
}

/// The linear operator `-L_P u + c u` of a frozen policy, with the Dirichlet
/// contributions split off: `-L_P u + c u = A u - g`.
#[derive(Debug, Clone)]
pub struct FrozenOperator {
    diag: Vec<f64>,
    // off-diagonal entries per row, all nonpositive
    offdiag: Vec<Vec<(usize, f64)>>,
    boundary_rhs: Vec<f64>,
    pairs: Vec<usize>,
}

impl FrozenOperator {
    pub fn new(grid: &CartesianGrid2, policy: &[PolicyEntry], boundary: &[f64], c: f64) -> Self {
        let n = grid.len();
        let mut diag = vec![c; n];
        let mut offdiag = vec![Vec::with_capacity(4); n];
        let mut boundary_rhs = vec![0.0; n];
        for i in 0..n {
            let e = policy[i];
            for (dir, coef) in [(2 * e.pair, e.a), (2 * e.pair + 1, e.b)] {
                let [p, m] = grid.arms(i, dir);
                let s = 2.0 * coef / (p.length + m.length);
                for arm in [p, m] {
                    let w = s / arm.length;
                    diag[i] += w;
                    match arm.end {
                        ArmEnd::Node(j) => offdiag[i].push((j, -w)),
                        ArmEnd::Boundary(b) => boundary_rhs[i] += w * boundary[b],
                    }
                }
            }
        }
        Self {
            diag,
            offdiag,
            boundary_rhs,
            pairs: policy.iter().map(|e| e.pair).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A u - g`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                self.diag[i] * u[i] + self.offdiag[i].iter().map(|&(j, w)| w * u[j]).sum::<f64>()
                    - self.boundary_rhs[i]
            })
            .collect()
    }

    /// `sum_j |A_ij u_j| + |g_i|`, the scale of rounding in [`Self::apply`].
    pub fn magnitude(&self, u: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                (self.diag[i] * u[i]).abs()
                    + self.offdiag[i].iter().map(|&(j, w)| (w * u[j]).abs()).sum::<f64>()
                    + self.boundary_rhs[i].abs()
            })
            .collect()
    }

    /// Whether the matrix has a positive diagonal, nonpositive off-diagonal
    /// entries and nonnegative row sums.
    pub fn is_m_matrix(&self) -> bool {
        (0..self.len()).all(|i| {
            let off: f64 = self.offdiag[i].iter().map(|&(_, w)| w).sum();
            self.diag[i] > 0.0 && self.offdiag[i].iter().all(|&(_, w)| w <= 0.0) && self.diag[i] + off >= -1e-12 * self.diag[i]
        })
    }

    fn matrix(&self, extra_diag: &[f64]) -> Result<SparseColMat<usize, f64>> {
        let n = self.len();
        let mut trips = Vec::with_capacity(5 * n);
        for i in 0..n {
            trips.push(Triplet::new(i, i, self.diag[i] + extra_diag[i]));
            for &(j, w) in &self.offdiag[i] {
                trips.push(Triplet::new(i, j, w));
            }
        }
        SparseColMat::try_new_from_triplets(n, n, &trips).map_err(|e| Error::Linear(format!("{e:?}")))
    }

    /// Solves `(A + diag(extra)) x = rhs`, reusing `symbolic` when given.
    fn solve_shifted(
        &self,
        extra_diag: &[f64],
        rhs: &[f64],
        symbolic: &mut Option<SymbolicLu<usize>>,
    ) -> Result<(Vec<f64>, bool)> {
        let mat = self.matrix(extra_diag)?;
        let reused = symbolic.is_some();
        let sym = match symbolic {
            Some(s) => s.clone(),
            None => {
                let s = SymbolicLu::try_new(mat.symbolic()).map_err(|e| Error::Linear(format!("{e:?}")))?;
                *symbolic = Some(s.clone());
                s
            }
        };
        let lu = Lu::try_new_with_symbolic(sym, mat.as_ref()).map_err(|e| Error::Linear(format!("{e:?}")))?;
        let b = Col::<f64>::from_fn(rhs.len(), |i| rhs[i]);
        let x = lu.solve(&b);
        let out: Vec<f64> = (0..rhs.len()).map(|i| x[i]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Linear("sparse LU produced non-finite values".into()));
        }
        Ok((out, reused))
    }

    /// Solves `A u - g = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b: Vec<f64> = rhs.iter().zip(&self.boundary_rhs).map(|(r, g)| r + g).collect();
        Ok(self.solve_shifted(&vec![0.0; self.len()], &b, &mut None)?.0)
    }
}

struct Counters {
    newton: usize,
    factorizations: usize,
    reuses: usize,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

/// Damped Newton for `A u - g + F(u) = f` under a frozen policy.
fn newton(
    op: &FrozenOperator,
    u: &mut [f64],
    f: &[f64],
    s: f64,
    tol_abs: f64,
    cfg: &Grid2Config,
    symbolic: &mut Option<SymbolicLu<usize>>,
    counters: &mut Counters,
) -> Result<()> {
    let residual = |u: &[f64]| -> (Vec<f64>, bool) {
        let au = op.apply(u);
        let mag = op.magnitude(u);
        let mut ok = true;
        let r: Vec<f64> = (0..u.len())
            .map(|i| {
                let nl = power_nonlinearity(u[i], s);
                let r = au[i] + nl - f[i];
                let floor = 64.0 * f64::EPSILON * (mag[i] + nl.abs() + f[i].abs());
                if !(r.abs() <= tol_abs + floor) {
                    ok = false;
                }
                r
            })
            .collect();
        (r, ok)
    };
    let mut history = Vec::new();
    let (mut res, mut ok) = residual(u);
    // once within tolerance, one more step is taken if it helps: the
    // quadratic rate usually lands it at rounding level
    let mut polishing = false;
    for _ in 0..cfg.max_newton {
        let norm = max_abs(&res);
        history.push(norm);
        if ok && (polishing || norm == 0.0) {
            return Ok(());
        }
        polishing = ok;
        let jac: Vec<f64> = u.iter().map(|&v| power_nonlinearity_derivative(v, s)).collect();
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let (delta, reused) = op.solve_shifted(&jac, &rhs, symbolic)?;
        counters.factorizations += 1;
        counters.reuses += reused as usize;
        counters.newton += 1;
        let mut step = 1.0;
        let mut accepted = false;
        let mut trial = u.to_vec();
        let halvings = if polishing { 0 } else { cfg.max_halvings };
        for _ in 0..=halvings {
            for i in 0..u.len() {
                trial[i] = u[i] + step * delta[i];
            }
            let (tr, tok) = residual(&trial);
            let tn = max_abs(&tr);
            if tn.is_finite() && (tn < norm || (tok && !polishing)) {
                res = tr;
                ok = tok;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if ok {
                return Ok(());
            }
            break;
        }
        u.copy_from_slice(&trial);
    }
    history.push(max_abs(&res));
    if ok {
        return Ok(());
    }
    Err(Error::Convergence {
        iterations: history.len(),
        last: *history.last().unwrap_or(&f64::NAN),
        history,
    })
}

/// Bellman residual `-M_h(u) + c u + F(u) - f` per node.
pub fn bellman_residual(
    grid: &CartesianGrid2,
    u: &[f64],
    boundary: &[f64],
    f: &[f64],
    params: &ProblemParams,
    c: f64,
    extremal: Extremal,
) -> Vec<f64> {
    let sign = sign_of(extremal);
    let w: Vec<f64> = u.iter().map(|v| sign * v).collect();
    let wb: Vec<f64> = boundary.iter().map(|v| sign * v).collect();
    (0..grid.len())
        .map(|i| {
            let (value, _) = discrete_pucci_plus(grid, &w, &wb, i, params);
            -sign * value + c * u[i] + power_nonlinearity(u[i], params.s()) - f[i]
        })
        .collect()
}

fn sign_of(extremal: Extremal) -> f64 {
    match extremal {
        Extremal::Plus => 1.0,
        Extremal::Minus => -1.0,
    }
}

/// Greedy policy at `u`. With `current` given, a node keeps its control
/// unless the best one improves on it by more than the rounding margin.
/// Returns the policy, the number of changed nodes and the Bellman residual.
#[allow(clippy::too_many_arguments)]
fn improve(
    grid: &CartesianGrid2,
    u: &[f64],
    boundary: &[f64],
    f: &[f64],
    params: &ProblemParams,
    c: f64,
    cfg: &Grid2Config,
    current: Option<&[PolicyEntry]>,
) -> (Policy, usize, Vec<f64>) {
    let sign = sign_of(cfg.extremal);
    let w: Vec<f64> = u.iter().map(|v| sign * v).collect();
    let wb: Vec<f64> = boundary.iter().map(|v| sign * v).collect();
    let mut policy = Vec::with_capacity(grid.len());
    let mut changes = 0;
    let mut res = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let (best, entry) = discrete_pucci_plus(grid, &w, &wb, i, params);
        let (value, chosen) = match current {
            Some(cur) => {
                let old = cur[i];
                let old_value = controlled_value(grid, &w, &wb, i, old);
                let margin = cfg.improvement_tol * value_magnitude(grid, &w, &wb, i, entry);
                if best > old_value + margin {
                    changes += (entry != old) as usize;
                    (best, entry)
                } else {
                    (old_value, old)
                }
            }
            None => (best, entry),
        };
        policy.push(chosen);
        res.push(-sign * value + c * u[i] + power_nonlinearity(u[i], params.s()) - f[i]);
    }
    (policy, changes, res)
}

/// Solves `-M_h(u) + c u + |u|^{s-1} u = f` on the grid's disk with Dirichlet
/// data `dirichlet` on the circle, by policy iteration: freeze the greedy
/// control, solve the semilinear M-matrix system by damped Newton, improve
/// the control, repeat until no node changes.
#[allow(clippy::too_many_arguments)]
pub fn policy_iteration_solve(
    grid: &CartesianGrid2,
    f: &[f64],
    params: &ProblemParams,
    c_reg: f64,
    dirichlet: &dyn Fn([f64; 2]) -> f64,
    cfg: &Grid2Config,
    initial: Option<&[f64]>,
) -> Result<Grid2Solution> {
    let n = grid.len();
    if f.len() != n {
        return Err(Error::Input(format!("right-hand side has {} values for {n} nodes", f.len())));
    }
    if let Some(i) = f.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("right-hand side is not finite at {:?}", grid.point(i))));
    }
    if !(c_reg >= 0.0 && c_reg.is_finite()) {
        return Err(Error::Parameter(format!("regularisation must be nonnegative, got {c_reg}")));
    }
    let boundary = grid.sample_boundary(dirichlet);
    if boundary.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("Dirichlet data is not finite".into()));
    }
    let mut u = match initial {
        Some(u0) if u0.len() == n => u0.to_vec(),
        Some(u0) => return Err(Error::Input(format!("initial guess has {} values for {n} nodes", u0.len()))),
        None => vec![0.0; n],
    };
    let tol_abs = cfg.tol;
    let s = params.s();
    let sign = sign_of(cfg.extremal);

    let (mut policy, _, _) = improve(grid, &u, &boundary, f, params, c_reg, cfg, None);
    let mut history: Vec<Vec<usize>> = Vec::new();
    let mut residual_history = Vec::new();
    let mut policy_changes = Vec::new();
    let mut counters = Counters {
        newton: 0,
        factorizations: 0,
        reuses: 0,
    };
    let mut symbolic: Option<SymbolicLu<usize>> = None;
    let mut symbolic_pairs: Vec<usize> = Vec::new();
    let mut seen: Vec<Policy> = vec![policy.clone()];
    for update in 0..cfg.max_policy {
        // the frozen operator acts on u; for M- the control was chosen on -u
        // but a u_vv + b u_ww is linear, so the same matrix applies
        let op = FrozenOperator::new(grid, &policy, &boundary, c_reg);
        if op.pairs != symbolic_pairs {
            symbolic = None;
            symbolic_pairs = op.pairs.clone();
        }
        newton(&op, &mut u, f, s, tol_abs, cfg, &mut symbolic, &mut counters)?;
        let (next, changes, res) = improve(grid, &u, &boundary, f, params, c_reg, cfg, Some(&policy));
        let norm = max_abs(&res);
        residual_history.push(norm);
        policy_changes.push(changes);
        history.push(next.iter().map(|e| e.pair).collect());
        if changes == 0 {
            let _ = sign;
            return Ok(Grid2Solution {
                u,
                policy: next,
                boundary,
                report: Grid2Report {
                    policy_updates: update + 1,
                    newton_iterations: counters.newton,
                    factorizations: counters.factorizations,
                    symbolic_reuses: counters.reuses,
                    residual: norm,
                    residual_history,
                    policy_changes,
                },
            });
        }
        if let Some(k) = seen.iter().rposition(|p| *p == next) {
            return Err(Error::Cycling {
                iterations: update + 1,
                period: seen.len() - k,
            });
        }
        seen.push(next.clone());
        policy = next;
    }
    Err(Error::Cycling {
        iterations: cfg.max_policy,
        period: 0,
    })
}
