//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Every criterion runs at its stated tolerance; a failed criterion makes
//! the binary exit with status 1. Pass criterion numbers as arguments to run
//! a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use pucci_core::barriers::{
    comparison_verdict, local_bound_experiment, osserman_constant_as_stated, osserman_residual_check,
    OssermanBarrier,
};
use pucci_core::blowup::{fit_blowup_rate, solve_explosive, BlowupSchedule};
use pucci_core::grid2d::{
    bellman_residual, policy_iteration_solve, ArmEnd, CartesianGrid2, DirectionStencil, Extremal,
    FrozenOperator, Grid2Config, PolicyEntry,
};
use pucci_core::operator::{pucci_minus_eigen, pucci_plus_eigen, pucci_radial};
use pucci_core::radial::{
    approximation_ladder, solve_radial_bvp, solve_radial_bvp_from, RadialGrid, RadialProfile, RadialRhs,
    RadialSolverConfig,
};
use pucci_core::schedule::LadderSchedule;
use pucci_core::ProblemParams;
use pucci_harness::catalog::{Manufactured, RhsCatalogEntry};
use pucci_harness::config::GridSection;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn(&mut Vec<String>) -> bool;

fn p(lambda: f64, big: f64, dim: usize, s: f64) -> ProblemParams {
    ProblemParams::new(lambda, big, dim, s).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn signed_pow(u: f64, s: f64) -> f64 {
    u.signum() * u.abs().powf(s)
}

/// `Lambda sum e+ - lambda sum e-`.
fn pucci_plus_oracle(eigs: &[f64], lambda: f64, big: f64) -> f64 {
    eigs.iter().map(|&e| if e > 0.0 { big * e } else { lambda * e }).sum()
}

// 1 -------------------------------------------------------------------------

fn operator_correctness(log: &mut Vec<String>) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut swap_exact = true;
    for _ in 0..100_000 {
        let lambda = rng.gen_range(0.1..3.0);
        let big = lambda * rng.gen_range(1.0..10.0);
        let dim = rng.gen_range(1..=6);
        let params = p(lambda, big, dim, 2.0);
        let du = rng.gen_range(-50.0..50.0);
        let d2u = rng.gen_range(-50.0..50.0);
        let r = rng.gen_range(1e-3..10.0);
        let got = pucci_radial(0.0, du, d2u, r, &params).unwrap();
        let mut eigs = vec![d2u];
        eigs.extend(std::iter::repeat(du / r).take(dim - 1));
        let want = pucci_plus_eigen(&eigs, &params).unwrap();
        let scale = big * eigs.iter().map(|e| e.abs()).sum::<f64>();
        worst = worst.max((got - want).abs() / scale.max(f64::MIN_POSITIVE));
        worst_oracle = worst_oracle.max((want - pucci_plus_oracle(&eigs, lambda, big)).abs() / scale);
        let neg: Vec<f64> = eigs.iter().map(|e| -e).collect();
        swap_exact &= pucci_minus_eigen(&eigs, &params).unwrap() == -pucci_plus_eigen(&neg, &params).unwrap();
    }
    log.push(format!(
        "radial vs eigenvalue form: max rel dev {worst:.2e}; vs Lambda*sum e+ - lambda*sum e-: {worst_oracle:.2e}; swap identity exact: {swap_exact}"
    ));
    worst <= 1e-12 && worst_oracle <= 1e-12 && swap_exact
}

// 2 -------------------------------------------------------------------------

fn radial_convergence(log: &mut Vec<String>) -> bool {
    let mut ok = true;
    for dim in [2, 3] {
        let params = p(1.0, 2.0, dim, 3.0);
        let n = dim as f64;
        let mut rows = Vec::new();
        for k in 6..=12 {
            let grid = RadialGrid::uniform(1.0, 1 << k).unwrap();
            // u = 1 - r^2: u'' = -2 and u'/r = -2 are both negative, so
            // M+ = -2 lambda N.
            let f: Vec<f64> = grid.nodes().iter().map(|&r| 2.0 * n + (1.0 - r * r).powi(3)).collect();
            let sol = solve_radial_bvp(&grid, &RadialRhs::Sampled(f), &params, 0.0, &Default::default()).unwrap();
            let err = grid
                .nodes()
                .iter()
                .zip(&sol.state.u)
                .map(|(&r, u)| (1.0 - r * r - u).abs())
                .fold(0.0, f64::max);
            rows.push((1usize << k, err));
        }
        let orders: Vec<f64> = rows.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect();
        let finest_order = *orders.last().unwrap();
        let finest_err = rows.last().unwrap().1;
        let table: Vec<String> = rows
            .iter()
            .zip(std::iter::once(f64::NAN).chain(orders.iter().copied()))
            .map(|((m, e), o)| format!("{m}:{e:.2e}/{o:.2}"))
            .collect();
        log.push(format!("N={dim} nodes:error/order {}", table.join(" ")));
        ok &= (1.7..=2.3).contains(&finest_order) && finest_err < 1e-6;
    }
    ok
}

// 3 -------------------------------------------------------------------------

fn planar_convergence(log: &mut Vec<String>) -> bool {
    let params = p(1.0, 2.0, 2, 3.0);
    let cfg = Grid2Config::default();
    let mut ok = true;
    for sol in [Manufactured::OneMinusR2, Manufactured::Saddle, Manufactured::CoshCos] {
        // right-hand sides from the closed-form Hessians
        let f = move |x: [f64; 2]| -> f64 {
            let u = sol.value(x);
            let m = match sol {
                Manufactured::OneMinusR2 => -4.0,
                Manufactured::Saddle => 2.0 * 2.0 - 2.0,
                Manufactured::CoshCos => 2.0 * x[0].cosh() - x[1].cos(),
            };
            -m + signed_pow(u, 3.0)
        };
        let mut errs = Vec::new();
        let mut notes = Vec::new();
        for k in 4..=7 {
            let h = 1.0 / (1 << k) as f64;
            let grid = CartesianGrid2::new(1.0, h, DirectionStencil::standard()).unwrap();
            let fv: Vec<f64> = grid.points().iter().map(|&x| f(x)).collect();
            let s = policy_iteration_solve(&grid, &fv, &params, 0.0, &|x| sol.value(x), &cfg, None).unwrap();
            let err = grid
                .points()
                .iter()
                .zip(&s.u)
                .map(|(&x, u)| (sol.value(x) - u).abs())
                .fold(0.0, f64::max);
            if k == 6 {
                let res = bellman_residual(&grid, &s.u, &s.boundary, &fv, &params, 0.0, Extremal::Plus);
                let res = res.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                notes.push(format!("h=1/64: {} policy updates, residual {res:.2e}", s.report.policy_updates));
                // the residual bound is stated for the two quadratic fields
                ok &= s.report.policy_updates <= 50 && (sol == Manufactured::CoshCos || res < 1e-10);
            }
            errs.push(err);
        }
        let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let pass = match sol {
            // quadratics are reproduced exactly by every second difference
            Manufactured::OneMinusR2 | Manufactured::Saddle => errs.iter().all(|&e| e < 1e-11),
            Manufactured::CoshCos => *orders.last().unwrap() >= 1.7,
        };
        ok &= pass;
        log.push(format!(
            "{sol:?}: errors {:?} orders {:?}; {}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
            orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>(),
            notes.join(", ")
        ));
    }
    ok
}

// 4 -------------------------------------------------------------------------

/// Finite-volume Laplacian solve of `-(r^{N-1} u')' + r^{N-1} u^s = r^{N-1} f`
/// with zero flux at 0 and `u(R) = 0`, by Newton with a Thomas solve.
fn reference_radial(nodes: &[f64], f: &[f64], dim: usize, s: f64) -> Vec<f64> {
    let m = nodes.len();
    let mut faces = vec![0.0];
    faces.extend(nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    faces.push(nodes[m - 1]);
    let n1 = dim as i32 - 1;
    let cond: Vec<f64> = (1..m).map(|k| faces[k].powi(n1) / (nodes[k] - nodes[k - 1])).collect();
    let mut u = vec![0.0; m];
    for _ in 0..100 {
        let k = m - 1;
        let mut res = vec![0.0; k];
        let (mut lo, mut di, mut up) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
        for i in 0..k {
            let dr = faces[i + 1] - faces[i];
            let right = cond[i] * (u[i + 1] - u[i]);
            let left = if i == 0 { 0.0 } else { cond[i - 1] * (u[i] - u[i - 1]) };
            let w = nodes[i].powi(n1);
            res[i] = -(right - left) / dr + w * (signed_pow(u[i], s) - f[i]);
            di[i] = (cond[i] + if i == 0 { 0.0 } else { cond[i - 1] }) / dr + w * s * u[i].abs().powf(s - 1.0);
            if i > 0 {
                lo[i] = -cond[i - 1] / dr;
            }
            if i + 1 < k {
                up[i] = -cond[i] / dr;
            }
        }
        if res.iter().all(|r| r.abs() < 1e-14) {
            break;
        }
        // Thomas
        for i in 1..k {
            let w = lo[i] / di[i - 1];
            di[i] -= w * up[i - 1];
            res[i] -= w * res[i - 1];
        }
        let mut dx = vec![0.0; k];
        dx[k - 1] = res[k - 1] / di[k - 1];
        for i in (0..k - 1).rev() {
            dx[i] = (res[i] - up[i] * dx[i + 1]) / di[i];
        }
        for i in 0..k {
            u[i] -= dx[i];
        }
    }
    u
}

/// Nonlinear Gauss-Seidel for the five-point Laplacian with arms cut at the
/// circle, `-Delta_h u + u^s = f`, `u = g` on the circle.
fn reference_planar(grid: &CartesianGrid2, h: f64, f: &dyn Fn([f64; 2]) -> f64, g: &dyn Fn([f64; 2]) -> f64, s: f64) -> Vec<f64> {
    let radius = grid.radius();
    let n = grid.len();
    let lattice = grid.lattice();
    // per node and axis: (length, neighbour or boundary value) for +/- arms
    type ArmRef = (f64, Result<usize, f64>);
    let arm = |i: i32, j: i32, di: i32, dj: i32| -> ArmRef {
        match grid.index_of(i + di, j + dj) {
            Some(k) => (h, Ok(k)),
            None => {
                let (x, y) = (i as f64 * h, j as f64 * h);
                let t = if di != 0 {
                    let xe = (radius * radius - y * y).sqrt() * di as f64;
                    (xe - x).abs()
                } else {
                    let ye = (radius * radius - x * x).sqrt() * dj as f64;
                    (ye - y).abs()
                };
                let end = [x + di as f64 * t, y + dj as f64 * t];
                (t, Err(g(end)))
            }
        }
    };
    let arms: Vec<[[ArmRef; 2]; 2]> = lattice
        .iter()
        .map(|&[i, j]| [[arm(i, j, 1, 0), arm(i, j, -1, 0)], [arm(i, j, 0, 1), arm(i, j, 0, -1)]])
        .collect();
    let fv: Vec<f64> = grid.points().iter().map(|&x| f(x)).collect();
    let mut u = vec![0.0; n];
    for _sweep in 0..200_000 {
        let mut change = 0.0f64;
        for k in 0..n {
            // -sum_axes 2/(lp+lm) [(up-u)/lp + (um-u)/lm] + u^s = f, solved
            // for u by Newton with the neighbours frozen
            let (mut diag, mut off) = (0.0, 0.0);
            for axis in &arms[k] {
                let c = 2.0 / (axis[0].0 + axis[1].0);
                for &(l, end) in axis {
                    let v = match end {
                        Ok(m) => u[m],
                        Err(b) => b,
                    };
                    diag += c / l;
                    off += c / l * v;
                }
            }
            let mut x = u[k];
            for _ in 0..50 {
                let r = diag * x - off + signed_pow(x, s) - fv[k];
                let d = diag + s * x.abs().powf(s - 1.0);
                let step = r / d;
                x -= step;
                if step.abs() < 1e-17 * (1.0 + x.abs()) {
                    break;
                }
            }
            change = change.max((x - u[k]).abs());
            u[k] = x;
        }
        if change < 1e-15 {
            break;
        }
    }
    u
}

fn degeneration(log: &mut Vec<String>) -> bool {
    let iso = p(1.0, 1.0, 3, 2.0);
    let grid = RadialGrid::uniform(1.0, 400).unwrap();
    let f: Vec<f64> = grid.nodes().iter().map(|&r| 1.0 + (3.0 * r).cos() + 5.0 * r * r).collect();
    let sol = solve_radial_bvp(&grid, &RadialRhs::Sampled(f.clone()), &iso, 0.0, &Default::default()).unwrap();
    let reference = reference_radial(grid.nodes(), &f, 3, 2.0);
    let radial_dev = max_abs_diff(&sol.state.u, &reference);

    let iso2 = p(1.0, 1.0, 2, 2.0);
    let h = 1.0 / 32.0;
    let g2 = CartesianGrid2::new(1.0, h, DirectionStencil::standard()).unwrap();
    let fp = |x: [f64; 2]| 2.0 + x[0] - x[1] * x[1];
    let gp = |x: [f64; 2]| x[0] * x[1];
    let fv: Vec<f64> = g2.points().iter().map(|&x| fp(x)).collect();
    let s2 = policy_iteration_solve(&g2, &fv, &iso2, 0.0, &gp, &Default::default(), None).unwrap();
    let reference2 = reference_planar(&g2, h, &fp, &gp, 2.0);
    let planar_dev = max_abs_diff(&s2.u, &reference2);
    let all_axes = s2.policy.iter().all(|e| e.pair == 0);
    log.push(format!(
        "radial max dev {radial_dev:.2e} (400 nodes, N=3); planar max dev {planar_dev:.2e} (h=1/32, {} nodes), all controls on the axes: {all_axes}",
        g2.len()
    ));
    radial_dev <= 1e-9 && planar_dev <= 1e-9
}

// 5, 6 ----------------------------------------------------------------------

fn bump(amplitude: f64, center: [f64; 2], radius: f64) -> RhsCatalogEntry {
    RhsCatalogEntry::CompactBump {
        amplitude,
        center,
        radius,
    }
}

fn power(c: f64, alpha: f64) -> RhsCatalogEntry {
    RhsCatalogEntry::PowerSingularity { c, alpha }
}

fn off_center(c: f64, alpha: f64, center: [f64; 2]) -> RhsCatalogEntry {
    RhsCatalogEntry::OffCenterSingularity { c, alpha, center }
}

fn majorant(of: RhsCatalogEntry) -> RhsCatalogEntry {
    RhsCatalogEntry::RadialMajorantOf { of: Box::new(of) }
}

fn nonnegative_catalog() -> Vec<RhsCatalogEntry> {
    vec![
        RhsCatalogEntry::Constant { value: 0.0 },
        RhsCatalogEntry::Constant { value: 0.5 },
        RhsCatalogEntry::Constant { value: 3.0 },
        RhsCatalogEntry::Constant { value: 100.0 },
        bump(1.0, [0.0, 0.0], 0.5),
        bump(10.0, [0.3, 0.2], 0.4),
        bump(1000.0, [-0.5, 0.0], 0.3),
        bump(0.01, [0.0, 0.0], 0.9),
        bump(5.0, [0.7, 0.7], 0.6),
        power(1.0, 0.5),
        power(2.0, 0.9),
        power(1.0, 1.5),
        power(1.0, 1.9),
        power(0.1, 0.25),
        off_center(1.0, 0.5, [0.4, 0.0]),
        off_center(1.0, 0.9, [0.0, -0.6]),
        majorant(bump(10.0, [0.3, 0.2], 0.4)),
        majorant(off_center(1.0, 0.5, [0.4, 0.0])),
        majorant(power(1.0, 0.5)),
        majorant(RhsCatalogEntry::Constant { value: 2.0 }),
    ]
}

fn radial_grid_for_catalog() -> RadialGrid {
    GridSection {
        radius: 1.0,
        nodes: 200,
        grading: pucci_core::radial::Grading::GeometricTowardZero {
            ratio: 0.8,
            r_min: 1e-6,
        },
        ..Default::default()
    }
    .radial_grid(1.0)
    .unwrap()
}

/// Planar samples: point singularities are smoothed at width 0.05.
fn planar_samples(entry: &RhsCatalogEntry, grid: &CartesianGrid2, params: &ProblemParams) -> Vec<f64> {
    let f = entry.planar(params, Extremal::Plus);
    let eps = if entry.singular_circle().is_some() { 0.05 } else { 0.0 };
    let m = pucci_core::mollifier::Mollifier::new(eps).unwrap();
    grid.points().iter().map(|&x| m.planar(&*f, x)).collect()
}

fn positivity(log: &mut Vec<String>) -> bool {
    let radial_params = p(1.0, 2.0, 3, 2.0);
    let planar_params = p(1.0, 2.0, 2, 2.0);
    let rgrid = radial_grid_for_catalog();
    let pgrid = CartesianGrid2::new(1.0, 1.0 / 32.0, DirectionStencil::standard()).unwrap();
    let (mut solves, mut worst) = (0, f64::INFINITY);
    let mut ok = true;
    for entry in nonnegative_catalog() {
        assert!(entry.is_nonnegative());
        if entry.radial_profile(&radial_params).is_ok() && entry.gates(&radial_params).weighted_l1 {
            let rhs = entry.radial_rhs(&rgrid, &radial_params, 0.0).unwrap();
            let sol = solve_radial_bvp(&rgrid, &rhs, &radial_params, 0.0, &Default::default()).unwrap();
            let min = sol.state.u.iter().copied().fold(f64::INFINITY, f64::min);
            worst = worst.min(min);
            ok &= min >= -1e-8;
            solves += 1;
        }
        if entry.gates(&planar_params).ln_loc {
            let fv = planar_samples(&entry, &pgrid, &planar_params);
            let sol = policy_iteration_solve(&pgrid, &fv, &planar_params, 0.0, &|_| 0.0, &Default::default(), None)
                .unwrap();
            let min = sol.u.iter().copied().fold(f64::INFINITY, f64::min);
            worst = worst.min(min);
            ok &= min >= -1e-8;
            solves += 1;
        }
    }
    log.push(format!("20 catalog entries, {solves} solves, min u = {worst:.3e}"));
    ok
}

fn uniqueness(log: &mut Vec<String>) -> bool {
    let radial_params = p(1.0, 2.0, 3, 2.0);
    let planar_params = p(1.0, 2.0, 2, 2.0);
    let rgrid = radial_grid_for_catalog();
    let pgrid = CartesianGrid2::new(1.0, 1.0 / 32.0, DirectionStencil::standard()).unwrap();
    let rcfg = RadialSolverConfig::default();
    let pcfg = Grid2Config::default();
    let entries = vec![
        RhsCatalogEntry::Constant { value: 3.0 },
        RhsCatalogEntry::Constant { value: -2.0 },
        bump(10.0, [0.3, 0.2], 0.4),
        bump(-50.0, [0.0, 0.0], 0.7),
        power(1.0, 0.5),
        power(1.0, 1.5),
        off_center(-1.0, 0.5, [0.4, 0.0]),
        majorant(off_center(1.0, 0.5, [0.4, 0.0])),
        RhsCatalogEntry::ManufacturedFromU {
            solution: Manufactured::OneMinusR2,
        },
        RhsCatalogEntry::ManufacturedFromU {
            solution: Manufactured::CoshCos,
        },
    ];
    let tol = 10.0 * rcfg.tol.max(pcfg.tol);
    let mut worst_radial = 0.0f64;
    let mut worst_planar = 0.0f64;
    for entry in &entries {
        if entry.radial_profile(&radial_params).is_ok() && entry.gates(&radial_params).weighted_l1 {
            let rhs = entry.radial_rhs(&rgrid, &radial_params, 0.0).unwrap();
            let f = rhs.values(&rgrid).unwrap();
            // the constant (sup |f|)^{1/s} is a discrete barrier
            let cap = f.iter().fold(0.0f64, |a, v| a.max(v.abs())).powf(1.0 / radial_params.s());
            let a = solve_radial_bvp(&rgrid, &rhs, &radial_params, 0.0, &rcfg).unwrap();
            let mut dev = 0.0f64;
            let mut locked = a.report.locked_nodes;
            for sign in [1.0, -1.0] {
                let guess = vec![sign * 10.0 * cap; rgrid.len()];
                let b = solve_radial_bvp_from(&rgrid, &rhs, &radial_params, 0.0, &rcfg, Some(&guess)).unwrap();
                dev = dev.max(max_abs_diff(&a.state.u, &b.state.u));
                locked = locked.max(b.report.locked_nodes);
            }
            log.push(format!("radial {}: dev {dev:.2e}, locked nodes {locked}", entry.kind()));
            worst_radial = worst_radial.max(dev);
        }
        if entry.gates(&planar_params).ln_loc {
            let fv = planar_samples(entry, &pgrid, &planar_params);
            let exact = entry.exact_solution();
            let g = move |x: [f64; 2]| exact.map_or(0.0, |m| m.value(x));
            let gmax = pgrid.sample_boundary(&g).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let cap = fv.iter().fold(0.0f64, |a, v| a.max(v.abs())).powf(1.0 / planar_params.s()).max(gmax);
            let a = policy_iteration_solve(&pgrid, &fv, &planar_params, 0.0, &g, &pcfg, None).unwrap();
            for sign in [1.0, -1.0] {
                let guess = vec![sign * 10.0 * cap; pgrid.len()];
                let b = policy_iteration_solve(&pgrid, &fv, &planar_params, 0.0, &g, &pcfg, Some(&guess)).unwrap();
                worst_planar = worst_planar.max(max_abs_diff(&a.u, &b.u));
            }
        }
    }
    log.push(format!(
        "10 problems, guesses 0 and +/-10 cap: radial max dev {worst_radial:.2e}, planar max dev {worst_planar:.2e} (bound {tol:.0e})"
    ));
    worst_radial <= tol && worst_planar <= tol
}

// 7 -------------------------------------------------------------------------

fn osserman(log: &mut Vec<String>) -> bool {
    let mut ok = true;
    let mut worst_rel = f64::INFINITY;
    let mut stated_failures = 0;
    let mut cases = 0;
    for s in [1.5, 2.0, 3.0, 5.0] {
        for ratio in [1.0, 2.0, 5.0] {
            for dim in [2, 3] {
                let params = p(1.0, ratio, dim, s);
                let b = OssermanBarrier::new(1.0, &params).unwrap();
                let check = osserman_residual_check(&b, 1000).unwrap();
                let rel = check.min_residual / check.scale;
                worst_rel = worst_rel.min(rel);
                ok &= check.min_residual >= -1e-9 * check.scale;
                let (_, stated) = osserman_constant_as_stated(&params).unwrap();
                let sb = OssermanBarrier::with_constant(1.0, &params, stated).unwrap();
                if osserman_residual_check(&sb, 1000).unwrap().min_residual < -1e-9 * check.scale {
                    stated_failures += 1;
                }
                cases += 1;
            }
        }
    }
    log.push(format!(
        "{cases} parameter sets: min residual / U(0)^s = {worst_rel:.3e}; the constant with max(N, a+1) fails in {stated_failures} sets"
    ));

    // f <= 0: u <= U on B_1, radial with zero data and planar with positive
    // boundary data
    let mut worst_excess = f64::NEG_INFINITY;
    let mut solves = 0;
    for (ratio, dim, s) in [(2.0, 3, 2.0), (5.0, 2, 1.5), (1.0, 3, 3.0)] {
        let params = p(1.0, ratio, dim, s);
        let b = OssermanBarrier::new(1.0, &params).unwrap();
        let grid = RadialGrid::uniform(1.0, 200).unwrap();
        for f in [-1.0, -100.0] {
            let sol = solve_radial_bvp(&grid, &RadialRhs::Sampled(vec![f; grid.len()]), &params, 0.0, &Default::default())
                .unwrap();
            let n = grid.len() - 1;
            let cap: Vec<f64> = grid.nodes()[..n].iter().map(|&r| b.value(r).unwrap()).collect();
            let v = comparison_verdict(&sol.state.u[..n], &cap, 1e-8).unwrap();
            worst_excess = worst_excess.max(v.max_excess);
            ok &= v.pass;
            solves += 1;
        }
    }
    for (ratio, s) in [(2.0, 3.0), (5.0, 2.0)] {
        let params = p(1.0, ratio, 2, s);
        let b = OssermanBarrier::new(1.0, &params).unwrap();
        let grid = CartesianGrid2::new(1.0, 1.0 / 32.0, DirectionStencil::standard()).unwrap();
        let cap: Vec<f64> = grid.points().iter().map(|x| b.value_at(x).unwrap()).collect();
        for data in [1.0, 10.0, 100.0] {
            for f in [
                RhsCatalogEntry::Constant { value: 0.0 },
                RhsCatalogEntry::Constant { value: -5.0 },
                bump(-20.0, [0.2, 0.0], 0.5),
            ] {
                let fv = planar_samples(&f, &grid, &params);
                let sol = policy_iteration_solve(&grid, &fv, &params, 0.0, &|_| data, &Default::default(), None)
                    .unwrap();
                let v = comparison_verdict(&sol.u, &cap, 1e-8).unwrap();
                worst_excess = worst_excess.max(v.max_excess);
                ok &= v.pass;
                solves += 1;
            }
        }
    }
    log.push(format!("{solves} solves with f <= 0: max(u - U) = {worst_excess:.3e}"));
    ok
}

// 8 -------------------------------------------------------------------------

fn local_bound(log: &mut Vec<String>) -> bool {
    let params = p(1.0, 2.0, 2, 3.0);
    let data = [10.0, 1e3, 1e5];
    let fixtures: Vec<(&str, RhsCatalogEntry)> = vec![
        ("f = 0", RhsCatalogEntry::Constant { value: 0.0 }),
        ("bump", bump(5.0, [0.0, 0.0], 1.0)),
    ];
    let mut ok = true;
    for (name, entry) in fixtures {
        let f = entry.planar(&params, Extremal::Plus);
        let rep = local_bound_experiment(&params, &*f, 1.0, 2.0, &data, 1.0 / 64.0, &Default::default()).unwrap();
        let capped = rep.sup_inner.iter().all(|&v| v <= rep.barrier_cap);
        let pass = rep.monotone && capped && rep.top_spread <= 0.05;
        ok &= pass;
        log.push(format!(
            "{name}: sup_B1 u = {:?}, cap sup U(.;2) = {:.4}, spread {:.2}%, monotone {}",
            rep.sup_inner.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            rep.barrier_cap,
            100.0 * rep.top_spread,
            rep.monotone
        ));
    }
    ok
}

// 9 -------------------------------------------------------------------------

/// Shoots `Lambda u'' = u^s`, `u(0) = u0`, `u'(0) = 0` until `u >= u_stop`;
/// returns the profile `(x, u)` and the blow-up point, estimated by adding
/// the tail integral of the first integral `u' ~ sqrt(2/((s+1) Lambda)) u^{(s+1)/2}`.
fn shoot(u0: f64, big: f64, s: f64, u_stop: f64) -> (Vec<(f64, f64)>, f64) {
    let rhs = |u: f64| u.abs().powf(s) / big;
    let (mut x, mut u, mut v) = (0.0f64, u0, 0.0f64);
    let mut path = vec![(x, u)];
    while u < u_stop && x < 100.0 {
        let scale = (big / u.powf(s - 1.0)).sqrt();
        let dx = 1e-4 * scale.min(1.0);
        let (k1u, k1v) = (v, rhs(u));
        let (k2u, k2v) = (v + 0.5 * dx * k1v, rhs(u + 0.5 * dx * k1u));
        let (k3u, k3v) = (v + 0.5 * dx * k2v, rhs(u + 0.5 * dx * k2u));
        let (k4u, k4v) = (v + dx * k3v, rhs(u + dx * k3u));
        u += dx / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += dx / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        x += dx;
        path.push((x, u));
    }
    let k = (s - 1.0) / 2.0;
    let tail = ((s + 1.0) * big / 2.0).sqrt() * u.powf(-k) / k;
    (path, x + tail)
}

/// Centre value for which the 1-D solution blows up at distance 1.
fn shoot_to_unit_interval(big: f64, s: f64) -> (Vec<(f64, f64)>, f64) {
    let (mut lo, mut hi) = (1e-3f64, 1e3f64);
    for _ in 0..80 {
        let mid = (lo * hi).sqrt();
        let (_, x_blow) = shoot(mid, big, s, 1e6);
        if x_blow > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shoot((lo * hi).sqrt(), big, s, 1e6)
}

fn blowup(log: &mut Vec<String>) -> bool {
    let s = 3.0;
    let alpha = 2.0 / (s - 1.0);
    let mut ok = true;
    for big in [1.0, 2.0] {
        let params = p(1.0, big, 2, s);
        let formula = (big * alpha * (alpha + 1.0)).powf(1.0 / (s - 1.0));

        let (path, x_blow) = shoot_to_unit_interval(big, s);
        // amplitude where u is large: u d^alpha
        let &(xa, ua) = path.iter().find(|(_, u)| *u >= 1e4).unwrap();
        let shooting_amplitude = ua * (x_blow - xa).powf(alpha);

        let schedule = BlowupSchedule {
            boundary_values: vec![1.0, 10.0, 100.0, 1000.0],
            c_n: vec![0.0; 4],
            fit_window: (0.1, 0.3),
        };
        let run = solve_explosive(1.0, &|_| 0.0, &params, &schedule, 1.0 / 128.0, &Default::default()).unwrap();
        let fit = &run.fit;
        let monotone = run.rungs.iter().filter_map(|r| r.min_increment).all(|m| m >= -1e-8);
        // the same window fit applied to the 1-D profile
        let (xs, us): (Vec<[f64; 2]>, Vec<f64>) = path.iter().map(|&(x, u)| ([x, 0.0], u)).unzip();
        let oracle_fit = fit_blowup_rate(&xs, &us, x_blow, (0.1, 0.3), &params).ok();

        let e_ok = (fit.fitted_exponent - alpha).abs() <= 0.1 * alpha;
        let a_ok = (fit.fitted_amplitude - formula).abs() <= 0.15 * formula;
        let oracle_ok = (shooting_amplitude - formula).abs() <= 1e-3 * formula
            && (fit.fitted_amplitude - shooting_amplitude).abs() <= 0.15 * shooting_amplitude;
        ok &= e_ok && a_ok && oracle_ok && monotone;
        log.push(format!(
            "Lambda={big}: exponent {:.4} (target {alpha}), amplitude {:.4} (formula {formula:.4}, shooting {shooting_amplitude:.4}), r2 {:.4}, 1-D window fit {}, centre {:.4} (change {:.2}%), monotone {monotone}",
            fit.fitted_exponent,
            fit.fitted_amplitude,
            fit.r_squared,
            oracle_fit.map_or("n/a".into(), |f| format!("{:.4}/{:.4}", f.fitted_exponent, f.fitted_amplitude)),
            run.rungs.last().unwrap().center_value,
            100.0 * run.center_change,
        ));
    }
    ok
}

// 10, 11 --------------------------------------------------------------------

fn ladder_grid(radius: f64) -> pucci_core::Result<RadialGrid> {
    RadialGrid::geometric(radius, 256, 0.85, 1e-5)
}

fn singular_threshold(log: &mut Vec<String>) -> bool {
    let params = p(1.0, 2.0, 3, 2.0);
    let eps: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
    let schedule = LadderSchedule::new(vec![1.0; eps.len()], vec![0.0; eps.len()], eps.clone(), 0.5).unwrap();
    let mut ok = true;
    let mut table = vec![format!("{:>9} {:>14} {:>14}", "eps", "u(r1) a=1", "u(r1) a=3")];
    let mut cols = Vec::new();
    for (alpha, exploratory) in [(1.0, false), (3.0, true)] {
        let cfg = RadialSolverConfig {
            exploratory,
            ..Default::default()
        };
        let lad = approximation_ladder(&RadialProfile::power(1.0, alpha), &params, &schedule, &ladder_grid, &cfg).unwrap();
        cols.push(lad.rungs.iter().map(|r| r.u_first).collect::<Vec<_>>());
        let d = lad.first_node_differences();
        if alpha == 1.0 {
            let ratios: Vec<f64> = d.windows(2).map(|w| w[0] / w[1]).collect();
            let cauchy = ratios.iter().all(|&q| q >= 2.0);
            ok &= cauchy;
            log.push(format!(
                "alpha=1: difference ratios {:?}, all >= 2: {cauchy}",
                ratios.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>()
            ));
        } else {
            let u: Vec<f64> = lad.rungs.iter().map(|r| r.u_first).collect();
            let growing = u.windows(2).all(|w| w[1] > w[0]) && d.windows(2).all(|w| w[1] >= w[0]);
            ok &= growing && u.len() >= 4;
            log.push(format!(
                "alpha=3 (exploratory, raw data passes the weighted-L1 gate: {}): u(r1) increasing with nonshrinking increments: {growing}",
                power(1.0, alpha).gates(&params).weighted_l1
            ));
        }
    }
    for (k, e) in eps.iter().enumerate() {
        table.push(format!("{e:>9.5} {:>14.6e} {:>14.6e}", cols[0][k], cols[1][k]));
    }
    log.extend(table);
    ok
}

fn estimate_shadow(log: &mut Vec<String>) -> bool {
    // c_n = 1/n and eps_n = 2^{-n-1}
    let eps: Vec<f64> = (2..=7).map(|k| 0.5f64.powi(k)).collect();
    let c_n: Vec<f64> = (1..=6).map(|n| 1.0 / n as f64).collect();
    let schedule = LadderSchedule::new(vec![1.0; 6], c_n, eps, 0.5).unwrap();
    let mut ok = true;
    for params in [p(1.0, 2.0, 3, 2.0), p(1.0, 1.0, 2, 3.0), p(1.0, 5.0, 2, 1.5)] {
        let np = params.n_plus();
        let catalog = vec![
            RhsCatalogEntry::Constant { value: 1.0 },
            RhsCatalogEntry::Constant { value: 50.0 },
            bump(20.0, [0.0, 0.0], 0.5),
            power(1.0, 0.5 * np),
            power(-3.0, 0.9 * np),
            majorant(off_center(1.0, 0.5, [0.4, 0.0])),
        ];
        let mut all = Vec::new();
        let mut worst_growth = 0.0f64;
        for entry in &catalog {
            let profile = entry.radial_profile(&params).unwrap();
            let lad = approximation_ladder(&profile, &params, &schedule, &ladder_grid, &Default::default()).unwrap();
            let ratios: Vec<f64> = lad.rungs.iter().map(|r| r.int_rho_us / (1.0 + r.weighted_l1)).collect();
            let mut sorted = ratios.clone();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[sorted.len() / 2];
            let growth = ratios.iter().fold(0.0f64, |a, r| a.max(r / median));
            worst_growth = worst_growth.max(growth);
            ok &= growth <= 2.0;
            if growth > 2.0 {
                log.push(format!(
                    "  {} grows: {:?}",
                    entry.kind(),
                    ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
                ));
            }
            all.extend(ratios);
        }
        let bound = all.iter().copied().fold(0.0, f64::max);
        ok &= bound.is_finite();
        log.push(format!(
            "lambda={} Lambda={} N={} s={}: ratio <= {bound:.4} over {} rungs, max rung/median {worst_growth:.3}",
            params.lambda(),
            params.Lambda(),
            params.dim(),
            params.s(),
            all.len()
        ));
    }
    ok
}

// 12 ------------------------------------------------------------------------

fn comparison(log: &mut Vec<String>) -> bool {
    let grid = CartesianGrid2::new(1.0, 1.0 / 16.0, DirectionStencil::standard()).unwrap();
    let params = p(1.0, 3.0, 2, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let pairs = grid.stencil().len();
    let nb = grid.boundary_points().len();
    let (mut violations, mut checked) = (0usize, 0usize);
    let mut not_m = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let policy: Vec<PolicyEntry> = (0..grid.len())
            .map(|_| PolicyEntry {
                pair: rng.gen_range(0..pairs),
                a: rng.gen_range(params.lambda()..=params.Lambda()),
                b: rng.gen_range(params.lambda()..=params.Lambda()),
            })
            .collect();
        let c = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..5.0) };
        let gu: Vec<f64> = (0..nb).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gv: Vec<f64> = gu.iter().map(|g| g + rng.gen_range(0.0..1.0) * rng.gen_range(0..2) as f64).collect();
        let ru: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let rv: Vec<f64> = ru.iter().map(|r| r + rng.gen_range(0.0..3.0) * rng.gen_range(0..2) as f64).collect();
        let au = FrozenOperator::new(&grid, &policy, &gu, c);
        let av = FrozenOperator::new(&grid, &policy, &gv, c);
        if !au.is_m_matrix() {
            not_m += 1;
        }
        let u = au.solve(&ru).unwrap();
        let v = av.solve(&rv).unwrap();
        let scale = 1.0 + u.iter().chain(&v).fold(0.0f64, |a, x| a.max(x.abs()));
        // the hypotheses hold by construction; confirm them on the solutions
        let lhs_u = au.apply(&u);
        let lhs_v = av.apply(&v);
        let hyp = lhs_u.iter().zip(&lhs_v).all(|(a, b)| a <= &(b + 1e-9 * scale));
        for (a, b) in u.iter().zip(&v) {
            worst = worst.max(a - b);
            if *a > b + 1e-12 * scale {
                violations += 1;
            }
        }
        checked += usize::from(hyp);
    }
    log.push(format!(
        "1000 frozen policies on {} nodes: {violations} violations, max(u - v) = {worst:.2e}, hypotheses confirmed {checked}/1000, non-M-matrices {not_m}",
        grid.len()
    ));
    violations == 0 && checked == 1000 && not_m == 0
}

// ---------------------------------------------------------------------------

// the cut-cell arms must be what the planar reference assumes
fn arms_are_cut_at_the_circle(grid: &CartesianGrid2) -> bool {
    (0..grid.len()).all(|n| {
        (0..2).all(|d| {
            grid.arms(n, d).iter().all(|a| match a.end {
                ArmEnd::Node(_) => (a.length - grid.h()).abs() < 1e-15,
                ArmEnd::Boundary(b) => {
                    let q = grid.boundary_points()[b];
                    (q[0].hypot(q[1]) - grid.radius()).abs() < 1e-12
                }
            })
        })
    })
}

fn main() {
    let criteria: Vec<(usize, &str, Check, u64)> = vec![
        (1, "operator correctness", operator_correctness, 1),
        (2, "manufactured radial convergence", radial_convergence, 10),
        (3, "manufactured 2-D convergence", planar_convergence, 120),
        (4, "degeneration to the Laplacian", degeneration, 30),
        (5, "positivity", positivity, 60),
        (6, "uniqueness probe", uniqueness, 120),
        (7, "Osserman barrier", osserman, 10),
        (8, "local bound independence", local_bound, 120),
        (9, "blow-up rate", blowup, 180),
        (10, "singular-data threshold", singular_threshold, 120),
        (11, "estimate shadow", estimate_shadow, 60),
        (12, "discrete comparison principle", comparison, 30),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let grid = CartesianGrid2::new(1.0, 1.0 / 32.0, DirectionStencil::standard()).unwrap();
    assert!(arms_are_cut_at_the_circle(&grid));
    let mut failed = 0;
    for (id, name, check, budget) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let mut log = Vec::new();
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&mut log)));
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = matches!(outcome, Ok(true)) && in_time;
        if outcome.is_err() {
            log.push("panicked".into());
        }
        if !in_time {
            log.push(format!("exceeded the {budget} s budget"));
        }
        failed += usize::from(!pass);
        println!(
            "{} [{id:>2}] {name} ({:.2} s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        for line in log {
            println!("      {line}");
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
