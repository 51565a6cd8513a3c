//! Experiment drivers and the run manifest.

use std::path::Path;
use std::time::Instant;

use pucci_core::barriers::{
    local_bound_experiment, osserman_constant_as_stated, osserman_residual_check, OssermanBarrier,
};
use pucci_core::blowup::solve_explosive;
use pucci_core::grid2d::{
    kato_subsolution_check, policy_iteration_solve, CartesianGrid2, whole_space_ladder, DirectionStencil, Extremal,
};
use pucci_core::radial::{
    approximation_ladder, solve_radial_bvp, solve_radial_bvp_from, weak_residual_check, RadialGrid, RadialRhs,
};
use pucci_core::{Error, ProblemParams, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::catalog::{Manufactured, RhsCatalogEntry};
use crate::config::{Experiment, RunConfig, Space};
use crate::output::Table;

/// Weak-form test functions evaluated after a radial solve.
const WEAK_TEST_FUNCTIONS: usize = 32;

/// Tables and summary of a finished experiment.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

/// Exit code and manifest of a run, successful or not.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub manifest: Value,
}

/// Exit code for an error: 2 for configuration and parameter problems, 1
/// for everything raised while solving.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Parameter(_) => 2,
        _ => 1,
    }
}

fn error_json(err: &Error) -> Value {
    let key = match err {
        Error::Config { key, .. } => Some(key.clone()),
        _ => None,
    };
    let rung = match err {
        Error::Ladder { rung, source } => Some(json!({ "rung": rung, "class": source.class() })),
        _ => None,
    };
    json!({ "class": err.class(), "key": key, "message": err.to_string(), "ladder": rung })
}

/// Validates and runs, writing the tables and `manifest.json` into `out`.
/// The manifest is written even when the run fails.
pub fn run(cfg: &RunConfig, out: &Path) -> RunOutcome {
    let start = Instant::now();
    let result = cfg.validate().and_then(|()| execute(cfg));
    let mut manifest = json!({
        "tool": "pucci-harness",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": pucci_core::VERSION,
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "exploratory": cfg.exploratory,
        "config": serde_json::to_value(cfg).unwrap_or(Value::Null),
    });
    let (code, status) = match result.and_then(|o| write_tables(&o, out).map(|files| (o, files))) {
        Ok((o, files)) => {
            manifest["outputs"] = json!(files);
            manifest["summary"] = o.summary;
            manifest["warnings"] = json!(o.warnings);
            manifest["error"] = Value::Null;
            (0, "ok")
        }
        Err(e) => {
            manifest["outputs"] = json!([]);
            manifest["error"] = error_json(&e);
            (exit_code(&e), "error")
        }
    };
    manifest["status"] = json!(status);
    manifest["timings"] = json!({ "wall_seconds": start.elapsed().as_secs_f64() });
    if let Err(e) = write_manifest(out, &manifest) {
        manifest["error"] = error_json(&e);
        return RunOutcome { exit_code: 1, manifest };
    }
    RunOutcome {
        exit_code: code,
        manifest,
    }
}

/// Manifest for a configuration that failed to parse.
pub fn parse_failure(err: &Error, out: &Path) -> RunOutcome {
    let manifest = json!({
        "tool": "pucci-harness",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": pucci_core::VERSION,
        "status": "error",
        "config": Value::Null,
        "outputs": [],
        "error": error_json(err),
    });
    let code = if write_manifest(out, &manifest).is_ok() { exit_code(err) } else { 1 };
    RunOutcome {
        exit_code: code,
        manifest,
    }
}

fn write_tables(o: &RunOutput, out: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(out)?;
    o.tables
        .iter()
        .map(|t| {
            t.write(out)?;
            Ok(t.file_name())
        })
        .collect()
}

fn write_manifest(out: &Path, manifest: &Value) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Io(e.into()))?;
    std::fs::write(out.join("manifest.json"), text + "\n")?;
    Ok(())
}

/// Runs the experiment without touching the file system. Assumes `cfg` has
/// been validated.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let params = cfg.problem_params()?;
    match cfg.experiment {
        Experiment::Radial => radial(cfg, &params),
        Experiment::Grid2d => grid2d(cfg, &params),
        Experiment::Ladder => ladder(cfg, &params),
        Experiment::Blowup => blowup(cfg, &params),
        Experiment::Barrier => barrier(cfg, &params),
        Experiment::LocalBound => local_bound(cfg, &params),
        Experiment::Convergence => convergence(cfg, &params),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `restarts` random initial guesses in `[0, 10 (1 + |u|_inf)]`.
fn restart_guesses(cfg: &RunConfig, len: usize, reference: &[f64]) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = 10.0 * (1.0 + reference.iter().map(|v| v.abs()).fold(0.0, f64::max));
    (0..cfg.grid.restarts)
        .map(|_| (0..len).map(|_| scale * rng.gen::<f64>()).collect())
        .collect()
}

fn radial(cfg: &RunConfig, params: &ProblemParams) -> Result<RunOutput> {
    let entry = cfg.rhs_entry()?;
    let mut warnings: Vec<String> = cfg.radial_gate(entry, params)?.into_iter().collect();
    let grid = cfg.grid.radial_grid(cfg.grid.radius)?;
    let rhs = entry.radial_rhs(&grid, params, cfg.grid.epsilon)?;
    let mut scfg = cfg.radial_solver.clone();
    scfg.exploratory |= cfg.exploratory;
    let c = cfg.grid.c_reg;
    let sol = solve_radial_bvp(&grid, &rhs, params, c, &scfg)?;
    warnings.extend(sol.report.gate_warning.clone());
    let weak = weak_residual_check(&grid, &sol.state, &sol.weights, &sol.rhs, params, c, WEAK_TEST_FUNCTIONS)?;
    let mut deviations = Vec::new();
    for guess in restart_guesses(cfg, grid.len(), &sol.state.u) {
        let other = solve_radial_bvp_from(&grid, &rhs, params, c, &scfg, Some(&guess))?;
        deviations.push(max_abs_diff(&other.state.u, &sol.state.u));
    }
    let mut t = Table::new(
        "radial",
        &["r", "u", "du", "f", "theta_big", "dim_eff", "rho", "rho_tilde"],
    );
    let w = &sol.weights;
    for (i, &r) in grid.nodes().iter().enumerate() {
        t.push(vec![
            r.into(),
            sol.state.u[i].into(),
            sol.state.du[i].into(),
            sol.rhs[i].into(),
            w.theta_big[i].into(),
            w.dim_eff[i].into(),
            w.rho[i].into(),
            w.rho_tilde[i].into(),
        ]);
    }
    let gate = rhs.admissibility(&grid, params);
    let summary = json!({
        "nodes": grid.len(),
        "residual": sol.report.residual,
        "outer_iterations": sol.report.outer_iterations,
        "newton_iterations": sol.report.newton_iterations,
        "locked_nodes": sol.report.locked_nodes,
        "weighted_l1": gate.weighted_l1,
        "gates": entry.gates(params),
        "min_u": sol.state.u.iter().copied().fold(f64::INFINITY, f64::min),
        "max_u": sol.state.u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "weak": weak,
        "restart_deviations": deviations,
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
        warnings,
    })
}

fn grid2d(cfg: &RunConfig, params: &ProblemParams) -> Result<RunOutput> {
    let entry = cfg.rhs_entry()?;
    let warnings: Vec<String> = cfg.planar_gate(entry, params)?.into_iter().collect();
    let grid = cfg.grid.planar_grid(cfg.grid.radius)?;
    let extremal = cfg.grid2d_solver.extremal;
    let f = entry.planar(params, extremal);
    let moll = pucci_core::mollifier::Mollifier::new(cfg.grid.epsilon)?;
    let fv: Vec<f64> = grid.points().iter().map(|&x| moll.planar(&*f, x)).collect();
    let exact = entry.exact_solution();
    let dirichlet = move |x: [f64; 2]| exact.map_or(0.0, |m| m.value(x));
    let c = cfg.grid.c_reg;
    let sol = policy_iteration_solve(&grid, &fv, params, c, &dirichlet, &cfg.grid2d_solver, None)?;
    let mut deviations = Vec::new();
    for guess in restart_guesses(cfg, grid.len(), &sol.u) {
        let other = policy_iteration_solve(&grid, &fv, params, c, &dirichlet, &cfg.grid2d_solver, Some(&guess))?;
        deviations.push(max_abs_diff(&other.u, &sol.u));
    }
    let kato = (extremal == Extremal::Plus).then(|| kato_subsolution_check(&grid, &sol.u, &sol.boundary, &fv, params, c));
    let mut t = Table::new("grid2d", &["x", "y", "u", "f", "pair", "a", "b", "exact"]);
    let mut max_error: Option<f64> = None;
    for (n, x) in grid.points().into_iter().enumerate() {
        let e = exact.map(|m| m.value(x));
        if let Some(v) = e {
            max_error = Some(max_error.unwrap_or(0.0).max((v - sol.u[n]).abs()));
        }
        let p = sol.policy[n];
        t.push(vec![
            x[0].into(),
            x[1].into(),
            sol.u[n].into(),
            fv[n].into(),
            p.pair.into(),
            p.a.into(),
            p.b.into(),
            e.into(),
        ]);
    }
    let summary = json!({
        "nodes": grid.len(),
        "report": sol.report,
        "gates": entry.gates(params),
        "min_u": sol.u.iter().copied().fold(f64::INFINITY, f64::min),
        "max_error": max_error,
        "kato": kato,
        "restart_deviations": deviations,
    });
    Ok(RunOutput {
        tables: vec![t],
        summary,
        warnings,
    })
}

fn ladder(cfg: &RunConfig, params: &ProblemParams) -> Result<RunOutput> {
    let entry = cfg.rhs_entry()?;
    let section = cfg.ladder.as_ref().ok_or_else(|| Error::Input("missing [ladder] section".into()))?;
    let schedule = section.schedule();
    match section.space {
        Space::Radial => {
            let mut warnings: Vec<String> = cfg.radial_gate(entry, params)?.into_iter().collect();
            let profile = entry.radial_profile(params)?;
            let mut scfg = cfg.radial_solver.clone();
            scfg.exploratory |= cfg.exploratory;
            let grid_for = |r: f64| cfg.grid.radial_grid(r);
            let lad = approximation_ladder(&profile, params, &schedule, &grid_for, &scfg)?;
            let mut t = Table::new(
                "ladder",
                &[
                    "rung",
                    "radius",
                    "c_n",
                    "epsilon",
                    "r_first",
                    "u_first",
                    "weighted_l1",
                    "int_rho_us",
                    "estimate_ratio",
                    "residual",
                    "outer_iterations",
                    "first_node_difference",
                    "window_difference",
                ],
            );
            let first = lad.first_node_differences();
            for (n, r) in lad.rungs.iter().enumerate() {
                warnings.extend(r.gate_warning.iter().map(|w| format!("rung {n}: {w}")));
                let prev = n.checked_sub(1);
                t.push(vec![
                    n.into(),
                    r.radius.into(),
                    r.c_n.into(),
                    r.epsilon.into(),
                    r.r_first.into(),
                    r.u_first.into(),
                    r.weighted_l1.into(),
                    r.int_rho_us.into(),
                    (r.int_rho_us / (1.0 + r.weighted_l1)).into(),
                    r.residual.into(),
                    r.outer_iterations.into(),
                    prev.map(|k| first[k]).into(),
                    prev.map(|k| lad.interior_differences[k]).into(),
                ]);
            }
            warnings.dedup();
            Ok(RunOutput {
                tables: vec![t],
                summary: json!({ "space": "radial", "rungs": lad.rungs, "first_node_differences": first }),
                warnings,
            })
        }
        Space::Planar => {
            let warnings: Vec<String> = cfg.planar_gate(entry, params)?.into_iter().collect();
            let f = entry.planar(params, Extremal::Plus);
            let lad = whole_space_ladder(
                &*f,
                params,
                &schedule,
                cfg.grid.h,
                &DirectionStencil::standard(),
                &cfg.grid2d_solver,
            )?;
            let mut t = Table::new(
                "ladder",
                &[
                    "rung",
                    "radius",
                    "c_n",
                    "epsilon",
                    "nodes",
                    "policy_updates",
                    "residual",
                    "min_u",
                    "monitor_sup",
                    "f_norm",
                    "local_bound_ratio",
                    "monitor_difference",
                ],
            );
            for (n, r) in lad.rungs.iter().enumerate() {
                t.push(vec![
                    n.into(),
                    r.radius.into(),
                    r.c_n.into(),
                    r.epsilon.into(),
                    r.nodes.into(),
                    r.policy_updates.into(),
                    r.residual.into(),
                    r.min_u.into(),
                    r.monitor_sup.into(),
                    r.f_norm.into(),
                    r.local_bound_ratio.into(),
                    n.checked_sub(1).map(|k| lad.monitor_differences[k]).into(),
                ]);
            }
            Ok(RunOutput {
                tables: vec![t],
                summary: json!({ "space": "planar", "rungs": lad.rungs }),
                warnings,
            })
        }
    }
}

fn blowup(cfg: &RunConfig, params: &ProblemParams) -> Result<RunOutput> {
    let section = cfg.blowup.as_ref().ok_or_else(|| Error::Input("missing [blowup] section".into()))?;
    let mut warnings = Vec::new();
    let f = match &cfg.rhs {
        Some(entry) => {
            warnings.extend(cfg.planar_gate(entry, params)?);
            entry.planar(params, Extremal::Plus)
        }
        None => RhsCatalogEntry::Constant { value: 0.0 }.planar(params, Extremal::Plus),
    };
    let run = solve_explosive(
        section.radius,
        &*f,
        params,
        &section.schedule(),
        cfg.grid.h,
        &cfg.grid2d_solver,
    )?;
    let mut rungs = Table::new(
        "blowup",
        &[
            "boundary_value",
            "c_n",
            "center_value",
            "min_increment",
            "policy_updates",
            "residual",
            "barrier_ratio",
        ],
    );
    for r in &run.rungs {
        rungs.push(vec![
            r.boundary_value.into(),
            r.c_n.into(),
            r.center_value.into(),
            r.min_increment.into(),
            r.policy_updates.into(),
            r.residual.into(),
            r.barrier_ratio.into(),
        ]);
    }
    let fit = &run.fit;
    let mut ft = Table::new(
        "blowup_fit",
        &[
            "fitted_exponent",
            "fitted_amplitude",
            "r_squared",
            "theoretical_exponent",
            "theoretical_amplitude",
            "samples",
            "convex_fraction",
        ],
    );
    ft.push(vec![
        fit.fitted_exponent.into(),
        fit.fitted_amplitude.into(),
        fit.r_squared.into(),
        fit.theoretical_exponent.into(),
        fit.theoretical_amplitude.into(),
        fit.samples.into(),
        fit.convex_fraction.into(),
    ]);
    Ok(RunOutput {
        tables: vec![rungs, ft],
        summary: json!({ "fit": run.fit, "center_change": run.center_change, "nodes": run.grid.len() }),
        warnings,
    })
}

fn barrier(cfg: &RunConfig, params: &ProblemParams) -> Result<RunOutput> {
    let section = cfg.barrier.as_ref().ok_or_else(|| Error::Input("missing [barrier] section".into()))?;
    let b = OssermanBarrier::new(section.radius, params)?;
    let check = osserman_residual_check(&b, section.samples)?;
    let (_, stated) = osserman_constant_as_stated(params)?;
    let stated_check = osserman_residual_check(&OssermanBarrier::with_constant(section.radius, params, stated)?, section.samples)?;
    let mut t = Table::new("barrier", &["r", "U", "dU", "d2U", "residual"]);
    for k in 0..section.samples {
        let r = section.radius * k as f64 / section.samples as f64;
        let v = b.eval(r)?;
        t.push(vec![r.into(), v.u.into(), v.du.into(), v.d2u.into(), b.residual(r)?.into()]);
    }
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({
            "alpha": b.alpha(),
            "constant": b.constant(),
            "check": check,
            "stated_constant": stated,
            "stated_constant_check": stated_check,
        }),
        warnings: Vec::new(),
    })
}

fn local_bound(cfg: &RunConfig, params: &ProblemParams) -> Result<RunOutput> {
    let section = cfg
        .local_bound
        .as_ref()
        .ok_or_else(|| Error::Input("missing [local_bound] section".into()))?;
    let entry = cfg.rhs.clone().unwrap_or(RhsCatalogEntry::Constant { value: 0.0 });
    let f = entry.planar(params, Extremal::Plus);
    let rep = local_bound_experiment(
        params,
        &*f,
        section.inner_radius,
        section.outer_radius,
        &section.boundary_values,
        cfg.grid.h,
        &cfg.grid2d_solver,
    )?;
    let mut t = Table::new("local_bound", &["boundary_value", "sup_inner", "barrier_cap", "shifted_cap"]);
    for (g, s) in rep.boundary_values.iter().zip(&rep.sup_inner) {
        t.push(vec![(*g).into(), (*s).into(), rep.barrier_cap.into(), rep.shifted_cap.into()]);
    }
    Ok(RunOutput {
        tables: vec![t],
        summary: serde_json::to_value(&rep).map_err(|e| Error::Io(e.into()))?,
        warnings: Vec::new(),
    })
}

fn convergence(cfg: &RunConfig, params: &ProblemParams) -> Result<RunOutput> {
    let section = cfg
        .convergence
        .as_ref()
        .ok_or_else(|| Error::Input("missing [convergence] section".into()))?;
    let entry = cfg.rhs_entry()?;
    let exact = entry
        .exact_solution()
        .ok_or_else(|| Error::Input("convergence studies need a manufactured solution".into()))?;
    let mut rows: Vec<(f64, usize, f64)> = Vec::new();
    for &n in &section.resolutions {
        let (h, nodes, err) = match section.space {
            Space::Radial => radial_error(entry, exact, n, cfg, params)?,
            Space::Planar => planar_error(entry, exact, n, cfg, params)?,
        };
        rows.push((h, nodes, err));
    }
    let mut t = Table::new("convergence", &["h", "nodes", "error", "order"]);
    let mut orders = Vec::new();
    for (k, &(h, nodes, err)) in rows.iter().enumerate() {
        let order = (k > 0).then(|| {
            let (hp, _, ep) = rows[k - 1];
            (ep / err).ln() / (hp / h).ln()
        });
        orders.extend(order);
        t.push(vec![h.into(), nodes.into(), err.into(), order.into()]);
    }
    let final_order = orders.last().copied().unwrap_or(f64::NAN);
    let [lo, hi] = section.order_band;
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({
            "final_order": final_order,
            "order_band": section.order_band,
            "within_band": final_order >= lo && final_order <= hi,
            "finest_error": rows.last().map(|r| r.2),
        }),
        warnings: Vec::new(),
    })
}

fn radial_error(
    entry: &RhsCatalogEntry,
    exact: Manufactured,
    n: usize,
    cfg: &RunConfig,
    params: &ProblemParams,
) -> Result<(f64, usize, f64)> {
    let grid = RadialGrid::uniform(1.0, n)?;
    let profile = entry.radial_profile(params)?;
    let rhs = RadialRhs::Sampled(grid.nodes().iter().map(|&r| profile.eval(r)).collect());
    let sol = solve_radial_bvp(&grid, &rhs, params, 0.0, &cfg.radial_solver)?;
    let err = grid
        .nodes()
        .iter()
        .zip(&sol.state.u)
        .map(|(&r, u)| (exact.value([r, 0.0]) - u).abs())
        .fold(0.0, f64::max);
    Ok((grid.max_spacing(), grid.len(), err))
}

fn planar_error(
    entry: &RhsCatalogEntry,
    exact: Manufactured,
    n: usize,
    cfg: &RunConfig,
    params: &ProblemParams,
) -> Result<(f64, usize, f64)> {
    let h = 1.0 / n as f64;
    let grid = CartesianGrid2::new(cfg.grid.radius, h, DirectionStencil::standard())?;
    let f = entry.planar(params, cfg.grid2d_solver.extremal);
    let fv: Vec<f64> = grid.points().iter().map(|&x| f(x)).collect();
    let sol = policy_iteration_solve(&grid, &fv, params, 0.0, &|x| exact.value(x), &cfg.grid2d_solver, None)?;
    let err = grid
        .points()
        .iter()
        .zip(&sol.u)
        .map(|(&x, u)| (exact.value(x) - u).abs())
        .fold(0.0, f64::max);
    Ok((h, grid.len(), err))
}
