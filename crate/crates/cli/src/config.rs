//! TOML run configuration.
//!
//! Parsing goes through `serde_path_to_error`, so type errors name the
//! offending key; the semantic checks in [`RunConfig::validate`] do the same.

use pucci_core::blowup::BlowupSchedule;
use pucci_core::grid2d::{CartesianGrid2, DirectionStencil, Grid2Config};
use pucci_core::radial::{Grading, RadialGrid, RadialSolverConfig};
use pucci_core::schedule::LadderSchedule;
use pucci_core::{Error, ProblemParams, Result};
use serde::{Deserialize, Serialize};

use crate::catalog::RhsCatalogEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Radial,
    Grid2d,
    Ladder,
    Blowup,
    Barrier,
    LocalBound,
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    #[default]
    Radial,
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub dim: usize,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub radius: f64,
    /// Radial node count (uniform part for geometric grading).
    pub nodes: usize,
    pub grading: Grading,
    /// Planar spacing.
    pub h: f64,
    /// Smoothing width applied to the data of single solves.
    pub epsilon: f64,
    pub c_reg: f64,
    /// Extra solves from seeded random initial guesses.
    pub restarts: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            radius: 1.0,
            nodes: 256,
            grading: Grading::Uniform,
            h: 1.0 / 32.0,
            epsilon: 0.0,
            c_reg: 0.0,
            restarts: 0,
        }
    }
}

impl GridSection {
    pub fn radial_grid(&self, radius: f64) -> Result<RadialGrid> {
        let n = ((self.nodes as f64) * radius / self.radius).round().max(2.0) as usize;
        match self.grading {
            Grading::Uniform => RadialGrid::uniform(radius, n),
            Grading::GeometricTowardZero { ratio, r_min } => RadialGrid::geometric(radius, n, ratio, r_min),
        }
    }

    pub fn planar_grid(&self, radius: f64) -> Result<CartesianGrid2> {
        CartesianGrid2::new(radius, self.h, DirectionStencil::standard())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSection {
    #[serde(default)]
    pub space: Space,
    pub radii: Vec<f64>,
    pub c_n: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub monitor_radius: f64,
    #[serde(default)]
    pub monitor_inner: f64,
}

impl LadderSection {
    pub fn schedule(&self) -> LadderSchedule {
        LadderSchedule {
            radii: self.radii.clone(),
            c_n: self.c_n.clone(),
            epsilons: self.epsilons.clone(),
            monitor_radius: self.monitor_radius,
            monitor_inner: self.monitor_inner,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSection {
    #[serde(default = "one")]
    pub radius: f64,
    pub boundary_values: Vec<f64>,
    #[serde(default)]
    pub c_n: Vec<f64>,
    pub fit_window: [f64; 2],
}

fn one() -> f64 {
    1.0
}

impl BlowupSection {
    pub fn schedule(&self) -> BlowupSchedule {
        let c_n = if self.c_n.is_empty() {
            vec![0.0; self.boundary_values.len()]
        } else {
            self.c_n.clone()
        };
        BlowupSchedule {
            boundary_values: self.boundary_values.clone(),
            c_n,
            fit_window: (self.fit_window[0], self.fit_window[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalBoundSection {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub boundary_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    #[serde(default)]
    pub space: Space,
    /// Radial node counts, or `1/h` for planar grids.
    pub resolutions: Vec<usize>,
    /// Accepted band for the observed order on the finest pair.
    #[serde(default = "default_band")]
    pub order_band: [f64; 2],
}

fn default_band() -> [f64; 2] {
    [1.7, 2.3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierSection {
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    /// Bypass the admissibility gates (with a warning).
    #[serde(default)]
    pub exploratory: bool,
    /// Output directory; the command line takes precedence.
    #[serde(default)]
    pub output: Option<String>,
    pub params: ParamsSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub rhs: Option<RhsCatalogEntry>,
    #[serde(default)]
    pub ladder: Option<LadderSection>,
    #[serde(default)]
    pub blowup: Option<BlowupSection>,
    #[serde(default)]
    pub local_bound: Option<LocalBoundSection>,
    #[serde(default)]
    pub convergence: Option<ConvergenceSection>,
    #[serde(default)]
    pub barrier: Option<BarrierSection>,
    #[serde(default)]
    pub radial_solver: RadialSolverConfig,
    #[serde(default)]
    pub grid2d_solver: Grid2Config,
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn rekey(key: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        e @ Error::Config { .. } => e,
        other => config_err(key, other.to_string()),
    }
}

impl RunConfig {
    /// Parses without semantic validation.
    pub fn parse(src: &str) -> Result<Self> {
        let de = toml::de::Deserializer::parse(src).map_err(|e| config_err("<document>", e.message()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let key = if path.is_empty() || path == "." { "<document>".to_string() } else { path };
            config_err(&key, e.into_inner().message())
        })
    }

    /// Parses and validates.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let cfg = Self::parse(src)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn problem_params(&self) -> Result<ProblemParams> {
        let p = self.params;
        ProblemParams::new(p.lambda, p.big_lambda, p.dim, p.s).map_err(rekey("params"))
    }

    pub fn rhs_entry(&self) -> Result<&RhsCatalogEntry> {
        self.rhs.as_ref().ok_or_else(|| config_err("rhs", "this experiment needs a [rhs] entry"))
    }

    /// Semantic checks; every error names the key at fault.
    pub fn validate(&self) -> Result<()> {
        let params = self.problem_params()?;
        let g = &self.grid;
        if !(g.radius.is_finite() && g.radius > 0.0) {
            return Err(config_err("grid.radius", format!("must be positive, got {}", g.radius)));
        }
        if !(g.h.is_finite() && g.h > 0.0) {
            return Err(config_err("grid.h", format!("must be positive, got {}", g.h)));
        }
        if !(g.epsilon.is_finite() && g.epsilon >= 0.0) {
            return Err(config_err("grid.epsilon", format!("must be nonnegative, got {}", g.epsilon)));
        }
        if !(g.c_reg.is_finite() && g.c_reg >= 0.0) {
            return Err(config_err("grid.c_reg", format!("must be nonnegative, got {}", g.c_reg)));
        }
        if !(self.radial_solver.tol > 0.0) {
            return Err(config_err("radial_solver.tol", "must be positive"));
        }
        if !(self.grid2d_solver.tol > 0.0) {
            return Err(config_err("grid2d_solver.tol", "must be positive"));
        }
        if let Some(rhs) = &self.rhs {
            rhs.validate("rhs")?;
        }
        let needs_rhs = matches!(
            self.experiment,
            Experiment::Radial | Experiment::Grid2d | Experiment::Ladder | Experiment::Convergence
        );
        if needs_rhs {
            self.rhs_entry()?;
        }
        match self.experiment {
            Experiment::Radial => {
                g.radial_grid(g.radius).map_err(rekey("grid"))?;
                let rhs = self.rhs_entry()?;
                rhs.radial_profile(&params).map_err(rekey("rhs"))?;
                self.radial_gate(rhs, &params)?;
            }
            Experiment::Grid2d => {
                g.planar_grid(g.radius).map_err(rekey("grid"))?;
                self.planar_gate(self.rhs_entry()?, &params)?;
            }
            Experiment::Ladder => {
                let l = self.ladder.as_ref().ok_or_else(|| config_err("ladder", "missing [ladder] section"))?;
                let schedule = l.schedule();
                schedule.validate().map_err(rekey("ladder"))?;
                let rhs = self.rhs_entry()?;
                match l.space {
                    Space::Radial => {
                        rhs.radial_profile(&params).map_err(rekey("rhs"))?;
                        g.radial_grid(schedule.radii[0]).map_err(rekey("grid"))?;
                        self.radial_gate(rhs, &params)?;
                    }
                    Space::Planar => {
                        if params.dim() != 2 {
                            return Err(config_err("params.dim", "planar experiments need dim = 2"));
                        }
                        self.planar_gate(rhs, &params)?;
                    }
                }
            }
            Experiment::Blowup => {
                let b = self.blowup.as_ref().ok_or_else(|| config_err("blowup", "missing [blowup] section"))?;
                if !(b.radius.is_finite() && b.radius > 0.0) {
                    return Err(config_err("blowup.radius", "must be positive"));
                }
                if !b.c_n.is_empty() && b.c_n.len() != b.boundary_values.len() {
                    return Err(config_err("blowup.c_n", "needs one value per boundary value"));
                }
                b.schedule().validate(g.h).map_err(rekey("blowup"))?;
                if let Some(rhs) = &self.rhs {
                    self.planar_gate(rhs, &params)?;
                }
            }
            Experiment::Barrier => {
                let b = self.barrier.as_ref().ok_or_else(|| config_err("barrier", "missing [barrier] section"))?;
                if !(b.radius.is_finite() && b.radius > 0.0) {
                    return Err(config_err("barrier.radius", "must be positive"));
                }
                if b.samples < 100 {
                    return Err(config_err("barrier.samples", "need at least 100 samples"));
                }
            }
            Experiment::LocalBound => {
                let lb = self
                    .local_bound
                    .as_ref()
                    .ok_or_else(|| config_err("local_bound", "missing [local_bound] section"))?;
                if !(lb.inner_radius > 0.0 && lb.outer_radius > lb.inner_radius && lb.outer_radius.is_finite()) {
                    return Err(config_err("local_bound.outer_radius", "need 0 < inner_radius < outer_radius"));
                }
                if lb.boundary_values.is_empty() || lb.boundary_values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(config_err(
                        "local_bound.boundary_values",
                        "need at least one finite nonnegative value",
                    ));
                }
                if let Some(rhs) = &self.rhs {
                    if !rhs.is_nonnegative() {
                        return Err(config_err("rhs", "local bounds are studied for nonnegative data"));
                    }
                }
            }
            Experiment::Convergence => {
                let c = self
                    .convergence
                    .as_ref()
                    .ok_or_else(|| config_err("convergence", "missing [convergence] section"))?;
                if c.resolutions.len() < 2 || c.resolutions.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(config_err(
                        "convergence.resolutions",
                        "need at least two strictly increasing resolutions",
                    ));
                }
                if c.resolutions[0] < 2 {
                    return Err(config_err("convergence.resolutions", "resolutions must be at least 2"));
                }
                let exact = self.rhs_entry()?.exact_solution().ok_or_else(|| {
                    config_err("rhs.kind", "convergence studies need a manufactured-from-u entry")
                })?;
                if c.space == Space::Radial && !exact.is_radial() {
                    return Err(config_err("rhs.solution", "radial studies need a radial solution"));
                }
                if c.space == Space::Radial && g.radius != 1.0 {
                    return Err(config_err("grid.radius", "radial studies use the unit ball"));
                }
            }
        }
        if matches!(self.experiment, Experiment::Grid2d | Experiment::Blowup | Experiment::LocalBound)
            && params.dim() != 2
        {
            return Err(config_err("params.dim", "planar experiments need dim = 2"));
        }
        if self.experiment == Experiment::Convergence
            && self.convergence.as_ref().is_some_and(|c| c.space == Space::Planar)
            && params.dim() != 2
        {
            return Err(config_err("params.dim", "planar experiments need dim = 2"));
        }
        Ok(())
    }

    /// Radial gate; bypassed in exploratory mode with a warning.
    pub fn radial_gate(&self, rhs: &RhsCatalogEntry, params: &ProblemParams) -> Result<Option<String>> {
        if rhs.gates(params).weighted_l1 {
            return Ok(None);
        }
        let msg = format!(
            "{} fails the weighted-L1 gate int r^(N+ - 1)|f| dr < inf (N+ = {})",
            rhs.kind(),
            params.n_plus()
        );
        if self.exploratory {
            Ok(Some(msg))
        } else {
            Err(config_err("rhs", format!("{msg}; rerun with --exploratory")))
        }
    }

    /// `L^N_loc` gate for planar runs.
    pub fn planar_gate(&self, rhs: &RhsCatalogEntry, params: &ProblemParams) -> Result<Option<String>> {
        if rhs.gates(params).ln_loc {
            return Ok(None);
        }
        let msg = format!("{} fails the L^N_loc gate for f (N = {})", rhs.kind(), params.dim());
        if self.exploratory {
            Ok(Some(msg))
        } else {
            Err(config_err("rhs", format!("{msg}; rerun with --exploratory")))
        }
    }
}
