use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radii, regularisations and smoothing widths of an approximation ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSchedule {
    pub radii: Vec<f64>,
    pub c_n: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Outer edge of the window where consecutive rungs are compared.
    pub monitor_radius: f64,
    /// Inner edge of the comparison window (radial ladders only).
    #[serde(default)]
    pub monitor_inner: f64,
}

impl LadderSchedule {
    pub fn new(radii: Vec<f64>, c_n: Vec<f64>, epsilons: Vec<f64>, monitor_radius: f64) -> Result<Self> {
        let s = Self {
            radii,
            c_n,
            epsilons,
            monitor_radius,
            monitor_inner: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    /// `R_n` nondecreasing, `c_n` and `eps_n` nonincreasing and nonnegative,
    /// all of equal length, and the monitor window inside every ball.
    pub fn validate(&self) -> Result<()> {
        let n = self.radii.len();
        if n == 0 || self.c_n.len() != n || self.epsilons.len() != n {
            return Err(Error::Parameter(
                "ladder needs equally many radii, regularisations and widths".into(),
            ));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0))
            || self.radii.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::Parameter("ladder radii must be positive and nondecreasing".into()));
        }
        if self.c_n.iter().any(|c| !(c.is_finite() && *c >= 0.0)) || self.c_n.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Parameter("regularisations must be nonnegative and nonincreasing".into()));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0))
            || self.epsilons.windows(2).any(|w| w[1] > w[0])
        {
            return Err(Error::Parameter("widths must be nonnegative and nonincreasing".into()));
        }
        if !(self.monitor_radius > self.monitor_inner && self.monitor_radius < self.radii[0]) {
            return Err(Error::Parameter(format!(
                "monitor window ({}, {}) must lie inside the smallest ball of radius {}",
                self.monitor_inner, self.monitor_radius, self.radii[0]
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// The dyadic widths `eps_n = 2^{-n}` for `n = first..first+count`.
    pub fn dyadic_widths(first: i32, count: usize) -> Vec<f64> {
        (0..count).map(|k| 0.5f64.powi(first + k as i32)).collect()
    }
}
