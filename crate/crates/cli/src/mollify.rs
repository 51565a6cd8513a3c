//! Smoothing of catalog data with the distance to the raw samples.

use pucci_core::grid2d::{discrete_lp_norm, CartesianGrid2, Extremal};
use pucci_core::mollifier::Mollifier;
use pucci_core::radial::{weighted_l1, RadialGrid};
use pucci_core::{Error, ProblemParams, Result};
use serde::{Deserialize, Serialize};

use crate::catalog::RhsCatalogEntry;

/// Width of the unit-mass bump kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierSpec {
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum SampleGrid<'a> {
    Radial(&'a RadialGrid),
    Planar(&'a CartesianGrid2),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `int r^{N+ - 1} |f_eps - f| dr`.
    WeightedL1,
    /// `(sum h^2 |f_eps - f|^N)^{1/N}` over the disk.
    LN,
}

#[derive(Debug, Clone, Serialize)]
pub struct Mollified {
    pub values: Vec<f64>,
    pub raw: Vec<f64>,
    pub metric: Metric,
    pub distance: f64,
    /// Samples left out of the distance because the raw value is infinite.
    pub singular_samples: usize,
}

/// Samples the smoothed entry on `grid` and measures its distance to the
/// raw samples.
pub fn mollify(
    entry: &RhsCatalogEntry,
    spec: MollifierSpec,
    grid: SampleGrid<'_>,
    params: &ProblemParams,
) -> Result<Mollified> {
    let moll = Mollifier::new(spec.epsilon)?;
    if spec.epsilon == 0.0 {
        if let Some((_, r0)) = entry.singular_circle() {
            let radius = match grid {
                SampleGrid::Radial(g) => g.radius(),
                SampleGrid::Planar(g) => g.radius(),
            };
            if r0 <= radius {
                return Err(Error::Input(format!(
                    "{} has a singularity at distance {r0} inside the window of radius {radius}; \
                     a positive width is required",
                    entry.kind()
                )));
            }
        }
    }
    let (values, raw, metric) = match grid {
        SampleGrid::Radial(g) => {
            let profile = entry.radial_profile(params)?;
            let values: Vec<f64> = g.nodes().iter().map(|&r| profile.smoothed(&moll, r)).collect();
            let raw: Vec<f64> = g.nodes().iter().map(|&r| profile.eval(r)).collect();
            (values, raw, Metric::WeightedL1)
        }
        SampleGrid::Planar(g) => {
            let f = entry.planar(params, Extremal::Plus);
            let values: Vec<f64> = g.points().iter().map(|&x| moll.planar(&*f, x)).collect();
            let raw: Vec<f64> = g.points().iter().map(|&x| f(x)).collect();
            (values, raw, Metric::LN)
        }
    };
    let singular_samples = raw.iter().filter(|v| !v.is_finite()).count();
    let diff: Vec<f64> = values
        .iter()
        .zip(&raw)
        .map(|(a, b)| if b.is_finite() { a - b } else { 0.0 })
        .collect();
    let distance = match grid {
        SampleGrid::Radial(g) => weighted_l1(g, &diff, params.n_plus()),
        SampleGrid::Planar(g) => discrete_lp_norm(g, &diff, params.dim() as f64, f64::INFINITY),
    };
    Ok(Mollified {
        values,
        raw,
        metric,
        distance,
        singular_samples,
    })
}
