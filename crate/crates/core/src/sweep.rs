//! Exhaustive search over measurement settings.
//!
//! Angular axes are uniform with step `π/(resolution − 1)` for polar angles
//! and `2π/(resolution − 1)` for azimuths (the `2π` endpoint is dropped, it
//! coincides with 0). With an odd resolution both `π/2` and `π` sit exactly
//! on the grid, and a grid of resolution `2n − 1` contains the grid of
//! resolution `n`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Statistics;
use crate::game::ConditionalDistribution;
use crate::observable::BlochObservable;
use crate::scheme_one::{self, SchemeOneConfig};
use crate::scheme_two::{self, SourceAmplitudes};

const MAX_AXES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl GridAxis {
    /// `resolution` points from `start` to `end`, both included.
    pub fn closed(name: &str, start: f64, end: f64, resolution: usize) -> Self {
        let values = if resolution == 0 {
            Vec::new()
        } else if resolution == 1 {
            vec![start]
        } else {
            // Fraction first, so nested grids produce bit-identical points.
            let last = (resolution - 1) as f64;
            (0..resolution)
                .map(|k| start + (end - start) * (k as f64 / last))
                .collect()
        };
        GridAxis {
            name: name.to_string(),
            values,
        }
    }

    /// Polar angle in `[0, π]`.
    pub fn polar(name: &str, resolution: usize) -> Self {
        GridAxis::closed(name, 0.0, PI, resolution)
    }

    /// Azimuth in `[0, 2π)`, periodic endpoint removed.
    pub fn azimuthal(name: &str, resolution: usize) -> Self {
        let mut axis = GridAxis::closed(name, 0.0, TAU, resolution);
        if resolution > 1 {
            axis.values.pop();
        }
        axis
    }

    /// Mixing angle in `[0, π/2]`, so `|s0| = cos` of it.
    pub fn mixing(name: &str, resolution: usize) -> Self {
        GridAxis::closed(name, 0.0, FRAC_PI_2, resolution)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub resolution: usize,
    pub axes: Vec<GridAxis>,
}

impl Grid {
    pub fn new(resolution: usize, axes: Vec<GridAxis>) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidParameter("grid resolution must be at least 1".into()));
        }
        if axes.is_empty() || axes.len() > MAX_AXES || axes.iter().any(|a| a.values.is_empty()) {
            return Err(Error::InvalidParameter(format!(
                "grid needs 1..={MAX_AXES} non-empty axes"
            )));
        }
        Ok(Grid { resolution, axes })
    }

    /// Axes `theta_a, phi_a, theta_b, phi_b`.
    pub fn scheme_one(resolution: usize) -> Result<Self> {
        Grid::new(
            resolution,
            vec![
                GridAxis::polar("theta_a", resolution),
                GridAxis::azimuthal("phi_a", resolution),
                GridAxis::polar("theta_b", resolution),
                GridAxis::azimuthal("phi_b", resolution),
            ],
        )
    }

    /// Axes `mixing, phase, theta_a, theta_b, phi_b`; `phi_a` is held at 0
    /// because the objective depends on `phase − phi_a + phi_b` only.
    pub fn scheme_two(resolution: usize) -> Result<Self> {
        Grid::new(
            resolution,
            vec![
                GridAxis::mixing("mixing", resolution),
                GridAxis::azimuthal("phase", resolution),
                GridAxis::polar("theta_a", resolution),
                GridAxis::polar("theta_b", resolution),
                GridAxis::azimuthal("phi_b", resolution),
            ],
        )
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.name.clone()).collect()
    }

    /// Parameters at a flat index; the first axis varies slowest.
    fn decode(&self, mut flat: usize, out: &mut [f64]) {
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            let n = axis.values.len();
            *slot = axis.values[flat % n];
            flat /= n;
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        self.decode(flat, &mut out);
        out
    }

    /// All grid points in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub param_names: Vec<String>,
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub grid_resolution: usize,
    pub evaluations: usize,
}

/// Maximizes `objective` over every grid point. Ties go to the
/// lexicographically smallest parameter tuple, independent of scheduling.
pub fn grid_search<F>(grid: &Grid, objective: F) -> SweepResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dims = grid.axes.len();
    let (best_value, best_index) = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let mut buf = [0.0; MAX_AXES];
            grid.decode(flat, &mut buf[..dims]);
            (objective(&buf[..dims]), flat)
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), better);
    SweepResult {
        param_names: grid.names(),
        best_params: grid.point(best_index),
        best_value,
        grid_resolution: grid.resolution,
        evaluations: grid.len(),
    }
}

fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
        a
    } else {
        b
    }
}

/// Scheme-one settings from `[theta_a, phi_a, theta_b, phi_b]`.
pub fn scheme_one_config(stats: Statistics, params: &[f64]) -> Result<SchemeOneConfig> {
    match params {
        &[ta, pa, tb, pb] => Ok(SchemeOneConfig {
            stats,
            obs_a: BlochObservable::new(ta, pa)?,
            obs_b: BlochObservable::new(tb, pb)?,
        }),
        _ => Err(Error::InvalidParameter(format!(
            "expected 4 scheme-one parameters, got {}",
            params.len()
        ))),
    }
}

/// Scheme-two settings from `[mixing, phase, theta_a, theta_b, phi_b]`.
pub fn scheme_two_settings(
    params: &[f64],
) -> Result<(SourceAmplitudes, BlochObservable, BlochObservable)> {
    match params {
        &[mixing, phase, ta, tb, pb] => Ok((
            SourceAmplitudes::from_angles(mixing, phase),
            BlochObservable::new(ta, 0.0)?,
            BlochObservable::new(tb, pb)?,
        )),
        _ => Err(Error::InvalidParameter(format!(
            "expected 5 scheme-two parameters, got {}",
            params.len()
        ))),
    }
}

pub fn scheme_one_objective(stats: Statistics) -> impl Fn(&[f64]) -> f64 + Sync {
    move |params| {
        let cfg = scheme_one_config(stats, params).expect("grid point within angle ranges");
        scheme_one::win_probability_closed_form(&cfg)
    }
}

pub fn scheme_two_objective() -> impl Fn(&[f64]) -> f64 + Sync {
    |params| {
        let (s, oa, ob) = scheme_two_settings(params).expect("grid point within angle ranges");
        scheme_two::win_probability_closed_form(&s, &oa, &ob)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    One,
    Two,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scheme: Scheme,
    pub stats: Statistics,
    pub resolution: usize,
    pub param_names: Vec<String>,
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    /// Win probability from the simulation pipeline at the optimum.
    pub p_win_pipeline_at_best: f64,
    pub p_win_table_at_best: ConditionalDistribution,
}

pub fn sweep(scheme: Scheme, stats: Statistics, resolution: usize) -> Result<SweepReport> {
    let (result, table) = match scheme {
        Scheme::One => {
            let grid = Grid::scheme_one(resolution)?;
            let result = grid_search(&grid, scheme_one_objective(stats));
            let cfg = scheme_one_config(stats, &result.best_params)?;
            (result, scheme_one::measurement_distribution(&cfg))
        }
        Scheme::Two => {
            scheme_two::assert_physicality(stats)?;
            let grid = Grid::scheme_two(resolution)?;
            let result = grid_search(&grid, scheme_two_objective());
            let (s, oa, ob) = scheme_two_settings(&result.best_params)?;
            (result, scheme_two::measurement_distribution(&s, &oa, &ob))
        }
    };
    Ok(SweepReport {
        scheme,
        stats,
        resolution,
        param_names: result.param_names,
        best_params: result.best_params,
        best_value: result.best_value,
        evaluations: result.evaluations,
        p_win_pipeline_at_best: crate::game::win_probability(&table),
        p_win_table_at_best: table,
    })
}
