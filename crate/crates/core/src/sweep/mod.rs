// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps over the bias and the mean level.
//!
//! Grid points are independent; they are evaluated on the rayon pool and
//! gathered in grid order, so results do not depend on the worker count.

pub mod config;
pub mod critical;
pub mod emit;

use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error as ThisError;

pub use config::{ConfigError, Format, Grid, SweepConfig};
pub use critical::{find_critical_points, find_level_critical_points, CriticalPoints, DEFAULT_REFINE_TOL};
pub use emit::{emit, write_critical, write_rows};

use crate::reservoir::Lead;
use crate::thermo::Regime;
use crate::{evaluate, Error, PointReport};

#[derive(Debug, ThisError)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("at V = {voltage} mV, eps = {eps} meV: {source}")]
    Point {
        voltage: f64,
        eps: f64,
        #[source]
        source: Error,
    },
    #[error("no regime transition in sweep at {axis}")]
    NoTransition { axis: String },
    #[error("row check failed at V = {voltage} mV, eps = {eps} meV: {reason}")]
    RowCheck { voltage: f64, eps: f64, reason: String },
    #[error("cannot write {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SweepError {
    /// Process exit code: 2 for configuration problems, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config(_) => 2,
            SweepError::Point { source, .. } => match source {
                Error::Model(_) | Error::Reservoir(_) => 2,
                _ => 3,
            },
            SweepError::NoTransition { .. } | SweepError::RowCheck { .. } => 3,
            SweepError::Io { .. } => 1,
        }
    }
}

/// One grid point as emitted.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub voltage: f64,
    pub eps: f64,
    pub i_energy_hot: f64,
    pub i_matter_hot: f64,
    pub j_hot: f64,
    pub j_cold: f64,
    pub sigma: f64,
    /// `eta / eta_C`, engine rows only.
    pub eta_norm: Option<f64>,
    /// `phi / phi_C`, refrigerator rows only.
    pub phi_norm: Option<f64>,
    pub zeta: Option<f64>,
    pub regime: Regime,
    /// `I_E,H + I_E,C`; checked at emit time, not written.
    pub energy_imbalance: f64,
    /// `I_M,H + I_M,C`; checked at emit time, not written.
    pub matter_imbalance: f64,
}

impl SweepRow {
    pub fn from_report(voltage: f64, eps: f64, report: &PointReport) -> Self {
        let cur = &report.currents;
        let perf = &report.performance;
        Self {
            voltage,
            eps,
            i_energy_hot: cur.i_energy(Lead::Hot),
            i_matter_hot: cur.i_matter(Lead::Hot),
            j_hot: cur.j_heat(Lead::Hot),
            j_cold: cur.j_heat(Lead::Cold),
            sigma: perf.sigma,
            eta_norm: perf.eta_normalized(),
            phi_norm: perf.phi_normalized(),
            zeta: perf.zeta,
            regime: perf.regime,
            energy_imbalance: cur.energy_imbalance(),
            matter_imbalance: cur.matter_imbalance(),
        }
    }
}

pub fn evaluate_point(cfg: &SweepConfig, eps: f64, voltage: f64) -> Result<PointReport, SweepError> {
    let annotate = |source: Error| SweepError::Point { voltage, eps, source };
    let model = cfg.model(eps).map_err(|e| annotate(e.into()))?;
    let baths = cfg.baths(voltage).map_err(|e| annotate(e.into()))?;
    evaluate(&model, &baths).map_err(annotate)
}

fn run_points(cfg: &SweepConfig, points: &[(f64, f64)]) -> Result<Vec<SweepRow>, SweepError> {
    let results: Vec<Result<SweepRow, SweepError>> = points
        .par_iter()
        .map(|&(eps, v)| evaluate_point(cfg, eps, v).map(|r| SweepRow::from_report(v, eps, &r)))
        .collect();
    results.into_iter().collect()
}

/// Voltage sweep at one mean level, ordered by `V`.
pub fn sweep_voltage(cfg: &SweepConfig, eps: f64) -> Result<Vec<SweepRow>, SweepError> {
    cfg.validate()?;
    let points: Vec<(f64, f64)> = cfg.voltage.values().into_iter().map(|v| (eps, v)).collect();
    run_points(cfg, &points)
}

/// Voltage sweeps for every configured 1-D level, concatenated in level order.
pub fn sweep_levels(cfg: &SweepConfig) -> Result<Vec<SweepRow>, SweepError> {
    let mut rows = Vec::new();
    for &eps in &cfg.eps_values {
        rows.extend(sweep_voltage(cfg, eps)?);
    }
    Ok(rows)
}

/// Row-major `(eps, V)` map: the level is the slow index.
pub fn sweep_2d(cfg: &SweepConfig) -> Result<Vec<SweepRow>, SweepError> {
    cfg.validate()?;
    let volts = cfg.voltage.values();
    let points: Vec<(f64, f64)> = cfg
        .eps_grid
        .values()
        .into_iter()
        .flat_map(|eps| volts.iter().map(move |&v| (eps, v)))
        .collect();
    run_points(cfg, &points)
}

/// Level sweep at fixed bias, ordered by `eps`.
pub fn sweep_level_cut(cfg: &SweepConfig, voltage: f64) -> Result<Vec<SweepRow>, SweepError> {
    cfg.validate()?;
    let points: Vec<(f64, f64)> = cfg.eps_grid.values().into_iter().map(|e| (e, voltage)).collect();
    run_points(cfg, &points)
}
