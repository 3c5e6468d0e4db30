// SPDX-License-Identifier: Apache-2.0

//! Critical points of a sweep: the edges of the engine and refrigerator
//! bands that bound the dud gap, and the performance maxima.
//!
//! Band edges are bracketed by the regime tags of neighbouring grid rows and
//! refined by bisection on the regime predicate. Maxima are refined by
//! golden-section search inside the grid cells around the best row.

use serde::Serialize;

use super::{evaluate_point, SweepConfig, SweepError, SweepRow};
use crate::reservoir::Lead;
use crate::thermo::Regime;
use crate::PointReport;

pub const DEFAULT_REFINE_TOL: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CriticalPoints {
    /// Level of a voltage sweep.
    pub eps: Option<f64>,
    /// Bias of a level cut.
    pub voltage: Option<f64>,
    pub v_eta0: Option<f64>,
    pub v_phi0: Option<f64>,
    pub v_etamax: Option<f64>,
    pub v_phimax: Option<f64>,
    pub eta_max_norm: Option<f64>,
    pub phi_max_norm: Option<f64>,
    pub eps_eta0: Option<f64>,
    pub eps_phi0: Option<f64>,
}

/// Bisection between a point where `inside` holds and one where it does not.
pub fn bisect_boundary<F>(mut inside: f64, mut outside: f64, tol: f64, mut pred: F) -> Result<f64, SweepError>
where
    F: FnMut(f64) -> Result<bool, SweepError>,
{
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if pred(mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
pub fn golden_max<F>(mut lo: f64, mut hi: f64, tol: f64, mut f: F) -> Result<(f64, f64), SweepError>
where
    F: FnMut(f64) -> Result<f64, SweepError>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (hi - lo).abs() > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Normalized efficiency continued outside the engine band, so that it
/// crosses zero at the band edge instead of vanishing.
fn eta_norm_continued(report: &PointReport) -> f64 {
    let cur = &report.currents;
    let j_hot = cur.j_heat(Lead::Hot);
    if j_hot > 0.0 {
        cur.work() / j_hot / report.performance.carnot_eta
    } else {
        f64::NEG_INFINITY
    }
}

fn phi_norm_continued(report: &PointReport) -> f64 {
    let cur = &report.currents;
    let work = cur.work();
    match report.performance.carnot_phi {
        Some(c) if work < 0.0 => -cur.j_heat(Lead::Cold) / work / c,
        _ => f64::NEG_INFINITY,
    }
}

/// `(inside, outside)` grid indices of the engine and refrigerator edges
/// facing the dud gap. `engine_first` is the band order along the axis.
fn facing_edges(regimes: &[Regime], engine_first: bool) -> (Option<(usize, usize)>, Option<(usize, usize)>) {
    let n = regimes.len();
    let at = |i: usize| if engine_first { regimes[i] } else { regimes[n - 1 - i] };
    let map = |(a, b): (usize, usize)| if engine_first { (a, b) } else { (n - 1 - a, n - 1 - b) };
    let engine = (0..n.saturating_sub(1))
        .rev()
        .find(|&i| at(i) == Regime::Engine && at(i + 1) != Regime::Engine)
        .map(|i| map((i, i + 1)));
    let fridge = (1..n)
        .find(|&j| at(j) == Regime::Refrigerator && at(j - 1) != Regime::Refrigerator)
        .map(|j| map((j, j - 1)));
    (engine, fridge)
}

/// Zero-bias rows deliver no work and do not count as a band.
fn require_transition(rows: &[SweepRow], axis: String) -> Result<(), SweepError> {
    let mut biased = rows.iter().filter(|r| r.voltage != 0.0);
    match biased.next() {
        Some(first) if biased.any(|r| r.regime != first.regime) => Ok(()),
        _ => Err(SweepError::NoTransition { axis }),
    }
}

fn argmax(rows: &[SweepRow], value: impl Fn(&SweepRow) -> Option<f64>) -> Option<(usize, f64)> {
    rows.iter()
        .enumerate()
        .filter_map(|(i, r)| value(r).map(|v| (i, v)))
        .fold(None, |best, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
}

/// Locates the band edges and maxima of a voltage sweep at level `eps`.
pub fn find_critical_points(
    cfg: &SweepConfig,
    eps: f64,
    rows: &[SweepRow],
    tol: f64,
) -> Result<CriticalPoints, SweepError> {
    require_transition(rows, format!("eps = {eps} meV"))?;
    let regimes: Vec<Regime> = rows.iter().map(|r| r.regime).collect();
    let (engine_edge, fridge_edge) = facing_edges(&regimes, true);
    let is = |want: Regime| move |v: f64| evaluate_point(cfg, eps, v).map(|r| r.performance.regime == want);

    let mut cp = CriticalPoints {
        eps: Some(eps),
        ..Default::default()
    };
    if let Some((i, o)) = engine_edge {
        cp.v_eta0 = Some(bisect_boundary(rows[i].voltage, rows[o].voltage, tol, is(Regime::Engine))?);
    }
    if let Some((i, o)) = fridge_edge {
        cp.v_phi0 = Some(bisect_boundary(rows[i].voltage, rows[o].voltage, tol, is(Regime::Refrigerator))?);
    }

    let cell = |k: usize| {
        let lo = rows[k.saturating_sub(1)].voltage;
        let hi = rows[(k + 1).min(rows.len() - 1)].voltage;
        (lo, hi)
    };
    if let Some((k, grid_best)) = argmax(rows, |r| r.eta_norm) {
        let (lo, mut hi) = cell(k);
        if let Some(edge) = cp.v_eta0 {
            hi = hi.min(edge);
        }
        let (x, f) = golden_max(lo, hi, tol, |v| evaluate_point(cfg, eps, v).map(|r| eta_norm_continued(&r)))?;
        let (x, f) = if f >= grid_best { (x, f) } else { (rows[k].voltage, grid_best) };
        cp.v_etamax = Some(x);
        cp.eta_max_norm = Some(f);
    }
    if let Some((k, grid_best)) = argmax(rows, |r| r.phi_norm) {
        let (mut lo, hi) = cell(k);
        if let Some(edge) = cp.v_phi0 {
            lo = lo.max(edge);
        }
        let (x, f) = golden_max(lo, hi, tol, |v| evaluate_point(cfg, eps, v).map(|r| phi_norm_continued(&r)))?;
        let (x, f) = if f >= grid_best { (x, f) } else { (rows[k].voltage, grid_best) };
        cp.v_phimax = Some(x);
        cp.phi_max_norm = Some(f);
    }
    Ok(cp)
}

/// Locates the level-axis band edges of a cut at fixed bias. Along the level
/// axis the refrigerator band comes first.
pub fn find_level_critical_points(
    cfg: &SweepConfig,
    voltage: f64,
    rows: &[SweepRow],
    tol: f64,
) -> Result<CriticalPoints, SweepError> {
    require_transition(rows, format!("V = {voltage} mV"))?;
    let regimes: Vec<Regime> = rows.iter().map(|r| r.regime).collect();
    let (engine_edge, fridge_edge) = facing_edges(&regimes, false);
    let is = |want: Regime| move |e: f64| evaluate_point(cfg, e, voltage).map(|r| r.performance.regime == want);
    let mut cp = CriticalPoints {
        voltage: Some(voltage),
        ..Default::default()
    };
    if let Some((i, o)) = engine_edge {
        cp.eps_eta0 = Some(bisect_boundary(rows[i].eps, rows[o].eps, tol, is(Regime::Engine))?);
    }
    if let Some((i, o)) = fridge_edge {
        cp.eps_phi0 = Some(bisect_boundary(rows[i].eps, rows[o].eps, tol, is(Regime::Refrigerator))?);
    }
    Ok(cp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Regime::*;

    #[test]
    fn bisection_finds_threshold() {
        let x = bisect_boundary(0.0, 1.0, 1e-9, |x| Ok(x < 0.3)).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
        let x = bisect_boundary(1.0, 0.0, 1e-9, |x| Ok(x > 0.7)).unwrap();
        assert!((x - 0.7).abs() < 1e-9);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, f) = golden_max(0.0, 2.0, 1e-8, |x| Ok(-(x - 1.3f64).powi(2) + 4.0)).unwrap();
        assert!((x - 1.3).abs() < 1e-7);
        assert!((f - 4.0).abs() < 1e-12);
    }

    #[test]
    fn facing_edges_skip_zero_bias_row() {
        let r = [Dud, Engine, Engine, Dud, Refrigerator, Refrigerator];
        assert_eq!(facing_edges(&r, true), (Some((2, 3)), Some((4, 3))));
        let r = [Refrigerator, Dud, Dud, Engine];
        assert_eq!(facing_edges(&r, false), (Some((3, 2)), Some((0, 1))));
        let r = [Dud, Engine, Refrigerator];
        assert_eq!(facing_edges(&r, true), (Some((1, 2)), Some((2, 1))));
        assert_eq!(facing_edges(&[Engine, Engine], true), (None, None));
    }
}
