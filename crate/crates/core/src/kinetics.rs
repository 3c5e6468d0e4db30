// SPDX-License-Identifier: Apache-2.0

//! Pauli rate equation on the eigenstate populations.
//!
//! Generators are column-stochastic in the continuous-time sense: entry
//! `(i, j)` is the rate from state `j` to state `i`, and each diagonal holds
//! the negative total decay rate of its column. The solvers work for any
//! number of states; the DQD uses four.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;
use twofloat::TwoFloat;

use crate::model::{State, TransitionTable};
use crate::reservoir::{rate_pair, BathSetup, Lead};

/// Singular-value ratio below which the bordered system is treated as
/// numerically singular and the kernel route is used instead.
pub const RANK_RATIO: f64 = 1e-10;
/// Accepted stationarity residual `||L p||_inf`, scaled by `max(1, max|L_ij|)`.
pub const STATIONARY_RESIDUAL: f64 = 1e-12;
/// Relative tolerance of the transient integrator.
pub const EVOLVE_RTOL: f64 = 1e-10;
/// Absolute tolerance of the transient integrator.
pub const EVOLVE_ATOL: f64 = 1e-12;
/// Largest tolerated drift of `sum(p)` over one accepted step.
pub const SIMPLEX_DRIFT_LIMIT: f64 = 1e-8;

const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error("stationary state is not unique: {} closed classes {:?}", .classes.len(), .classes)]
    ReducibleChain { classes: Vec<Vec<usize>> },
    #[error("stationary solve failed: {0}")]
    SolveFailure(String),
    #[error("adaptive stepping failed at t = {time}: {reason}")]
    StepFailure { time: f64, reason: String },
    #[error("probability drifted by {drift:e} at t = {time}")]
    SimplexDrift { time: f64, drift: f64 },
    #[error("invalid populations: {0}")]
    InvalidPopulations(String),
    #[error("dimension mismatch: generator has {expected} states, populations have {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Probability vector over the eigenstates `(0, -, +, 2)`.
///
/// Vectors produced by the stationary solver also carry the low-order part
/// of each entry. Flux sums read it through [`Populations::extended`], since
/// net currents can be many orders of magnitude below the gross fluxes.
#[derive(Debug, Clone, Serialize)]
pub struct Populations {
    p: Vec<f64>,
    #[serde(skip)]
    tail: Vec<f64>,
}

impl PartialEq for Populations {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
    }
}

impl Populations {
    pub fn new(p: Vec<f64>) -> Result<Self, KineticsError> {
        if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(KineticsError::InvalidPopulations(format!("entries must be finite and non-negative: {p:?}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(KineticsError::InvalidPopulations(format!("sum is {total}")));
        }
        Ok(Self { p, tail: Vec::new() })
    }

    fn from_extended(p: &[TwoFloat]) -> Self {
        let total: TwoFloat = p.iter().fold(TwoFloat::from(0.0), |acc, &x| acc + x);
        let scaled: Vec<TwoFloat> = p.iter().map(|&x| div(x, total)).collect();
        Self {
            p: scaled.iter().map(|x| x.hi()).collect(),
            tail: scaled.iter().map(|x| x.lo()).collect(),
        }
    }

    /// Clamps round-off negatives and rescales onto the simplex.
    fn from_raw(mut p: Vec<f64>) -> Result<Self, KineticsError> {
        for x in p.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total: f64 = p.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(KineticsError::SolveFailure(format!("degenerate normalization {total}")));
        }
        p.iter_mut().for_each(|x| *x /= total);
        Ok(Self { p, tail: Vec::new() })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            p: vec![1.0 / n as f64; n],
            tail: Vec::new(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn get(&self, state: State) -> f64 {
        self.p[state.index()]
    }

    /// Entry with its low-order part, if the solver kept one.
    pub fn extended(&self, state: State) -> TwoFloat {
        let i = state.index();
        TwoFloat::from(self.p[i]) + self.tail.get(i).copied().unwrap_or(0.0)
    }

    pub fn l1_distance(&self, other: &Populations) -> f64 {
        self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.p)
    }
}

/// Per-reservoir generators, indexed by [`Lead`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateGenerator {
    per_reservoir: [DMatrix<f64>; 2],
}

impl RateGenerator {
    pub fn new(hot: DMatrix<f64>, cold: DMatrix<f64>) -> Self {
        assert_eq!(hot.shape(), cold.shape());
        Self { per_reservoir: [hot, cold] }
    }

    pub fn lead(&self, lead: Lead) -> &DMatrix<f64> {
        &self.per_reservoir[lead.index()]
    }

    pub fn total(&self) -> DMatrix<f64> {
        &self.per_reservoir[0] + &self.per_reservoir[1]
    }

    pub fn dim(&self) -> usize {
        self.per_reservoir[0].nrows()
    }

    /// Rate of `from -> to` contributed by one reservoir.
    pub fn rate(&self, lead: Lead, from: State, to: State) -> f64 {
        self.lead(lead)[(to.index(), from.index())]
    }
}

/// Fills the diagonal with negative column sums of the off-diagonal part.
pub fn set_diagonal(l: &mut DMatrix<f64>) {
    let n = l.ncols();
    for j in 0..n {
        l[(j, j)] = 0.0;
        let outflow: f64 = (0..n).filter(|&i| i != j).map(|i| l[(i, j)]).sum();
        l[(j, j)] = -outflow;
    }
}

pub fn build_generator(table: &TransitionTable, baths: &BathSetup) -> RateGenerator {
    let mut mats = [DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)];
    for lead in Lead::BOTH {
        let res = baths.reservoir(lead);
        let l = &mut mats[lead.index()];
        for t in table.iter() {
            let weight = match lead {
                Lead::Hot => t.weight_hot,
                Lead::Cold => t.weight_cold,
            };
            let (up, down) = rate_pair(res, weight, t.bohr_energy);
            l[(t.to.index(), t.from.index())] += up;
            l[(t.from.index(), t.to.index())] += down;
        }
        set_diagonal(l);
    }
    let [hot, cold] = mats;
    RateGenerator::new(hot, cold)
}

/// Closed communicating classes of the jump graph of `l`.
///
/// The stationary state is unique exactly when there is one closed class.
pub fn closed_classes(l: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = l.nrows();
    // reach[i][j]: j reachable from i
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
        for (j, r) in row.iter_mut().enumerate() {
            if i != j && l[(j, i)] > 0.0 {
                *r = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        class.iter().for_each(|&j| seen[j] = true);
        let closed = (0..n).all(|j| !reach[i][j] || class.contains(&j));
        if closed {
            classes.push(class);
        }
    }
    classes
}

fn scale(l: &DMatrix<f64>) -> f64 {
    l.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}

fn residual(l: &DMatrix<f64>, p: &DVector<f64>) -> f64 {
    (l * p).amax()
}

/// Row-replacement route: swap the last balance equation for `sum(p) = 1`.
pub fn stationary_by_solve(l: &DMatrix<f64>) -> Result<DVector<f64>, KineticsError> {
    let n = l.nrows();
    let mut a = l.clone();
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let lu = a.clone().lu();
    let mut p = lu
        .solve(&rhs)
        .ok_or_else(|| KineticsError::SolveFailure("bordered system is singular".into()))?;
    // one round of iterative refinement
    let r = &rhs - &a * &p;
    if let Some(dp) = lu.solve(&r) {
        p += dp;
    }
    Ok(p)
}

/// Grassmann–Taksar–Heyman state reduction.
///
/// Subtraction-free, so every population comes out with small relative
/// error even when it is many orders of magnitude below the others. Returns
/// `None` when a reduction step meets a state with no remaining exits, which
/// happens only for chains with transient states.
pub fn stationary_by_reduction(l: &DMatrix<f64>) -> Option<DVector<f64>> {
    reduce(&[l]).map(|p| Populations::from_extended(&p).to_vector())
}

/// Double-double quotient. `TwoFloat / TwoFloat` in twofloat 0.8 rounds the
/// reciprocal to a single word, so divide by the high word and correct once.
fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q = a / b.hi();
    let r = a - q * b;
    q + r / b.hi()
}

/// State reduction in double-double arithmetic on the sum of `parts`,
/// unnormalized.
fn reduce(parts: &[&DMatrix<f64>]) -> Option<Vec<TwoFloat>> {
    let n = parts[0].nrows();
    let zero = TwoFloat::from(0.0);
    // a[i][j]: rate i -> j
    let mut a = vec![vec![zero; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i != j {
                *x = parts.iter().fold(zero, |acc, l| acc + l[(j, i)]);
            }
        }
    }
    for k in (1..n).rev() {
        let exits = a[k][..k].iter().fold(zero, |acc, &x| acc + x);
        if !(exits > zero) {
            return None;
        }
        for row in a.iter_mut().take(k) {
            row[k] = div(row[k], exits);
        }
        for i in 0..k {
            let via = a[i][k];
            if via == zero {
                continue;
            }
            for j in 0..k {
                if i != j {
                    let step = via * a[k][j];
                    a[i][j] += step;
                }
            }
        }
    }
    let mut p = vec![zero; n];
    p[0] = TwoFloat::from(1.0);
    for k in 1..n {
        p[k] = (0..k).fold(zero, |acc, i| acc + p[i] * a[i][k]);
    }
    Some(p)
}

/// Kernel route: right singular vector of the smallest singular value.
pub fn stationary_by_kernel(l: &DMatrix<f64>) -> Result<DVector<f64>, KineticsError> {
    let svd = l.clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| KineticsError::SolveFailure("SVD did not produce V".into()))?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| KineticsError::SolveFailure("empty generator".into()))?;
    let v: DVector<f64> = v_t.row(k).transpose();
    let total = v.sum();
    if total.abs() < f64::EPSILON {
        return Err(KineticsError::SolveFailure("kernel vector has zero mass".into()));
    }
    Ok(v / total)
}

/// Ratio of the second-smallest to the largest singular value.
pub fn kernel_gap(l: &DMatrix<f64>) -> f64 {
    let mut s: Vec<f64> = l.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    if s.len() < 2 || s[0] == 0.0 {
        return 0.0;
    }
    s[s.len() - 2] / s[0]
}

/// Unique stationary distribution of a generator with any number of states.
pub fn stationary(l: &DMatrix<f64>) -> Result<Populations, KineticsError> {
    stationary_of_parts(l, &[l])
}

/// `l` is the total generator and `parts` the terms it was summed from.
fn stationary_of_parts(l: &DMatrix<f64>, parts: &[&DMatrix<f64>]) -> Result<Populations, KineticsError> {
    let classes = closed_classes(l);
    if classes.len() != 1 {
        return Err(KineticsError::ReducibleChain { classes });
    }
    let p = match reduce(parts) {
        Some(ext) => Populations::from_extended(&ext),
        None => {
            let raw = if kernel_gap(l) < RANK_RATIO {
                stationary_by_kernel(l)?
            } else {
                stationary_by_solve(l).or_else(|_| stationary_by_kernel(l))?
            };
            Populations::from_raw(raw.iter().copied().collect())?
        }
    };
    let res = residual(l, &p.to_vector());
    if res > STATIONARY_RESIDUAL * scale(l) {
        return Err(KineticsError::SolveFailure(format!("residual {res:e} exceeds tolerance")));
    }
    Ok(p)
}

pub fn steady_state(gen: &RateGenerator) -> Result<Populations, KineticsError> {
    stationary_of_parts(&gen.total(), &[gen.lead(Lead::Hot), gen.lead(Lead::Cold)])
}

// Dormand–Prince 5(4) tableau; the field is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct LinearField {
    n: usize,
    rows: Vec<f64>,
}

impl LinearField {
    fn new(l: &DMatrix<f64>) -> Self {
        let n = l.nrows();
        let rows = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| l[(i, j)]).collect();
        Self { n, rows }
    }

    fn apply(&self, y: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.rows.chunks_exact(self.n)) {
            *o = row.iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }
}

/// Integrates `dp/dt = L p` from `p0` over `[0, t]` with adaptive
/// Dormand–Prince stepping.
pub fn integrate(l: &DMatrix<f64>, p0: &Populations, t: f64) -> Result<Populations, KineticsError> {
    let n = l.nrows();
    if p0.len() != n {
        return Err(KineticsError::DimensionMismatch {
            expected: n,
            found: p0.len(),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(KineticsError::StepFailure {
            time: 0.0,
            reason: format!("invalid horizon {t}"),
        });
    }
    if t == 0.0 {
        return Ok(p0.clone());
    }
    let field = LinearField::new(l);
    let mut y = p0.as_slice().to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    let fastest = (0..n).map(|i| l[(i, i)].abs()).fold(0.0, f64::max);
    if fastest == 0.0 {
        return Ok(p0.clone());
    }
    let mut h = (0.01 / fastest).min(t);
    let mut time = 0.0;
    field.apply(&y, &mut k[0]);

    for _ in 0..MAX_STEPS {
        if time >= t {
            return Populations::from_raw(y);
        }
        h = h.min(t - time);
        for s in 1..7 {
            for (i, st) in stage.iter_mut().enumerate() {
                let incr: f64 = (0..s).map(|r| A[s][r] * k[r][i]).sum();
                *st = y[i] + h * incr;
            }
            field.apply(&stage, &mut k[s]);
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }
        let mut err = 0.0;
        for i in 0..n {
            let e: f64 = h * (0..7).map(|r| E[r] * k[r][i]).sum::<f64>();
            let sc = EVOLVE_ATOL + EVOLVE_RTOL * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            return Err(KineticsError::StepFailure {
                time,
                reason: "non-finite error estimate".into(),
            });
        }
        if err <= 1.0 {
            time += h;
            let total: f64 = y_new.iter().sum();
            let drift = (total - 1.0).abs();
            if drift > SIMPLEX_DRIFT_LIMIT {
                return Err(KineticsError::SimplexDrift { time, drift });
            }
            y.iter_mut().zip(&y_new).for_each(|(a, b)| *a = b / total);
            // first-same-as-last, up to the renormalization
            let last = k[6].clone();
            k[0].iter_mut().zip(last).for_each(|(a, b)| *a = b / total);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t.max(1.0) {
            return Err(KineticsError::StepFailure {
                time,
                reason: format!("step size underflow ({h:e})"),
            });
        }
    }
    Err(KineticsError::StepFailure {
        time,
        reason: format!("exceeded {MAX_STEPS} steps"),
    })
}

pub fn evolve(gen: &RateGenerator, p0: &Populations, t: f64) -> Result<Populations, KineticsError> {
    integrate(&gen.total(), p0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{diagonalize, transition_table, DqdParams};
    use proptest::prelude::*;

    fn reference_baths(voltage: f64) -> BathSetup {
        BathSetup::biased(0.5, 1.0, 1.0, voltage, 1.0, 1.0).unwrap()
    }

    fn reference_generator(voltage: f64) -> (TransitionTable, RateGenerator) {
        let eig = diagonalize(&DqdParams::new(6.0, 6.0, 0.1, 0.1).unwrap()).unwrap();
        let table = transition_table(&eig);
        let gen = build_generator(&table, &reference_baths(voltage));
        (table, gen)
    }

    #[test]
    fn double_double_quotient() {
        let third = div(TwoFloat::from(1.0), TwoFloat::from(3.0));
        assert!(f64::from(third * 3.0 - 1.0).abs() < 1e-30);
        let b = TwoFloat::new_add(0.7, 1e-18);
        let q = div(TwoFloat::new_add(0.2, 3e-19), b);
        assert!(f64::from(q * b - TwoFloat::new_add(0.2, 3e-19)).abs() < 1e-31);
    }

    #[test]
    fn columns_sum_to_zero() {
        let (_, gen) = reference_generator(2.5);
        for l in [gen.lead(Lead::Hot).clone(), gen.lead(Lead::Cold).clone(), gen.total()] {
            for j in 0..4 {
                assert!(l.column(j).sum().abs() < 1e-13);
                for i in 0..4 {
                    if i != j {
                        assert!(l[(i, j)] >= 0.0);
                    }
                }
            }
            // no 0<->2 and no -<->+ jumps
            for (i, j) in [(0, 3), (3, 0), (1, 2), (2, 1)] {
                assert_eq!(l[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn decoupled_cold_reservoir() {
        let eig = diagonalize(&DqdParams::new(6.0, 6.0, 0.1, 0.1).unwrap()).unwrap();
        let baths = BathSetup::biased(0.5, 1.0, 1.0, 2.5, 1.0, 0.0).unwrap();
        let gen = build_generator(&transition_table(&eig), &baths);
        assert!(gen.lead(Lead::Cold).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identical_reservoirs_share_generators() {
        let eig = diagonalize(&DqdParams::new(6.0, 6.0, 0.1, 0.1).unwrap()).unwrap();
        let baths = BathSetup::biased(0.7, 0.7, 1.0, 0.0, 1.0, 1.0).unwrap();
        let gen = build_generator(&transition_table(&eig), &baths);
        assert_eq!(gen.lead(Lead::Hot), gen.lead(Lead::Cold));
    }

    #[test]
    fn reducible_chain_reports_classes() {
        let mut l = DMatrix::zeros(4, 4);
        l[(1, 0)] = 1.0;
        l[(0, 1)] = 2.0;
        l[(3, 2)] = 1.0;
        l[(2, 3)] = 1.0;
        set_diagonal(&mut l);
        match stationary(&l) {
            Err(KineticsError::ReducibleChain { classes }) => assert_eq!(classes, vec![vec![0, 1], vec![2, 3]]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn absorbing_state_is_unique() {
        // 0 absorbs everything; transient states are allowed
        let mut l = DMatrix::zeros(3, 3);
        l[(0, 1)] = 1.0;
        l[(1, 2)] = 0.5;
        set_diagonal(&mut l);
        let p = stationary(&l).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn evolve_identity_and_fixed_point() {
        let (_, gen) = reference_generator(2.5);
        let p0 = Populations::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(evolve(&gen, &p0, 0.0).unwrap(), p0);
        let ss = steady_state(&gen).unwrap();
        for t in [0.5, 10.0, 1e3] {
            let p = evolve(&gen, &ss, t).unwrap();
            assert!(p.l1_distance(&ss) < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn transient_matches_reference_point() {
        let (_, gen) = reference_generator(2.5);
        let ss = steady_state(&gen).unwrap();
        let p = evolve(&gen, &Populations::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap(), 1e5).unwrap();
        assert!(p.l1_distance(&ss) < 1e-8, "{}", p.l1_distance(&ss));
    }

    #[test]
    fn evolve_rejects_bad_inputs() {
        let (_, gen) = reference_generator(1.0);
        assert!(evolve(&gen, &Populations::uniform(4), -1.0).is_err());
        assert!(matches!(
            evolve(&gen, &Populations::uniform(3), 1.0),
            Err(KineticsError::DimensionMismatch { .. })
        ));
        assert!(Populations::new(vec![0.5, 0.6]).is_err());
        assert!(Populations::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn two_state_relaxation_matches_exponential() {
        // p1(t) = k/(k+g) (1 - exp(-(k+g) t)) starting from state 0
        let (k_up, g_down) = (0.3, 0.7);
        let mut l = DMatrix::zeros(2, 2);
        l[(1, 0)] = k_up;
        l[(0, 1)] = g_down;
        set_diagonal(&mut l);
        let p0 = Populations::new(vec![1.0, 0.0]).unwrap();
        for t in [0.1, 1.0, 3.7] {
            let p = integrate(&l, &p0, t).unwrap();
            let exact = k_up / (k_up + g_down) * (1.0 - (-(k_up + g_down) * t).exp());
            assert!((p.as_slice()[1] - exact).abs() < 1e-10, "t = {t}");
        }
    }

    fn random_generator(n: usize, rates: &[f64]) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(n, n);
        let mut it = rates.iter();
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    l[(i, j)] = *it.next().unwrap();
                }
            }
        }
        set_diagonal(&mut l);
        l
    }

    proptest! {
        #[test]
        fn solve_and_kernel_agree_on_random_chains(rates in proptest::collection::vec(0.01..3.0f64, 20)) {
            let l = random_generator(5, &rates);
            let a = stationary_by_solve(&l).unwrap();
            let b = stationary_by_kernel(&l).unwrap();
            let c = stationary_by_reduction(&l).unwrap();
            prop_assert!((&a - b).abs().sum() < 1e-10);
            prop_assert!((a - c).abs().sum() < 1e-12);
            let p = stationary(&l).unwrap();
            prop_assert!(p.as_slice().iter().all(|&x| x >= 0.0));
            prop_assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(residual(&l, &p.to_vector()) < 1e-12);
        }

        #[test]
        fn integration_conserves_mass(rates in proptest::collection::vec(0.01..3.0f64, 12), t in 0.0..20.0f64) {
            let l = random_generator(4, &rates);
            let p = integrate(&l, &Populations::new(vec![0.25, 0.25, 0.5, 0.0]).unwrap(), t).unwrap();
            prop_assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn single_reservoir_detailed_balance(beta in 0.1..2.0f64, mu in -2.0..4.0f64, eps in 1.0..12.0f64,
                                             delta in -2.0..2.0f64, t in 0.01..1.0f64, u in 0.01..1.0f64) {
            let eig = diagonalize(&DqdParams::from_mean(eps, delta, t, u).unwrap()).unwrap();
            let table = transition_table(&eig);
            let baths = BathSetup::biased(beta, 1.0, mu, 0.0, 1.0, 0.0).unwrap();
            let gen = build_generator(&table, &baths);
            let p = steady_state(&gen).unwrap();
            for tr in table.iter() {
                let forward = gen.rate(Lead::Hot, tr.from, tr.to) * p.get(tr.from);
                let backward = gen.rate(Lead::Hot, tr.to, tr.from) * p.get(tr.to);
                prop_assert!((forward - backward).abs() <= 1e-12 * forward.max(backward).max(1e-300), "{} {} {:?}", forward, backward, p);
            }
        }
    }
}
