// SPDX-License-Identifier: Apache-2.0

//! Steady-state currents, entropy production and machine performance.
//!
//! Currents are positive when flowing from a reservoir into the dot. The
//! heat current of reservoir `v` is `J_v = I_E,v - mu_v I_M,v`, and the work
//! delivered to the load is `J_H + J_C = (mu_C - mu_H) I_M,H`.

use serde::Serialize;
use thiserror::Error;
use twofloat::TwoFloat;

use crate::kinetics::{Populations, RateGenerator};
use crate::model::{State, TransitionTable};
use crate::reservoir::{BathSetup, Lead};

/// Currents with magnitude below this are treated as zero when classifying.
pub const DEAD_BAND: f64 = 1e-13;
/// Stationarity residual accepted by [`currents`].
pub const CURRENT_RESIDUAL: f64 = 1e-10;
/// `|I_E,H|` below which the coupling parameter is reported as absent.
pub const ZETA_CUTOFF: f64 = 1e-14;
/// Relative agreement required between the two entropy-production forms.
pub const FORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("populations are not stationary (residual {residual:e})")]
    NotStationary { residual: f64 },
    #[error("entropy production forms disagree: {heat_form:e} vs {flux_form:e}")]
    FormMismatch { heat_form: f64, flux_form: f64 },
    #[error("criterion function undefined for equal temperatures")]
    EqualTemperatures,
}

/// Energy, matter and heat currents per reservoir, indexed by [`Lead`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentSet {
    pub energy: [f64; 2],
    pub matter: [f64; 2],
    pub heat: [f64; 2],
}

impl CurrentSet {
    pub fn i_energy(&self, lead: Lead) -> f64 {
        self.energy[lead.index()]
    }

    pub fn i_matter(&self, lead: Lead) -> f64 {
        self.matter[lead.index()]
    }

    pub fn j_heat(&self, lead: Lead) -> f64 {
        self.heat[lead.index()]
    }

    /// Output power `J_H + J_C`.
    pub fn work(&self) -> f64 {
        self.heat[0] + self.heat[1]
    }

    pub fn energy_imbalance(&self) -> f64 {
        self.energy[0] + self.energy[1]
    }

    pub fn matter_imbalance(&self) -> f64 {
        self.matter[0] + self.matter[1]
    }
}

/// Gross fluxes `from -> to` and `to -> from` through one channel of one reservoir.
fn channel_fluxes(gen: &RateGenerator, p: &Populations, lead: Lead, from: State, to: State) -> (TwoFloat, TwoFloat) {
    (
        p.extended(from) * gen.rate(lead, from, to),
        p.extended(to) * gen.rate(lead, to, from),
    )
}

pub fn currents(
    table: &TransitionTable,
    gen: &RateGenerator,
    p: &Populations,
    baths: &BathSetup,
) -> Result<CurrentSet, ThermoError> {
    let total = gen.total();
    let residual = (&total * p.to_vector()).amax();
    if !(residual < CURRENT_RESIDUAL) {
        return Err(ThermoError::NotStationary { residual });
    }
    let mut cur = CurrentSet {
        energy: [0.0; 2],
        matter: [0.0; 2],
        heat: [0.0; 2],
    };
    for lead in Lead::BOTH {
        let k = lead.index();
        let (mut matter, mut energy) = (TwoFloat::from(0.0), TwoFloat::from(0.0));
        for t in table.iter() {
            let (forward, backward) = channel_fluxes(gen, p, lead, t.from, t.to);
            let flux = forward - backward;
            matter += flux;
            energy += flux * t.bohr_energy;
        }
        let heat = energy - matter * baths.reservoir(lead).mu;
        cur.matter[k] = matter.hi();
        cur.energy[k] = energy.hi();
        cur.heat[k] = heat.hi();
    }
    Ok(cur)
}

/// Entropy production rate `-beta_H J_H - beta_C J_C` (k_B = 1).
///
/// The flux form `(beta_C - beta_H) I_E,H + (beta_H mu_H - beta_C mu_C) I_M,H`
/// is evaluated alongside; it relies on current conservation, so a
/// disagreement flags inconsistent currents.
pub fn entropy_production(cur: &CurrentSet, baths: &BathSetup) -> Result<f64, ThermoError> {
    let (h, c) = (&baths.hot, &baths.cold);
    let heat_form = -h.beta * cur.j_heat(Lead::Hot) - c.beta * cur.j_heat(Lead::Cold);
    let flux_form = (c.beta - h.beta) * cur.i_energy(Lead::Hot) + (h.beta * h.mu - c.beta * c.mu) * cur.i_matter(Lead::Hot);
    let gamma = h.gamma.max(c.gamma);
    let floor = gamma * 1e-6;
    if (heat_form - flux_form).abs() > FORM_TOLERANCE * heat_form.abs().max(floor) {
        return Err(ThermoError::FormMismatch { heat_form, flux_form });
    }
    Ok(heat_form)
}

/// Contribution of one channel and one reservoir to the entropy production.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionEntropy {
    pub from: State,
    pub to: State,
    pub lead: Lead,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EntropyMap {
    pub entries: Vec<TransitionEntropy>,
}

impl EntropyMap {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.value).sum()
    }

    pub fn get(&self, from: State, to: State, lead: Lead) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.from == from && e.to == to && e.lead == lead)
            .map(|e| e.value)
    }

    /// Contributions summed over both reservoirs, in table order.
    pub fn by_channel(&self) -> Vec<((State, State), f64)> {
        let mut out: Vec<((State, State), f64)> = Vec::new();
        for e in &self.entries {
            match out.iter_mut().find(|(k, _)| *k == (e.from, e.to)) {
                Some((_, v)) => *v += e.value,
                None => out.push(((e.from, e.to), e.value)),
            }
        }
        out
    }
}

/// `(x - y) ln(x / y)` with `0 ln(0/0) = 0`.
fn edge_entropy(x: impl Into<TwoFloat>, y: impl Into<TwoFloat>) -> f64 {
    let (x, y) = (x.into(), y.into());
    if x == y {
        return 0.0;
    }
    let zero = TwoFloat::from(0.0);
    if x == zero || y == zero {
        return f64::INFINITY;
    }
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    let gap = (hi - lo).hi();
    gap * (gap / lo.hi()).ln_1p()
}

/// Per-edge, per-reservoir decomposition of the entropy production.
pub fn entropy_by_transition(table: &TransitionTable, gen: &RateGenerator, p: &Populations) -> EntropyMap {
    let mut entries = Vec::with_capacity(8);
    for t in table.iter() {
        for lead in Lead::BOTH {
            let (forward, backward) = channel_fluxes(gen, p, lead, t.from, t.to);
            entries.push(TransitionEntropy {
                from: t.from,
                to: t.to,
                lead,
                value: edge_entropy(forward, backward),
            });
        }
    }
    EntropyMap { entries }
}

/// Criterion function `(beta_C mu_C - beta_H mu_H) / (beta_C - beta_H)`.
pub fn theta(baths: &BathSetup) -> Result<f64, ThermoError> {
    let (h, c) = (&baths.hot, &baths.cold);
    if c.beta == h.beta {
        return Err(ThermoError::EqualTemperatures);
    }
    Ok((c.beta * c.mu - h.beta * h.mu) / (c.beta - h.beta))
}

/// `1 - beta_H / beta_C`.
pub fn carnot_efficiency(baths: &BathSetup) -> f64 {
    1.0 - baths.hot.beta / baths.cold.beta
}

/// `beta_H / (beta_C - beta_H)`; absent at equal temperatures.
pub fn carnot_cop(baths: &BathSetup) -> Option<f64> {
    let d = baths.cold.beta - baths.hot.beta;
    (d != 0.0).then(|| baths.hot.beta / d)
}

/// Efficiency from the energy-to-matter current ratio.
pub fn efficiency_from_ratio(cur: &CurrentSet, baths: &BathSetup) -> f64 {
    let ratio = cur.i_energy(Lead::Hot) / cur.i_matter(Lead::Hot);
    baths.voltage() / (ratio - baths.hot.mu)
}

/// Coefficient of performance from the energy-to-matter current ratio.
pub fn cop_from_ratio(cur: &CurrentSet, baths: &BathSetup) -> f64 {
    let ratio = cur.i_energy(Lead::Hot) / cur.i_matter(Lead::Hot);
    (ratio - baths.cold.mu) / baths.voltage()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Engine,
    Refrigerator,
    Dud,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::Engine => "engine",
            Regime::Refrigerator => "refrigerator",
            Regime::Dud => "dud",
        }
    }
}

fn positive(x: f64) -> bool {
    x > DEAD_BAND
}

fn negative(x: f64) -> bool {
    x < -DEAD_BAND
}

pub fn classify(cur: &CurrentSet) -> Regime {
    let im = cur.i_matter(Lead::Hot);
    let work = cur.work();
    if positive(im) && positive(cur.j_heat(Lead::Hot)) && positive(work) {
        Regime::Engine
    } else if negative(im) && positive(cur.j_heat(Lead::Cold)) && negative(work) {
        Regime::Refrigerator
    } else {
        Regime::Dud
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Performance {
    pub sigma: f64,
    pub sigma_by_transition: EntropyMap,
    /// `(J_H + J_C) / J_H`, engine regime only.
    pub eta: Option<f64>,
    /// Heat drawn from the cold side per unit input work, refrigerator regime only.
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    /// `Theta I_M,H / I_E,H`.
    pub zeta: Option<f64>,
    pub regime: Regime,
    pub carnot_eta: f64,
    pub carnot_phi: Option<f64>,
}

impl Performance {
    pub fn eta_normalized(&self) -> Option<f64> {
        self.eta.map(|e| e / self.carnot_eta)
    }

    pub fn phi_normalized(&self) -> Option<f64> {
        self.phi.zip(self.carnot_phi).map(|(p, c)| p / c)
    }
}

/// Assembles the performance figures for one steady state.
///
/// The input work in refrigerator mode is `-(J_H + J_C)`, so the COP is
/// `J_C / (-(J_H + J_C))`, which is positive whenever the machine cools.
pub fn performance(cur: &CurrentSet, baths: &BathSetup, sigma: f64, sigma_map: EntropyMap) -> Performance {
    let regime = classify(cur);
    let work = cur.work();
    let eta = (regime == Regime::Engine).then(|| work / cur.j_heat(Lead::Hot));
    let phi = (regime == Regime::Refrigerator).then(|| -cur.j_heat(Lead::Cold) / work);
    let theta = theta(baths).ok();
    let ie = cur.i_energy(Lead::Hot);
    let zeta = theta.filter(|_| ie.abs() >= ZETA_CUTOFF).map(|t| t * cur.i_matter(Lead::Hot) / ie);
    Performance {
        sigma,
        sigma_by_transition: sigma_map,
        eta,
        phi,
        theta,
        zeta,
        regime,
        carnot_eta: carnot_efficiency(baths),
        carnot_phi: carnot_cop(baths),
    }
}
