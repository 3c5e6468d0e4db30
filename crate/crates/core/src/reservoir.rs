// SPDX-License-Identifier: Apache-2.0

//! Fermionic reservoirs in the wide-band limit.
//!
//! Inverse temperatures are in 1/meV and chemical potentials in meV. The bias
//! `V` is in mV, so with unit charge `eV` is numerically meV. Rates are in
//! units of the bare coupling `Gamma`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Exponent magnitude beyond which the Fermi function saturates to 0 or 1.
pub const FERMI_SATURATION: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReservoirError {
    #[error("invalid {name} = {value} for the {lead} reservoir: {reason}")]
    InvalidParameter {
        lead: Lead,
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("both reservoirs are labelled {0}")]
    DuplicateLabel(Lead),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Lead {
    Hot,
    Cold,
}

impl Lead {
    pub const BOTH: [Lead; 2] = [Lead::Hot, Lead::Cold];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Lead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lead::Hot => "H",
            Lead::Cold => "C",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReservoirParams {
    pub beta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub lead: Lead,
}

impl ReservoirParams {
    pub fn new(lead: Lead, beta: f64, mu: f64, gamma: f64) -> Result<Self, ReservoirError> {
        let invalid = |name, value, reason| ReservoirError::InvalidParameter {
            lead,
            name,
            value,
            reason,
        };
        if beta.is_nan() || beta <= 0.0 {
            return Err(invalid("beta", beta, "must be positive"));
        }
        if !mu.is_finite() {
            return Err(invalid("mu", mu, "must be finite"));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(invalid("gamma", gamma, "must be finite and non-negative"));
        }
        Ok(Self { beta, mu, gamma, lead })
    }

    pub fn occupancy(&self, energy: f64) -> f64 {
        fermi(self.beta, self.mu, energy)
    }
}

/// The hot and cold reservoirs seen by the machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathSetup {
    pub hot: ReservoirParams,
    pub cold: ReservoirParams,
}

impl BathSetup {
    pub fn new(hot: ReservoirParams, cold: ReservoirParams) -> Result<Self, ReservoirError> {
        if hot.lead == cold.lead {
            return Err(ReservoirError::DuplicateLabel(hot.lead));
        }
        // accept the pair in either order
        let (hot, cold) = if hot.lead == Lead::Hot { (hot, cold) } else { (cold, hot) };
        Ok(Self { hot, cold })
    }

    /// Sweep construction: `mu_C = mu_H + V`.
    pub fn biased(
        beta_hot: f64,
        beta_cold: f64,
        mu_hot: f64,
        voltage: f64,
        gamma_hot: f64,
        gamma_cold: f64,
    ) -> Result<Self, ReservoirError> {
        Self::new(
            ReservoirParams::new(Lead::Hot, beta_hot, mu_hot, gamma_hot)?,
            ReservoirParams::new(Lead::Cold, beta_cold, mu_hot + voltage, gamma_cold)?,
        )
    }

    pub fn reservoir(&self, lead: Lead) -> &ReservoirParams {
        match lead {
            Lead::Hot => &self.hot,
            Lead::Cold => &self.cold,
        }
    }

    /// `mu_C - mu_H`.
    pub fn voltage(&self) -> f64 {
        self.cold.mu - self.hot.mu
    }
}

/// Fermi–Dirac occupancy `1 / (1 + exp(beta (energy - mu)))`.
pub fn fermi(beta: f64, mu: f64, energy: f64) -> f64 {
    let detuning = energy - mu;
    if detuning == 0.0 {
        return 0.5;
    }
    let x = beta * detuning;
    if x > FERMI_SATURATION {
        0.0
    } else if x < -FERMI_SATURATION {
        1.0
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Golden-rule rates for one channel of one reservoir.
///
/// Returns `(up, down)`: `up` absorbs an electron from the reservoir and
/// climbs the transition, `down` emits one back. The two occupancies are
/// evaluated separately so that detailed balance survives deep in the tails.
pub fn rate_pair(res: &ReservoirParams, weight: f64, bohr_energy: f64) -> (f64, f64) {
    debug_assert!((0.0..=1.0 + 1e-12).contains(&weight), "weight {weight}");
    let bare = res.gamma * weight;
    if bare == 0.0 {
        return (0.0, 0.0);
    }
    let filled = fermi(res.beta, res.mu, bohr_energy);
    // 1 - f(E) = f evaluated at the mirrored detuning
    let empty = fermi(res.beta, -res.mu, -bohr_energy);
    (bare * filled, bare * empty)
}
