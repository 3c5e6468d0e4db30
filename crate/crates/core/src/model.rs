// SPDX-License-Identifier: Apache-2.0

//! Double-quantum-dot Hamiltonian: closed-form spectrum and the lead
//! transition graph.
//!
//! The dot holds at most one spinless electron per site. The eigenbasis is
//! `|v0> = |00>`, the bonding/antibonding pair `|v->`, `|v+>` in the
//! one-electron sector and `|v2> = |11>`. The hot lead tunnels into the left
//! dot and the cold lead into the right dot, so every lead-induced jump
//! changes the particle number by exactly one.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Below this level splitting (meV) the one-electron sector is degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("degenerate one-electron sector (sqrt(delta^2 + T^2) = {splitting:e} meV); secular rates are invalid")]
    DegenerateSpectrum { splitting: f64 },
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// Site energies, inter-dot tunnelling and Coulomb repulsion, all in meV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DqdParams {
    pub eps_left: f64,
    pub eps_right: f64,
    pub tunnel: f64,
    pub coulomb: f64,
}

impl DqdParams {
    pub fn new(eps_left: f64, eps_right: f64, tunnel: f64, coulomb: f64) -> Result<Self, ModelError> {
        let params = Self {
            eps_left,
            eps_right,
            tunnel,
            coulomb,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds the parameters from the mean level `eps` and half-detuning
    /// `delta`, so that `eps_left = eps - delta` and `eps_right = eps + delta`.
    pub fn from_mean(eps: f64, delta: f64, tunnel: f64, coulomb: f64) -> Result<Self, ModelError> {
        Self::new(eps - delta, eps + delta, tunnel, coulomb)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("eps_left", self.eps_left),
            ("eps_right", self.eps_right),
            ("tunnel", self.tunnel),
            ("coulomb", self.coulomb),
        ] {
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        if self.tunnel < 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "tunnel",
                value: self.tunnel,
                reason: "must be non-negative",
            });
        }
        if self.coulomb < 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "coulomb",
                value: self.coulomb,
                reason: "must be non-negative",
            });
        }
        let splitting = self.splitting();
        if splitting < DEGENERACY_THRESHOLD {
            return Err(ModelError::DegenerateSpectrum { splitting });
        }
        Ok(())
    }

    /// Half-detuning `(eps_R - eps_L) / 2`.
    pub fn delta(&self) -> f64 {
        0.5 * (self.eps_right - self.eps_left)
    }

    /// Mean level `(eps_R + eps_L) / 2`.
    pub fn mean_level(&self) -> f64 {
        0.5 * (self.eps_right + self.eps_left)
    }

    /// `sqrt(delta^2 + T^2)`, half the bonding/antibonding gap.
    pub fn splitting(&self) -> f64 {
        self.delta().hypot(self.tunnel)
    }
}

/// The four many-body eigenstates in ascending energy order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum State {
    Empty,
    Minus,
    Plus,
    Double,
}

impl State {
    pub const ALL: [State; 4] = [State::Empty, State::Minus, State::Plus, State::Double];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn particle_number(self) -> u8 {
        match self {
            State::Empty => 0,
            State::Minus | State::Plus => 1,
            State::Double => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            State::Empty => "0",
            State::Minus => "-",
            State::Plus => "+",
            State::Double => "2",
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Spectrum and one-electron eigenvectors.
///
/// `amp_minus = (a-, b-)` are the real amplitudes of `|10>` and `|01>` in
/// `|v->`; `amp_plus` likewise for `|v+>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenSystem {
    pub energies: [f64; 4],
    pub amp_minus: (f64, f64),
    pub amp_plus: (f64, f64),
}

impl EigenSystem {
    pub const PARTICLE_NUMBERS: [u8; 4] = [0, 1, 1, 2];

    pub fn energy(&self, state: State) -> f64 {
        self.energies[state.index()]
    }

    pub fn particle_numbers(&self) -> [u8; 4] {
        Self::PARTICLE_NUMBERS
    }
}

fn normalized(v: (f64, f64)) -> (f64, f64) {
    let norm = v.0.hypot(v.1);
    (v.0 / norm, v.1 / norm)
}

/// Diagonalizes the DQD Hamiltonian in closed form.
///
/// The eigenvectors are proportional to `[-(delta -/+ s), T]` on
/// `(|10>, |01>)`, with `s = sqrt(delta^2 + T^2)`. Each is evaluated in the
/// positively rescaled form that avoids cancellation, so the localized
/// limit `T -> 0` stays well defined for either sign of `delta`.
pub fn diagonalize(params: &DqdParams) -> Result<EigenSystem, ModelError> {
    params.validate()?;
    let delta = params.delta();
    let t = params.tunnel;
    let s = params.splitting();
    let eps = params.mean_level();

    // [-(delta + s), T] ~ [-T, s - delta]
    let minus = if delta >= 0.0 {
        (-(delta + s), t)
    } else {
        (-t, s - delta)
    };
    // [s - delta, T] ~ [T, s + delta]
    let plus = if delta <= 0.0 { (s - delta, t) } else { (t, s + delta) };

    Ok(EigenSystem {
        energies: [0.0, eps - s, eps + s, 2.0 * eps + params.coulomb],
        amp_minus: normalized(minus),
        amp_plus: normalized(plus),
    })
}

/// One lead-induced jump `from -> to` that adds an electron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    pub from: State,
    pub to: State,
    /// `E_to - E_from`, the energy carried by the exchanged electron.
    pub bohr_energy: f64,
    pub particle_change: i8,
    /// Squared matrix element of `d_L^dagger` (hot lead).
    pub weight_hot: f64,
    /// Squared matrix element of `d_R^dagger` (cold lead).
    pub weight_cold: f64,
}

impl Transition {
    pub fn label(&self) -> String {
        format!("{}->{}", self.from, self.to)
    }
}

/// The four allowed jumps `0->-`, `0->+`, `-->2`, `+->2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionTable {
    pub entries: [Transition; 4],
}

impl TransitionTable {
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.entries.iter()
    }

    pub fn find(&self, from: State, to: State) -> Option<&Transition> {
        self.entries.iter().find(|t| t.from == from && t.to == to)
    }
}

pub fn transition_table(eig: &EigenSystem) -> TransitionTable {
    let (am, bm) = eig.amp_minus;
    let (ap, bp) = eig.amp_plus;
    let e = eig.energies;
    let entry = |from: State, to: State, weight_hot: f64, weight_cold: f64| Transition {
        from,
        to,
        bohr_energy: e[to.index()] - e[from.index()],
        particle_change: 1,
        weight_hot,
        weight_cold,
    };
    TransitionTable {
        entries: [
            entry(State::Empty, State::Minus, am * am, bm * bm),
            entry(State::Empty, State::Plus, ap * ap, bp * bp),
            entry(State::Minus, State::Double, bm * bm, am * am),
            entry(State::Plus, State::Double, bp * bp, ap * ap),
        ],
    }
}
