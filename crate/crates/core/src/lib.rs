// SPDX-License-Identifier: Apache-2.0

//! Steady-state thermodynamics of a double quantum dot between a hot and a
//! cold fermionic reservoir.
//!
//! The pipeline runs [`model::diagonalize`] → [`model::transition_table`] →
//! [`kinetics::build_generator`] → [`kinetics::steady_state`] →
//! [`thermo::currents`] → [`thermo::performance`]; [`evaluate`] chains it
//! for one parameter point. [`sweep`] drives voltage and level sweeps and
//! writes the results.
//!
//! Units: energies in meV, bias in mV, inverse temperatures in 1/meV and
//! rates in units of the bare coupling `Gamma` (`hbar = k_B = e = 1`).

pub mod kinetics;
pub mod model;
pub mod reservoir;
pub mod sweep;
pub mod thermo;

use thiserror::Error;

use kinetics::{KineticsError, Populations, RateGenerator};
use model::{DqdParams, EigenSystem, ModelError, TransitionTable};
use reservoir::{BathSetup, ReservoirError};
use thermo::{CurrentSet, Performance, ThermoError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Reservoir(#[from] ReservoirError),
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub eigen: EigenSystem,
    pub table: TransitionTable,
    pub generator: RateGenerator,
    pub populations: Populations,
    pub currents: CurrentSet,
    pub performance: Performance,
}

pub fn evaluate(model: &DqdParams, baths: &BathSetup) -> Result<PointReport, Error> {
    let eigen = model::diagonalize(model)?;
    let table = model::transition_table(&eigen);
    let generator = kinetics::build_generator(&table, baths);
    let populations = kinetics::steady_state(&generator)?;
    let currents = thermo::currents(&table, &generator, &populations, baths)?;
    let sigma = thermo::entropy_production(&currents, baths)?;
    let sigma_map = thermo::entropy_by_transition(&table, &generator, &populations);
    let performance = thermo::performance(&currents, baths, sigma, sigma_map);
    Ok(PointReport {
        eigen,
        table,
        generator,
        populations,
        currents,
        performance,
    })
}
