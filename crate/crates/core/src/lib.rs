//! Single-photon absorption by a three-level Λ atom in a one-sided optical
//! cavity.
//!
//! Given a finite-support photon waveform, [`synthesis`] derives the unique
//! control pulse that keeps the cavity impedance matched (no reflected field)
//! and [`dynamics`] integrates the coupled equations of motion to check it.
//! [`experiments`] bundles the standard scenarios: absorption cases, ρ₀ and
//! cooperativity sweeps, and time-bin qubit mapping.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod shapes;
mod spline;
pub mod synthesis;
pub mod table;

pub use dynamics::{
    empty_cavity_response, excitation_ledger, reflection_probability, ringdown_grid, simulate,
    EmptyCavityResponse, IncomingField, InitialState, NoInput, Scaled,
};
pub use error::{Error, Result};
pub use experiments::{
    run_absorption_cases, sweep_cooperativity, sweep_rho0, timebin_map, AbsorptionCases,
    MappingReport, TimeBinQubit,
};
pub use model::{
    cooperativity, AbsorptionReport, CavityParams, ControlPulse, StateTrajectory, TimeGrid,
    DEFAULT_RHO0, DEFAULT_STEPS,
};
pub use shapes::{from_samples, make_sin2, make_twin_peak, PhotonWaveform, ShapeKind, ShapeSpec};
pub use synthesis::{synthesize_control, synthesize_with, SynthesisOptions};
