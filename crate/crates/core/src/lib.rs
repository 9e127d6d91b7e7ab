//! Simulation of the quantum Zeno effect in a driven two-level system and of
//! its opposite in kicked multilevel systems: repeated measurement, modelled
//! as randomization of amplitude phases, destroys dynamical localization and
//! restores classical-like diffusion.
//!
//! The numerical modules are generic over the scalar type ([`Real`], i.e.
//! `f32` or `f64`); the aliases below fix the common `f64` instantiation,
//! which is what the [`runner`] uses.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
mod error;
pub mod kick_engine;
pub mod measurement;
pub mod observables;
pub mod runner;
mod scalar;
pub mod two_level;

pub use error::{Edge, Error, Result};
pub use scalar::Real;

pub use classical::{ClassicalEnsemble, ClassicalParticle, DiffusionEstimate, CHAOS_THRESHOLD};
pub use kick_engine::{BasisWindow, FloquetMap, KickKernel, QuantumState, SpectrumKind, SpectrumModel};
pub use measurement::{MeasurementMode, MeasurementSchedule, PhaseRandomizer};
pub use observables::ProfileAccumulator;
pub use observables::{BreakTime, DispersionEntry, DispersionSeries, LocalizationFit, OccupationProfile};
pub use two_level::{MonteCarloEstimate, ProbabilityPair, RabiParams, TwoLevelState};

/// Version tag stamped into run records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type TwoLevelState64 = TwoLevelState<f64>;
pub type ProbabilityPair64 = ProbabilityPair<f64>;
pub type QuantumState64 = QuantumState<f64>;
pub type QuantumState32 = QuantumState<f32>;
pub type KickKernel64 = KickKernel<f64>;
pub type SpectrumModel64 = SpectrumModel<f64>;
pub type FloquetMap64 = FloquetMap<f64>;
pub type DispersionSeries64 = DispersionSeries<f64>;
pub type OccupationProfile64 = OccupationProfile<f64>;
pub type ClassicalEnsemble64 = ClassicalEnsemble<f64>;
