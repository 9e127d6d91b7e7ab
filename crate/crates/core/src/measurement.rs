//! Measurement as phase randomization.
//!
//! Measuring the population of level `m` leaves `|a_m|²` untouched but
//! replaces its phase by a fresh uniform draw, `a_m ← e^{iβ_m} a_m`. The draws
//! are uncorrelated across levels and across measurement events, which is
//! what separates them from the time-independent pseudo-random free phases
//! of the spectrum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kick_engine::{BasisWindow, QuantumState};
use crate::{Error, Real, Result};

/// Uniform phase on `[0, 2π)`.
#[inline]
pub fn draw_phase<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(std::f64::consts::TAU * rng.gen::<f64>()).wrap_angle()
}

/// Which levels a measurement event probes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasurementMode {
    None,
    /// Listed levels only, kept sorted and deduplicated.
    Subset(Vec<i64>),
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSchedule {
    mode: MeasurementMode,
    period: u64,
}

impl MeasurementSchedule {
    pub fn new(mode: MeasurementMode, period: u64) -> Result<Self> {
        if period == 0 {
            return Err(Error::invalid("measurement period must be at least 1"));
        }
        let mode = match mode {
            MeasurementMode::Subset(mut levels) => {
                if levels.is_empty() {
                    return Err(Error::invalid("subset measurement needs at least one level"));
                }
                levels.sort_unstable();
                levels.dedup();
                MeasurementMode::Subset(levels)
            }
            other => other,
        };
        Ok(Self { mode, period })
    }

    pub fn none() -> Self {
        Self {
            mode: MeasurementMode::None,
            period: 1,
        }
    }

    pub fn all(period: u64) -> Result<Self> {
        Self::new(MeasurementMode::All, period)
    }

    pub fn mode(&self) -> &MeasurementMode {
        &self.mode
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// True iff a measurement is due after kick `j` (`j ≥ 1`).
    pub fn should_measure(&self, j: u64) -> bool {
        !matches!(self.mode, MeasurementMode::None) && j > 0 && j.is_multiple_of(self.period)
    }

    /// Checks that every subset level lies inside `window`.
    pub fn validate_for(&self, window: &BasisWindow) -> Result<()> {
        if let MeasurementMode::Subset(levels) = &self.mode {
            if let Some(m) = levels.iter().find(|&&m| !window.contains(m)) {
                return Err(Error::invalid(format!(
                    "measured level {m} outside window [{}, {}]",
                    window.m_min(),
                    window.m_max()
                )));
            }
        }
        Ok(())
    }
}

/// Source of measurement phases for one realization.
#[derive(Debug, Clone)]
pub struct PhaseRandomizer {
    master_seed: u64,
    rng: ChaCha8Rng,
}

impl PhaseRandomizer {
    pub fn new(master_seed: u64) -> Self {
        Self::for_realization(master_seed, 0)
    }

    /// Independent substream `realization` of `master_seed`.
    pub fn for_realization(master_seed: u64, realization: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(realization);
        Self { master_seed, rng }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn draw<T: Real>(&mut self) -> T {
        draw_phase(&mut self.rng)
    }
}

/// Applies one measurement event to `state`: every measured level gets a
/// fresh phase, drawn in ascending `m`. Unmeasured amplitudes and all
/// occupations are left bit-for-bit unchanged.
pub fn apply_measurement<T: Real>(
    state: &mut QuantumState<T>,
    schedule: &MeasurementSchedule,
    rng: &mut PhaseRandomizer,
) -> Result<()> {
    match &schedule.mode {
        MeasurementMode::None => {}
        MeasurementMode::All => {
            for i in 0..state.window().len() {
                let beta = rng.draw::<T>();
                state.add_phase_at(i, beta);
            }
        }
        MeasurementMode::Subset(levels) => {
            schedule.validate_for(state.window())?;
            for &m in levels {
                let i = state.window().offset(m).expect("validated above");
                let beta = rng.draw::<T>();
                state.add_phase_at(i, beta);
            }
        }
    }
    Ok(())
}
