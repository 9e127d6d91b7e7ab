use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BasisWindow;
use crate::{Error, Real, Result};

/// Level spectrum `H₀(m)` of the unperturbed system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumKind<T> {
    /// Rotator, `H₀ = m²/2`.
    Rotator,
    /// Linear oscillator, `H₀ = ω m`.
    Linear { omega: T },
    /// Free phases `2π g_m` with `g_m` i.i.d. uniform on `[0, 1)`, fixed in time.
    RandomLevels { seed: u64 },
}

/// Free-flight phases `H₀(m)·τ mod 2π` tabulated over a basis window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel<T> {
    kind: SpectrumKind<T>,
    tau: T,
    window: BasisWindow,
    phases: Vec<T>,
}

impl<T: Real> SpectrumModel<T> {
    /// Tabulates the phases. Random levels draw `g_m` from ChaCha8 seeded with
    /// `seed`, one draw per basis index in ascending `m`.
    pub fn new(kind: SpectrumKind<T>, tau: T, window: BasisWindow) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::invalid(format!("kick period must be positive, got {tau}")));
        }
        let tau64 = tau.to_f64().unwrap();
        let two_pi = std::f64::consts::TAU;
        // Reduce in f64 before narrowing: m²τ/2 is far outside f32's exact range.
        let phases: Vec<T> = match kind {
            SpectrumKind::Rotator => window
                .indices()
                .map(|m| {
                    let m = m as f64;
                    T::lit((m * m * 0.5 * tau64).rem_euclid(two_pi)).wrap_angle()
                })
                .collect(),
            SpectrumKind::Linear { omega } => {
                let omega = omega.to_f64().unwrap();
                if !omega.is_finite() {
                    return Err(Error::invalid("linear spectrum frequency must be finite"));
                }
                window
                    .indices()
                    .map(|m| T::lit((omega * m as f64 * tau64).rem_euclid(two_pi)).wrap_angle())
                    .collect()
            }
            SpectrumKind::RandomLevels { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                window
                    .indices()
                    .map(|_| T::lit(two_pi * rng.gen::<f64>()).wrap_angle())
                    .collect()
            }
        };
        Ok(Self {
            kind,
            tau,
            window,
            phases,
        })
    }

    pub fn kind(&self) -> SpectrumKind<T> {
        self.kind
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn window(&self) -> &BasisWindow {
        &self.window
    }

    /// Reduced phase `H₀(m)τ mod 2π`, or `None` outside the window.
    pub fn phase(&self, m: i64) -> Option<T> {
        self.window.offset(m).map(|i| self.phases[i])
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }
}
