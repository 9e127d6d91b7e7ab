//! Classical standard map, `I' = I + k sin θ`, `θ' = θ + τ I'`, and the
//! ensemble estimate of its action-space diffusion coefficient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::measurement::draw_phase;
use crate::{Error, Real, Result};

/// Onset of global chaos, `K = τk > K_c`.
pub const CHAOS_THRESHOLD: f64 = 0.9816;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalParticle<T> {
    pub action: T,
    /// Kept in `[0, 2π)`.
    pub angle: T,
}

impl<T: Real> ClassicalParticle<T> {
    pub fn new(action: T, angle: T) -> Self {
        Self {
            action,
            angle: angle.wrap_angle(),
        }
    }
}

/// One period of the rotator map.
pub fn classical_step<T: Real>(p: ClassicalParticle<T>, k: T, tau: T) -> ClassicalParticle<T> {
    let action = p.action + k * p.angle.sin();
    ClassicalParticle {
        action,
        angle: (p.angle + tau * action).wrap_angle(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble<T> {
    particles: Vec<ClassicalParticle<T>>,
    initial_action: T,
    tau: T,
    k: T,
}

impl<T: Real> ClassicalEnsemble<T> {
    pub fn new(particles: Vec<ClassicalParticle<T>>, initial_action: T, k: T, tau: T) -> Result<Self> {
        if !(tau > T::zero()) || !(k >= T::zero()) {
            return Err(Error::invalid("ensemble needs tau > 0 and k >= 0"));
        }
        Ok(Self {
            particles,
            initial_action,
            tau,
            k,
        })
    }

    /// `count` particles at action `initial_action`, angles i.i.d. uniform on
    /// `[0, 2π)`; particle `i` draws from ChaCha8 stream `i` of `seed`.
    pub fn uniform_angles(count: usize, initial_action: T, k: T, tau: T, seed: u64) -> Result<Self> {
        let particles = (0..count as u64)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                ClassicalParticle::new(initial_action, draw_phase(&mut rng))
            })
            .collect();
        Self::new(particles, initial_action, k, tau)
    }

    pub fn particles(&self) -> &[ClassicalParticle<T>] {
        &self.particles
    }

    pub fn initial_action(&self) -> T {
        self.initial_action
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// Stochasticity parameter `K = τk`.
    pub fn stochasticity(&self) -> T {
        self.tau * self.k
    }

    pub fn is_chaotic(&self) -> bool {
        self.stochasticity() > T::lit(CHAOS_THRESHOLD)
    }

    /// Advances every particle by one period.
    pub fn step(&mut self) {
        let (k, tau) = (self.k, self.tau);
        self.particles
            .par_iter_mut()
            .for_each(|p| *p = classical_step(*p, k, tau));
    }

    /// `⟨(I − I₀)²⟩` over the ensemble.
    pub fn dispersion(&self) -> T {
        if self.particles.is_empty() {
            return T::zero();
        }
        let i0 = self.initial_action;
        self.particles
            .iter()
            .map(|p| (p.action - i0) * (p.action - i0))
            .sum::<T>()
            / T::from_usize(self.particles.len()).unwrap()
    }

    /// Fraction of particles whose action rounds to `I₀`.
    pub fn fraction_at_initial(&self) -> T {
        if self.particles.is_empty() {
            return T::zero();
        }
        let i0 = self.initial_action.round();
        let n = self.particles.iter().filter(|p| p.action.round() == i0).count();
        T::from_usize(n).unwrap() / T::from_usize(self.particles.len()).unwrap()
    }
}

/// `B̂ = ⟨(I_t − I₀)²⟩ / 2t` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionEstimate<T> {
    pub coefficient: T,
    pub std_error: T,
    pub steps: u64,
}

/// Evolves a copy of `ensemble` for `steps` periods and estimates the action
/// diffusion coefficient. Below the chaos threshold the quasilinear picture
/// does not apply; a warning is logged but the estimate is still returned.
pub fn ensemble_diffusion<T: Real>(ensemble: &ClassicalEnsemble<T>, steps: u64) -> Result<DiffusionEstimate<T>> {
    if ensemble.particles.is_empty() {
        return Err(Error::invalid("empty ensemble"));
    }
    if steps == 0 {
        return Err(Error::invalid("diffusion estimate needs at least one step"));
    }
    if !ensemble.is_chaotic() {
        log::warn!(
            "K = {} is below the chaos threshold {CHAOS_THRESHOLD}; diffusion estimate is not meaningful",
            ensemble.stochasticity()
        );
    }
    let (k, tau, i0) = (ensemble.k, ensemble.tau, ensemble.initial_action);
    let squares: Vec<T> = ensemble
        .particles
        .par_iter()
        .map(|&p| {
            let mut p = p;
            for _ in 0..steps {
                p = classical_step(p, k, tau);
            }
            (p.action - i0) * (p.action - i0)
        })
        .collect();
    let n = T::from_usize(squares.len()).unwrap();
    let mean = squares.iter().copied().sum::<T>() / n;
    let var = if squares.len() > 1 {
        squares.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (n - T::one())
    } else {
        T::zero()
    };
    let t2 = T::lit(2.0) * T::from_u64(steps).unwrap() * tau;
    Ok(DiffusionEstimate {
        coefficient: mean / t2,
        std_error: (var / n).sqrt() / t2,
        steps,
    })
}
