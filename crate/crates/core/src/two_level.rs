//! Two-level system driven at resonance, with and without intermediate
//! measurements.
//!
//! Coherent evolution over one interval `τ` is the rotation
//! `A = [[cos φ, i sin φ], [i sin φ, cos φ]]` with `φ = Ωτ/2`. A measurement
//! between intervals is modelled by redrawing both amplitude phases; the
//! ensemble-averaged populations then follow the doubly stochastic map
//! `M = [[cos² φ, sin² φ], [sin² φ, cos² φ]]`.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::measurement::draw_phase;
use crate::{Error, Real, Result};

/// Amplitudes `(a1, a2)` of the two-state wave function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState<T> {
    a1: Complex<T>,
    a2: Complex<T>,
}

impl<T: Real> TwoLevelState<T> {
    /// Builds a state, rejecting amplitudes whose norm deviates from one by
    /// more than `1e-9` (or a few ulps for narrow scalar types).
    pub fn new(a1: Complex<T>, a2: Complex<T>) -> Result<Self> {
        let s = Self { a1, a2 };
        s.check()?;
        Ok(s)
    }

    pub fn ground() -> Self {
        Self {
            a1: Complex::new(T::one(), T::zero()),
            a2: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn a1(&self) -> Complex<T> {
        self.a1
    }

    pub fn a2(&self) -> Complex<T> {
        self.a2
    }

    pub fn norm_sqr(&self) -> T {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    pub fn probabilities(&self) -> ProbabilityPair<T> {
        ProbabilityPair {
            p1: self.a1.norm_sqr(),
            p2: self.a2.norm_sqr(),
        }
    }

    fn check(&self) -> Result<()> {
        let dev = (self.norm_sqr() - T::one()).abs();
        if dev > T::tolerance(1e-9) || !dev.is_finite() {
            return Err(Error::InvalidState {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    fn rotate(&self, phi: T) -> Self {
        let (s, c) = phi.sin_cos();
        let is = Complex::new(T::zero(), s);
        Self {
            a1: self.a1 * c + self.a2 * is,
            a2: self.a1 * is + self.a2 * c,
        }
    }
}

/// Rabi angular frequency `Ω`, interval `τ` and the derived half-pulse angle `φ = Ωτ/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiParams<T> {
    omega: T,
    tau: T,
    phi: T,
}

impl<T: Real> RabiParams<T> {
    pub fn new(omega: T, tau: T) -> Result<Self> {
        if !(tau > T::zero()) || !omega.is_finite() || !tau.is_finite() {
            return Err(Error::invalid("Rabi interval tau must be positive and finite"));
        }
        Ok(Self {
            omega,
            tau,
            phi: omega * tau / T::lit(2.0),
        })
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn phi(&self) -> T {
        self.phi
    }
}

/// Populations `(p1, p2)` of the two levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityPair<T> {
    pub p1: T,
    pub p2: T,
}

impl<T: Real> ProbabilityPair<T> {
    pub fn new(p1: T, p2: T) -> Result<Self> {
        let tol = T::tolerance(1e-9);
        let unit = |p: T| p >= -tol && p <= T::one() + tol;
        if !unit(p1) || !unit(p2) || (p1 + p2 - T::one()).abs() > tol {
            return Err(Error::invalid(format!("({p1}, {p2}) is not a probability pair")));
        }
        Ok(Self { p1, p2 })
    }

    pub fn ground() -> Self {
        Self {
            p1: T::one(),
            p2: T::zero(),
        }
    }
}

/// One interval of coherent evolution, `A·state`.
pub fn coherent_step<T: Real>(state: TwoLevelState<T>, phi: T) -> Result<TwoLevelState<T>> {
    state.check()?;
    Ok(state.rotate(phi))
}

/// `Aⁿ·state` through the closed form `Aⁿ = [[cos nφ, i sin nφ], [i sin nφ, cos nφ]]`.
pub fn coherent_evolve<T: Real>(state: TwoLevelState<T>, phi: T, n: u64) -> Result<TwoLevelState<T>> {
    state.check()?;
    if n == 0 {
        return Ok(state);
    }
    let total = T::from_u64(n).expect("step count representable") * phi;
    Ok(state.rotate(total))
}

/// One interval followed by a measurement, on populations: `M·p`.
pub fn measured_probability_step<T: Real>(p: ProbabilityPair<T>, phi: T) -> ProbabilityPair<T> {
    let (s, c) = phi.sin_cos();
    let (c2, s2) = (c * c, s * s);
    ProbabilityPair {
        p1: c2 * p.p1 + s2 * p.p2,
        p2: s2 * p.p1 + c2 * p.p2,
    }
}

/// `Mⁿ·p` using `Mⁿ = ½[[1 + cosⁿ2φ, 1 − cosⁿ2φ], [1 − cosⁿ2φ, 1 + cosⁿ2φ]]`.
pub fn measured_evolve_closed<T: Real>(p: ProbabilityPair<T>, phi: T, n: u64) -> ProbabilityPair<T> {
    if n == 0 {
        return p;
    }
    let c = (phi + phi).cos();
    let cn = match i32::try_from(n) {
        Ok(e) => c.powi(e),
        Err(_) => c.powf(T::from_u64(n).expect("step count representable")),
    };
    let half = T::lit(0.5);
    let skew = half * cn * (p.p1 - p.p2);
    let mean = half * (p.p1 + p.p2);
    ProbabilityPair {
        p1: mean + skew,
        p2: mean - skew,
    }
}

/// Populations after a π-pulse (`ΩT = π`) split into `n` intervals with
/// `n − 1` intermediate measurements, starting from level 1.
pub fn zeno_survival<T: Real>(n: u64) -> Result<ProbabilityPair<T>> {
    if n == 0 {
        return Err(Error::invalid("a pi-pulse needs at least one segment"));
    }
    Ok(measured_evolve_closed(ProbabilityPair::ground(), zeno_phi::<T>(n), n))
}

/// Half-pulse angle `φ = π/(2n)` of one segment of a π-pulse cut into `n` pieces.
pub fn zeno_phi<T: Real>(n: u64) -> T {
    T::PI() / (T::lit(2.0) * T::from_u64(n).expect("segment count representable"))
}

/// Trial-averaged populations from the phase-randomization model, with the
/// standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate<T> {
    pub mean: ProbabilityPair<T>,
    /// Standard error of either population (the two are complementary per trial).
    pub std_error: T,
    pub trials: u64,
}

/// Simulates `n` intervals where, before every coherent step, both amplitude
/// phases are redrawn independently and uniformly on `[0, 2π)`. Only their
/// difference `δ` affects the populations, so one uniform draw per interval
/// suffices: `p₂' = s²p₁ + c²p₂ − 2sc·√(p₁p₂)·sin δ` with `(s, c) = (sin φ, cos φ)`.
///
/// Trial `i` draws from the ChaCha8 stream `i` of `seed`, and partial sums are
/// reduced in a fixed order, so the result does not depend on thread count.
pub fn monte_carlo_measured_evolve<T: Real>(
    p0: ProbabilityPair<T>,
    phi: T,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate<T>> {
    let mut path = monte_carlo_trajectory(p0, phi, n, trials, seed)?;
    Ok(path.pop().expect("trajectory includes the initial point"))
}

/// Like [`monte_carlo_measured_evolve`], but returns the trial average after
/// every interval `0 ..= n`.
pub fn monte_carlo_trajectory<T: Real>(
    p0: ProbabilityPair<T>,
    phi: T,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<Vec<MonteCarloEstimate<T>>> {
    const CHUNK: u64 = 1024;
    if trials == 0 {
        return Err(Error::invalid("Monte-Carlo needs at least one trial"));
    }
    let steps = usize::try_from(n).map_err(|_| Error::invalid("too many intervals"))? + 1;
    let (s, c) = phi.sin_cos();
    let (s2, c2, two_sc) = (s * s, c * c, T::lit(2.0) * s * c);
    let start = p0.p2.max(T::zero()).min(T::one());

    let chunks: Vec<Vec<(T, T)>> = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            // (Σ p2, Σ p2²) per interval for this block of trials
            let mut acc = vec![(T::zero(), T::zero()); steps];
            for trial in chunk * CHUNK..((chunk + 1) * CHUNK).min(trials) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                let mut p2 = start;
                for (i, slot) in acc.iter_mut().enumerate() {
                    *slot = (slot.0 + p2, slot.1 + p2 * p2);
                    if i + 1 == steps {
                        break;
                    }
                    let p1 = T::one() - p2;
                    let delta: T = draw_phase(&mut rng);
                    p2 = (s2 * p1 + c2 * p2 - two_sc * (p1 * p2).max(T::zero()).sqrt() * delta.sin())
                        .max(T::zero())
                        .min(T::one());
                }
            }
            acc
        })
        .collect();

    let count = T::from_u64(trials).expect("trial count representable");
    Ok((0..steps)
        .map(|i| {
            let (sum, sum_sq) = chunks
                .iter()
                .fold((T::zero(), T::zero()), |a, ch| (a.0 + ch[i].0, a.1 + ch[i].1));
            let mean2 = sum / count;
            let var = if trials > 1 {
                ((sum_sq - sum * mean2) / (count - T::one())).max(T::zero())
            } else {
                T::zero()
            };
            MonteCarloEstimate {
                mean: ProbabilityPair {
                    p1: T::one() - mean2,
                    p2: mean2,
                },
                std_error: (var / count).sqrt(),
                trials,
            }
        })
        .collect())
}
