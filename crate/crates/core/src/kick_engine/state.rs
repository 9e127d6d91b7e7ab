use num_complex::Complex;

use super::BasisWindow;
use crate::{Edge, Error, Real, Result};

/// Largest occupation tolerated on either edge bin of the truncated basis.
pub const BOUNDARY_THRESHOLD: f64 = 1e-10;

/// Amplitudes `a_m` over a truncated momentum basis, taken just before kick
/// `time_index + 1`. Phases follow the convention in which the kick matrix
/// is real (`J_{m-n}(k)`).
///
/// Diagonal phase factors (free flight, measurement) are accumulated in a
/// separate per-level phase and folded into the Cartesian amplitudes at the
/// next kick, so they leave every `|a_m|²` bit-for-bit unchanged.
#[derive(Debug, Clone)]
pub struct QuantumState<T> {
    window: BasisWindow,
    base: Vec<Complex<T>>,
    /// `a_m = base_m · e^{i pending_m}`; `None` when all pending phases are zero.
    pending: Option<Vec<T>>,
    time_index: u64,
}

impl<T: Real> QuantumState<T> {
    /// All probability on `m₀`.
    pub fn delta(window: BasisWindow) -> Self {
        let mut base = vec![Complex::new(T::zero(), T::zero()); window.len()];
        base[window.offset(window.m0()).unwrap()] = Complex::new(T::one(), T::zero());
        Self {
            window,
            base,
            pending: None,
            time_index: 0,
        }
    }

    /// Wraps explicit amplitudes, requiring unit norm (to `1e-8`) and quiet edges.
    pub fn from_amplitudes(window: BasisWindow, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != window.len() {
            return Err(Error::invalid(format!(
                "{} amplitudes for a window of {} states",
                amplitudes.len(),
                window.len()
            )));
        }
        let s = Self {
            window,
            base: amplitudes,
            pending: None,
            time_index: 0,
        };
        let dev = (s.norm_sqr() - T::one()).abs();
        if !(dev <= T::tolerance(1e-8)) {
            return Err(Error::InvalidState {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        s.check_boundary()?;
        Ok(s)
    }

    pub fn window(&self) -> &BasisWindow {
        &self.window
    }

    pub fn time_index(&self) -> u64 {
        self.time_index
    }

    /// Materialized amplitudes in ascending `m`.
    pub fn amplitudes(&self) -> Vec<Complex<T>> {
        match &self.pending {
            None => self.base.clone(),
            Some(ph) => self.base.iter().zip(ph).map(|(a, &p)| rotate(*a, p)).collect(),
        }
    }

    pub fn amplitude(&self, m: i64) -> Option<Complex<T>> {
        self.window.offset(m).map(|i| match &self.pending {
            None => self.base[i],
            Some(ph) => rotate(self.base[i], ph[i]),
        })
    }

    /// Folds pending phases into the amplitudes and hands them out for a
    /// non-diagonal update.
    pub(crate) fn materialize(&mut self) -> &mut Vec<Complex<T>> {
        if let Some(ph) = self.pending.take() {
            for (a, p) in self.base.iter_mut().zip(ph) {
                *a = rotate(*a, p);
            }
        }
        &mut self.base
    }

    pub(crate) fn replace_amplitudes(&mut self, amplitudes: Vec<Complex<T>>) {
        debug_assert_eq!(amplitudes.len(), self.base.len());
        self.base = amplitudes;
        self.pending = None;
    }

    /// Adds `sign · phases[i]` to the pending phase of every level.
    pub(crate) fn add_phases(&mut self, phases: &[T], sign: T) {
        let n = self.base.len();
        let ph = self.pending.get_or_insert_with(|| vec![T::zero(); n]);
        for (p, &d) in ph.iter_mut().zip(phases) {
            *p = (*p + sign * d).wrap_angle();
        }
    }

    /// Adds `delta` to the pending phase of the level at storage offset `i`.
    pub(crate) fn add_phase_at(&mut self, i: usize, delta: T) {
        let n = self.base.len();
        let ph = self.pending.get_or_insert_with(|| vec![T::zero(); n]);
        ph[i] = (ph[i] + delta).wrap_angle();
    }

    pub(crate) fn advance(&mut self) {
        self.time_index += 1;
    }

    pub(crate) fn retreat(&mut self) {
        self.time_index = self.time_index.saturating_sub(1);
    }

    /// `|a_m|²`, zero outside the window.
    pub fn occupation(&self, m: i64) -> T {
        self.window.offset(m).map_or(T::zero(), |i| self.base[i].norm_sqr())
    }

    /// `|a_m|²` in ascending `m`.
    pub fn occupation_vector(&self) -> Vec<T> {
        self.base.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `(m, |a_m|²)` in ascending `m`.
    pub fn occupations(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.window.indices().zip(self.base.iter().map(|a| a.norm_sqr()))
    }

    pub fn norm_sqr(&self) -> T {
        self.base.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Combined occupation of the two edge bins.
    pub fn boundary_occupation(&self) -> T {
        self.base[0].norm_sqr() + self.base[self.base.len() - 1].norm_sqr()
    }

    /// Fails with [`Error::TruncationOverflow`] if the edge bins together hold
    /// at least [`BOUNDARY_THRESHOLD`], naming the more occupied edge.
    pub fn check_boundary(&self) -> Result<()> {
        let lo = self.base[0].norm_sqr();
        let hi = self.base[self.base.len() - 1].norm_sqr();
        let total = (lo + hi).to_f64().unwrap_or(f64::INFINITY);
        if total < BOUNDARY_THRESHOLD {
            return Ok(());
        }
        let (edge, index, occupation) = if lo >= hi {
            (Edge::Lower, self.window.m_min(), lo)
        } else {
            (Edge::Upper, self.window.m_max(), hi)
        };
        Err(Error::TruncationOverflow {
            edge,
            index,
            occupation: occupation.to_f64().unwrap_or(f64::INFINITY),
            threshold: BOUNDARY_THRESHOLD,
        })
    }

    /// `Σ_m conj(a_m) b_m`, or `None` if the windows differ.
    pub fn inner(&self, other: &Self) -> Option<Complex<T>> {
        if self.window != other.window {
            return None;
        }
        Some(
            self.amplitudes()
                .iter()
                .zip(other.amplitudes())
                .map(|(a, b)| a.conj() * b)
                .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x),
        )
    }
}

/// Equal windows, time indices and materialized amplitudes.
impl<T: Real> PartialEq for QuantumState<T> {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window && self.time_index == other.time_index && self.amplitudes() == other.amplitudes()
    }
}

#[inline]
fn rotate<T: Real>(a: Complex<T>, phase: T) -> Complex<T> {
    let (s, c) = phase.sin_cos();
    a * Complex::new(c, s)
}
