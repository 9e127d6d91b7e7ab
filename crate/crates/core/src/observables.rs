//! Momentum dispersion series, time-averaged occupation profiles and the
//! estimators built on them: localization length, diffusion rate and the
//! quantum break time.

use crate::kick_engine::{BasisWindow, QuantumState};
use crate::{Error, Real, Result};

/// Occupations at or below this level are excluded from log fits.
pub const FIT_FLOOR: f64 = 1e-12;

/// Usable bins required on each side of `m₀` for a localization fit.
pub const MIN_FIT_BINS: usize = 20;

/// `⟨(m − m₀)²⟩ = Σ_m (m − m₀)² |a_m|²`.
pub fn dispersion<T: Real>(state: &QuantumState<T>) -> T {
    let m0 = state.window().m0();
    state
        .occupations()
        .map(|(m, p)| {
            let d = T::from_index(m - m0);
            d * d * p
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionEntry<T> {
    pub j: u64,
    pub dispersion: T,
    pub norm: T,
    /// Occupation of the initial level.
    pub p_m0: T,
}

impl<T: Real> DispersionEntry<T> {
    pub fn of(state: &QuantumState<T>) -> Self {
        Self {
            j: state.time_index(),
            dispersion: dispersion(state),
            norm: state.norm_sqr(),
            p_m0: state.occupation(state.window().m0()),
        }
    }
}

/// Per-kick record, strictly increasing in `j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DispersionSeries<T> {
    entries: Vec<DispersionEntry<T>>,
}

impl<T: Real> DispersionSeries<T> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn from_entries(entries: Vec<DispersionEntry<T>>) -> Result<Self> {
        let mut s = Self::new();
        for e in entries {
            s.push(e)?;
        }
        Ok(s)
    }

    /// Appends an entry, enforcing increasing `j`, non-negative dispersion and
    /// a norm within `1e-6` of one.
    pub fn push(&mut self, entry: DispersionEntry<T>) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if entry.j <= last.j {
                return Err(Error::invalid(format!(
                    "series index {} does not follow {}",
                    entry.j, last.j
                )));
            }
        }
        if !(entry.dispersion >= T::zero()) {
            return Err(Error::invalid(format!("negative dispersion {}", entry.dispersion)));
        }
        if !((entry.norm - T::one()).abs() <= T::tolerance(1e-6)) {
            return Err(Error::invalid(format!(
                "norm {} at j = {} outside 1 ± 1e-6",
                entry.norm, entry.j
            )));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[DispersionEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, j: u64) -> Option<&DispersionEntry<T>> {
        self.entries
            .binary_search_by_key(&j, |e| e.j)
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Dispersion values in order.
    pub fn dispersions(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.dispersion).collect()
    }

    /// Entries with `j_lo ≤ j ≤ j_hi`.
    pub fn range(&self, j_lo: u64, j_hi: u64) -> &[DispersionEntry<T>] {
        let lo = self.entries.partition_point(|e| e.j < j_lo);
        let hi = self.entries.partition_point(|e| e.j <= j_hi);
        &self.entries[lo..hi.max(lo)]
    }

    /// Mean dispersion over `j_lo ..= j_hi`.
    pub fn window_mean(&self, j_lo: u64, j_hi: u64) -> Result<T> {
        let r = self.range(j_lo, j_hi);
        if r.is_empty() {
            return Err(Error::invalid(format!("no entries in [{j_lo}, {j_hi}]")));
        }
        Ok(r.iter().map(|e| e.dispersion).sum::<T>() / T::from_usize(r.len()).unwrap())
    }

    /// Entry-wise mean over series sampled on the same `j` grid.
    pub fn mean_of(series: &[DispersionSeries<T>]) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::invalid("cannot average zero series"))?;
        if series.iter().any(|s| s.len() != first.len()) {
            return Err(Error::invalid("series lengths differ"));
        }
        let n = T::from_usize(series.len()).unwrap();
        let mut out = Self::new();
        for (i, e) in first.entries.iter().enumerate() {
            let mut acc = (T::zero(), T::zero(), T::zero());
            for s in series {
                let x = &s.entries[i];
                if x.j != e.j {
                    return Err(Error::invalid("series sampled on different grids"));
                }
                acc = (acc.0 + x.dispersion, acc.1 + x.norm, acc.2 + x.p_m0);
            }
            out.entries.push(DispersionEntry {
                j: e.j,
                dispersion: acc.0 / n,
                norm: acc.1 / n,
                p_m0: acc.2 / n,
            });
        }
        Ok(out)
    }

    /// Centered moving average of the dispersion over `width` entries
    /// (truncated at the ends), returned as `(j, value)`.
    pub fn smoothed(&self, width: usize) -> Vec<(u64, T)> {
        let n = self.entries.len();
        let half = width / 2;
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(T::zero());
        for e in &self.entries {
            let last = *prefix.last().unwrap();
            prefix.push(last + e.dispersion);
        }
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(half);
                let hi = (i + half).min(n - 1);
                let v = (prefix[hi + 1] - prefix[lo]) / T::from_usize(hi - lo + 1).unwrap();
                (self.entries[i].j, v)
            })
            .collect()
    }
}

/// Per-level occupation, typically averaged over a stretch of kicks.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationProfile<T> {
    window: BasisWindow,
    values: Vec<T>,
}

impl<T: Real> OccupationProfile<T> {
    pub fn from_values(window: BasisWindow, values: Vec<T>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::invalid("profile length does not match window"));
        }
        Ok(Self { window, values })
    }

    pub fn window(&self) -> &BasisWindow {
        &self.window
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, m: i64) -> Option<T> {
        self.window.offset(m).map(|i| self.values[i])
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }
}

/// Running sum of occupations for [`time_averaged_profile`].
#[derive(Debug, Clone)]
pub struct ProfileAccumulator<T> {
    window: BasisWindow,
    sums: Vec<T>,
    count: usize,
}

impl<T: Real> ProfileAccumulator<T> {
    pub fn new(window: BasisWindow) -> Self {
        Self {
            window,
            sums: vec![T::zero(); window.len()],
            count: 0,
        }
    }

    pub fn add(&mut self, state: &QuantumState<T>) -> Result<()> {
        if state.window() != &self.window {
            return Err(Error::invalid("state window differs from profile window"));
        }
        for (s, (_, p)) in self.sums.iter_mut().zip(state.occupations()) {
            *s = *s + p;
        }
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(self) -> Result<OccupationProfile<T>> {
        if self.count == 0 {
            return Err(Error::invalid("time average over an empty window"));
        }
        let n = T::from_usize(self.count).unwrap();
        Ok(OccupationProfile {
            window: self.window,
            values: self.sums.into_iter().map(|s| s / n).collect(),
        })
    }
}

/// Per-level mean of `|a_m|²` over the given states.
pub fn time_averaged_profile<'a, T: Real, I>(states: I) -> Result<OccupationProfile<T>>
where
    I: IntoIterator<Item = &'a QuantumState<T>>,
{
    let mut it = states.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::invalid("time average over an empty window"))?;
    let mut acc = ProfileAccumulator::new(*first.window());
    acc.add(first)?;
    for s in it {
        acc.add(s)?;
    }
    acc.finish()
}

/// Exponential fit `|a_m|² ∝ exp(−2|m − m₀|/λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationFit<T> {
    pub lambda: T,
    /// RMS residual of the log-occupation fit.
    pub residual: T,
    /// Extreme levels among the fitted bins.
    pub m_range: (i64, i64),
    pub bins: usize,
}

/// Least-squares slope of `ln |a_m|²` against `|m − m₀|`, both sides jointly,
/// over bins above [`FIT_FLOOR`]; `λ = −2/slope`.
pub fn fit_localization_length<T: Real>(profile: &OccupationProfile<T>, m0: i64) -> Result<LocalizationFit<T>> {
    let floor = T::lit(FIT_FLOOR);
    let usable: Vec<(i64, T)> = profile
        .window
        .indices()
        .zip(profile.values.iter().copied())
        .filter(|&(_, p)| p > floor)
        .collect();
    let below = usable.iter().filter(|(m, _)| *m < m0).count();
    let above = usable.iter().filter(|(m, _)| *m > m0).count();
    if below < MIN_FIT_BINS || above < MIN_FIT_BINS {
        return Err(Error::invalid(format!(
            "localization fit needs {MIN_FIT_BINS} usable bins per side, found {below} below and {above} above m0"
        )));
    }
    let xs: Vec<T> = usable.iter().map(|(m, _)| T::from_index((m - m0).abs())).collect();
    let ys: Vec<T> = usable.iter().map(|(_, p)| p.ln()).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    if slope >= T::lit(-1e-9) {
        return Err(Error::NoLocalization {
            slope: slope.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = T::from_usize(xs.len()).unwrap();
    let ss = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<T>();
    Ok(LocalizationFit {
        lambda: T::lit(-2.0) / slope,
        residual: (ss / n).sqrt(),
        m_range: (usable[0].0, usable[usable.len() - 1].0),
        bins: usable.len(),
    })
}

/// Least-squares slope of dispersion against `j` over `j_lo ..= j_hi`, in
/// states² per kick.
pub fn diffusion_slope<T: Real>(series: &DispersionSeries<T>, j_lo: u64, j_hi: u64) -> Result<T> {
    if j_hi <= j_lo {
        return Err(Error::invalid(format!("degenerate range [{j_lo}, {j_hi}]")));
    }
    let (first, last) = match (series.entries.first(), series.entries.last()) {
        (Some(f), Some(l)) => (f.j, l.j),
        _ => return Err(Error::invalid("empty series")),
    };
    if j_lo < first || j_hi > last {
        return Err(Error::invalid(format!(
            "range [{j_lo}, {j_hi}] outside series [{first}, {last}]"
        )));
    }
    let r = series.range(j_lo, j_hi);
    if r.len() < 2 {
        return Err(Error::invalid("fewer than two entries in range"));
    }
    let xs: Vec<T> = r.iter().map(|e| T::from_u64(e.j).unwrap()).collect();
    let ys: Vec<T> = r.iter().map(|e| e.dispersion).collect();
    Ok(linear_fit(&xs, &ys).0)
}

/// Outcome of [`detect_break_time`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BreakTime {
    /// Kick index of the slowdown, or the last index of the series if none.
    pub index: u64,
    /// Set when diffusion never slowed down.
    pub delocalized: bool,
}

/// Slope ratio below which diffusion counts as suppressed.
pub const BREAK_SLOPE_RATIO: f64 = 0.25;

/// Finds the first kick at which diffusion has slowed down.
///
/// Slopes are fitted over windows of `k²/4` consecutive kicks (at least two).
/// The reported index is the centre of the first trailing window whose slope
/// falls below [`BREAK_SLOPE_RATIO`] of the slope over the initial window.
/// The series must be sampled every kick and cover at least `2k²` kicks.
pub fn detect_break_time<T: Real>(series: &DispersionSeries<T>, k: T) -> Result<BreakTime> {
    let e = &series.entries;
    let width = (k * k / T::lit(4.0)).round().to_usize().unwrap_or(0).max(2);
    let span = match (e.first(), e.last()) {
        (Some(f), Some(l)) => l.j - f.j,
        _ => return Err(Error::invalid("empty series")),
    };
    let needed = (T::lit(2.0) * k * k)
        .ceil()
        .to_u64()
        .unwrap_or(u64::MAX)
        .max(2 * width as u64);
    if span < needed || e.len() < 2 * width + 2 {
        return Err(Error::invalid(format!(
            "break-time detection needs {needed} kicks, series covers {span}"
        )));
    }
    let fit = |lo: usize| {
        let w = &e[lo..=lo + width];
        let xs: Vec<T> = w.iter().map(|x| T::from_u64(x.j).unwrap()).collect();
        let ys: Vec<T> = w.iter().map(|x| x.dispersion).collect();
        linear_fit(&xs, &ys).0
    };
    let initial = fit(0);
    let threshold = T::lit(BREAK_SLOPE_RATIO) * initial;
    for lo in 1..e.len() - width {
        if fit(lo) < threshold {
            return Ok(BreakTime {
                index: e[lo + width / 2].j,
                delocalized: false,
            });
        }
    }
    Ok(BreakTime {
        index: e[e.len() - 1].j,
        delocalized: true,
    })
}

/// Ordinary least squares `y ≈ intercept + slope·x`, returned as `(slope, intercept)`.
pub(crate) fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> (T, T) {
    let n = T::from_usize(xs.len()).unwrap();
    let xm = xs.iter().copied().sum::<T>() / n;
    let ym = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxy = sxy + (x - xm) * (y - ym);
        sxx = sxx + (x - xm) * (x - xm);
    }
    if sxx == T::zero() {
        return (T::zero(), ym);
    }
    let slope = sxy / sxx;
    (slope, ym - slope * xm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kick_engine::{FloquetMap, KickKernel, SpectrumKind, SpectrumModel, DEFAULT_EPSILON};
    use num_complex::Complex;

    fn series_from(values: impl IntoIterator<Item = f64>) -> DispersionSeries<f64> {
        DispersionSeries::from_entries(
            values
                .into_iter()
                .enumerate()
                .map(|(j, d)| DispersionEntry {
                    j: j as u64,
                    dispersion: d,
                    norm: 1.0,
                    p_m0: 0.0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn dispersion_examples() {
        let w = BasisWindow::centered(500, 50).unwrap();
        let delta = QuantumState::<f64>::delta(w);
        assert_eq!(dispersion(&delta), 0.0);

        let mut amps = vec![Complex::new(0.0, 0.0); w.len()];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[w.offset(498).unwrap()] = Complex::new(h, 0.0);
        amps[w.offset(502).unwrap()] = Complex::new(0.0, h);
        let pair = QuantumState::from_amplitudes(w, amps).unwrap();
        assert!((dispersion(&pair) - 4.0).abs() < 1e-14);

        let kk = KickKernel::new(10.0, DEFAULT_EPSILON).unwrap();
        let mut s = delta.clone();
        s.kick(&kk).unwrap();
        assert!((dispersion(&s) - 50.0).abs() < 1e-10);
    }

    #[test]
    fn series_invariants() {
        let mut s = DispersionSeries::<f64>::new();
        s.push(DispersionEntry {
            j: 0,
            dispersion: 0.0,
            norm: 1.0,
            p_m0: 1.0,
        })
        .unwrap();
        assert!(s
            .push(DispersionEntry {
                j: 0,
                dispersion: 1.0,
                norm: 1.0,
                p_m0: 1.0
            })
            .is_err());
        assert!(s
            .push(DispersionEntry {
                j: 1,
                dispersion: -1.0,
                norm: 1.0,
                p_m0: 1.0
            })
            .is_err());
        assert!(s
            .push(DispersionEntry {
                j: 1,
                dispersion: 1.0,
                norm: 1.01,
                p_m0: 1.0
            })
            .is_err());
        s.push(DispersionEntry {
            j: 1,
            dispersion: 1.0,
            norm: 1.0 + 1e-7,
            p_m0: 0.5,
        })
        .unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn profile_examples() {
        let w = BasisWindow::centered(0, 30).unwrap();
        let delta = QuantumState::<f64>::delta(w);
        let repeated = vec![delta.clone(); 5];
        let p = time_averaged_profile(&repeated).unwrap();
        assert_eq!(p.value(0), Some(1.0));
        assert_eq!(p.total(), 1.0);

        let map = FloquetMap::new(
            KickKernel::new(3.0, DEFAULT_EPSILON).unwrap(),
            SpectrumModel::new(SpectrumKind::Rotator, 1.0, w).unwrap(),
        );
        let mut s = delta.clone();
        map.step(&mut s).unwrap();
        let single = time_averaged_profile(std::iter::once(&s)).unwrap();
        assert_eq!(single.values(), s.occupation_vector().as_slice());

        let none: Vec<QuantumState<f64>> = vec![];
        assert!(time_averaged_profile(&none).is_err());
    }

    #[test]
    fn fit_recovers_synthetic_length() {
        let w = BasisWindow::centered(500, 400).unwrap();
        let values = w
            .indices()
            .map(|m| 0.02 * (-2.0 * (m - 500).abs() as f64 / 50.0).exp())
            .collect();
        let p = OccupationProfile::from_values(w, values).unwrap();
        let fit = fit_localization_length(&p, 500).unwrap();
        assert!((fit.lambda - 50.0).abs() < 0.5, "{fit:?}");
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn flat_profile_is_not_localized() {
        let w = BasisWindow::centered(0, 100).unwrap();
        let p = OccupationProfile::from_values(w, vec![1.0 / 201.0; 201]).unwrap();
        assert!(matches!(
            fit_localization_length(&p, 0),
            Err(Error::NoLocalization { .. })
        ));
    }

    #[test]
    fn fit_needs_enough_bins() {
        let w = BasisWindow::centered(0, 100).unwrap();
        let values = w.indices().map(|m| if m.abs() < 10 { 0.05 } else { 0.0 }).collect();
        let p = OccupationProfile::from_values(w, values).unwrap();
        assert!(matches!(fit_localization_length(&p, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn slope_examples() {
        let line = series_from((0..=100).map(|j| 50.0 * j as f64));
        assert!((diffusion_slope(&line, 0, 100).unwrap() - 50.0).abs() < 1e-10);
        let flat = series_from((0..=100).map(|_| 7.0));
        assert_eq!(diffusion_slope(&flat, 10, 90).unwrap(), 0.0);
        assert!(diffusion_slope(&line, 50, 50).is_err());
        assert!(diffusion_slope(&line, 90, 10).is_err());
        assert!(diffusion_slope(&line, 10, 200).is_err());
    }

    #[test]
    fn break_time_examples() {
        let line = series_from((0..=400).map(|j| 50.0 * j as f64));
        let b = detect_break_time(&line, 10.0).unwrap();
        assert!(b.delocalized);
        assert_eq!(b.index, 400);

        let ramp = series_from((0..=400).map(|j| 50.0 * (j.min(50)) as f64));
        let b = detect_break_time(&ramp, 10.0).unwrap();
        assert!(!b.delocalized);
        assert!((45..=60).contains(&b.index), "{b:?}");

        let short = series_from((0..=100).map(|j| j as f64));
        assert!(detect_break_time(&short, 10.0).is_err());
    }

    #[test]
    fn smoothing_and_means() {
        let s = series_from((0..10).map(|j| j as f64));
        let sm = s.smoothed(3);
        assert_eq!(sm[0], (0, 0.5));
        assert_eq!(sm[5], (5, 5.0));
        assert_eq!(s.window_mean(2, 4).unwrap(), 3.0);
        let m = DispersionSeries::mean_of(&[s.clone(), series_from((0..10).map(|j| 3.0 * j as f64))]).unwrap();
        assert_eq!(m.entries()[4].dispersion, 8.0);
        assert!(DispersionSeries::mean_of(&[s, series_from([1.0])]).is_err());
    }
}
