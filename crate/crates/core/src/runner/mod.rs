//! Config-driven experiment execution: the kicked-rotator measurement
//! scenarios, the two-level Zeno experiment and the classical baseline, all
//! recorded as [`DispersionSeries`] and written out as CSV / SVG.

mod chart;
mod config;
mod output;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use chart::{emit_chart, render_chart};
pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind, ModeChoice, SpectrumChoice};
pub use output::{format_decimal, read_csv, render_csv, write_csv, CSV_HEADER};

use crate::kick_engine::DEFAULT_EPSILON;
use crate::measurement::apply_measurement;
use crate::observables::DispersionEntry;
use crate::two_level::{monte_carlo_trajectory, zeno_phi};
use crate::{
    BasisWindow, ClassicalEnsemble, DispersionSeries, Error, FloquetMap, KickKernel, MeasurementMode,
    MeasurementSchedule, PhaseRandomizer, ProbabilityPair, QuantumState, Result, SpectrumKind, SpectrumModel,
};

/// Added to the run seed for the random-levels spectrum, so the fixed level
/// phases never share a stream with realization 0's measurement phases.
pub const SPECTRUM_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// The four measurement scenarios of the kicked rotator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    /// No measurement.
    A,
    /// The initial level after every kick.
    B,
    /// All levels every 200 kicks.
    C,
    /// All levels after every kick.
    D,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::A, Preset::B, Preset::C, Preset::D];

    pub fn letter(self) -> char {
        match self {
            Preset::A => 'a',
            Preset::B => 'b',
            Preset::C => 'c',
            Preset::D => 'd',
        }
    }

    /// Overwrites the measurement settings of `config`.
    pub fn apply(self, config: &mut ExperimentConfig) {
        config.subset.clear();
        let (mode, period) = match self {
            Preset::A => (ModeChoice::None, 1),
            Preset::B => (ModeChoice::Initial, 1),
            Preset::C => (ModeChoice::All, 200),
            Preset::D => (ModeChoice::All, 1),
        };
        config.measurement_mode = mode;
        config.measurement_period = period;
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Preset::A),
            "b" => Ok(Preset::B),
            "c" => Ok(Preset::C),
            "d" => Ok(Preset::D),
            _ => Err(Error::invalid(format!("unknown preset `{s}` (expected a, b, c or d)"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Everything produced by one [`run_experiment`] call.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    /// Legend text for charts.
    pub label: String,
    /// One series per realization. Zeno runs store none: their trials are
    /// only kept as the aggregate mean.
    pub realizations: Vec<DispersionSeries<f64>>,
    /// Entry-wise mean over realizations, `n_kicks + 1` entries.
    pub aggregate: DispersionSeries<f64>,
    pub wall_time: Duration,
    pub version: &'static str,
}

/// Short description of the measurement settings, e.g. `all/200`.
pub fn mode_label(config: &ExperimentConfig) -> String {
    match config.experiment {
        ExperimentKind::Zeno => return format!("zeno n={}", config.n_kicks),
        ExperimentKind::Classical => return "classical".into(),
        ExperimentKind::Kicked => {}
    }
    match config.measurement_mode {
        ModeChoice::None => "none".into(),
        ModeChoice::Initial => format!("m0/{}", config.measurement_period),
        ModeChoice::Subset => format!("subset({})/{}", config.subset.len(), config.measurement_period),
        ModeChoice::All => format!("all/{}", config.measurement_period),
    }
}

/// Builds the Floquet map for a kicked run.
pub fn build_map(config: &ExperimentConfig) -> Result<FloquetMap<f64>> {
    let window = BasisWindow::centered(config.m0, config.window_halfwidth)?;
    let kind = match config.spectrum {
        SpectrumChoice::Rotator => SpectrumKind::Rotator,
        SpectrumChoice::Linear => SpectrumKind::Linear { omega: config.omega },
        SpectrumChoice::Random => SpectrumKind::RandomLevels {
            seed: config.seed.wrapping_add(SPECTRUM_SEED_OFFSET),
        },
    };
    Ok(FloquetMap::new(
        KickKernel::new(config.k, DEFAULT_EPSILON)?,
        SpectrumModel::new(kind, config.tau, window)?,
    ))
}

pub fn build_schedule(config: &ExperimentConfig) -> Result<MeasurementSchedule> {
    let mode = match config.measurement_mode {
        ModeChoice::None => return Ok(MeasurementSchedule::none()),
        ModeChoice::Initial => MeasurementMode::Subset(vec![config.m0]),
        ModeChoice::Subset => MeasurementMode::Subset(config.subset.clone()),
        ModeChoice::All => MeasurementMode::All,
    };
    MeasurementSchedule::new(mode, config.measurement_period)
}

/// Runs realization `realization` of a kicked experiment from the delta state
/// at `m₀`: kick, free flight, then a measurement if one is due, recording an
/// entry after every period. `observe` sees the state at every recorded `j`.
pub fn simulate_kicked<F>(
    config: &ExperimentConfig,
    map: &FloquetMap<f64>,
    realization: u64,
    mut observe: F,
) -> Result<DispersionSeries<f64>>
where
    F: FnMut(&QuantumState<f64>),
{
    let schedule = build_schedule(config)?;
    schedule.validate_for(map.window())?;
    let mut rng = PhaseRandomizer::for_realization(config.seed, realization);
    let mut state = QuantumState::delta(*map.window());
    let mut series = DispersionSeries::new();
    series.push(DispersionEntry::of(&state))?;
    observe(&state);
    for j in 1..=config.n_kicks {
        map.step(&mut state)?;
        if schedule.should_measure(j) {
            apply_measurement(&mut state, &schedule, &mut rng)?;
        }
        series.push(DispersionEntry::of(&state))?;
        observe(&state);
    }
    Ok(series)
}

fn run_kicked(config: &ExperimentConfig) -> Result<Vec<DispersionSeries<f64>>> {
    let map = build_map(config)?;
    (0..config.realizations)
        .into_par_iter()
        .map(|r| simulate_kicked(config, &map, r, |_| {}))
        .collect()
}

/// Two-level run: `n_kicks` measurement intervals dividing a π-pulse, averaged
/// over `realizations` Monte-Carlo trials. The excited level sits one step
/// above the initial one, so `dispersion = p₂` and `p_m0 = p₁`.
fn run_zeno(config: &ExperimentConfig) -> Result<DispersionSeries<f64>> {
    let phi = zeno_phi::<f64>(config.n_kicks);
    let traj = monte_carlo_trajectory(
        ProbabilityPair::ground(),
        phi,
        config.n_kicks,
        config.realizations,
        config.seed,
    )?;
    let entries = traj
        .iter()
        .enumerate()
        .map(|(j, est)| DispersionEntry {
            j: j as u64,
            dispersion: est.mean.p2,
            norm: est.mean.p1 + est.mean.p2,
            p_m0: est.mean.p1,
        })
        .collect();
    DispersionSeries::from_entries(entries)
}

/// Classical ensemble of `realizations` particles at `I₀ = m₀`.
fn run_classical(config: &ExperimentConfig) -> Result<DispersionSeries<f64>> {
    let count = usize::try_from(config.realizations).map_err(|_| Error::invalid("ensemble too large"))?;
    let mut ens = ClassicalEnsemble::uniform_angles(count, config.m0 as f64, config.k, config.tau, config.seed)?;
    if !ens.is_chaotic() {
        log::warn!("K = {} is below the chaos threshold", ens.stochasticity());
    }
    let entry = |j: u64, e: &ClassicalEnsemble<f64>| DispersionEntry {
        j,
        dispersion: e.dispersion(),
        norm: 1.0,
        p_m0: e.fraction_at_initial(),
    };
    let mut series = DispersionSeries::new();
    series.push(entry(0, &ens))?;
    for j in 1..=config.n_kicks {
        ens.step();
        series.push(entry(j, &ens))?;
    }
    Ok(series)
}

/// Executes `config`. Deterministic in `(config, seed)` regardless of the
/// number of worker threads.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let (realizations, aggregate) = match config.experiment {
        ExperimentKind::Kicked => {
            let all = run_kicked(config)?;
            let mean = DispersionSeries::mean_of(&all)?;
            (all, mean)
        }
        ExperimentKind::Zeno => (Vec::new(), run_zeno(config)?),
        ExperimentKind::Classical => {
            let s = run_classical(config)?;
            (vec![s.clone()], s)
        }
    };
    let wall_time = start.elapsed();
    log::info!(
        "{} run ({}) finished in {:.3} s",
        match config.experiment {
            ExperimentKind::Kicked => "kicked",
            ExperimentKind::Zeno => "zeno",
            ExperimentKind::Classical => "classical",
        },
        mode_label(config),
        wall_time.as_secs_f64()
    );
    Ok(RunRecord {
        config: config.clone(),
        label: mode_label(config),
        realizations,
        aggregate,
        wall_time,
        version: crate::VERSION,
    })
}

/// Runs each preset on top of `base` in parallel; labels are `a: none` etc.
pub fn run_presets(base: &ExperimentConfig, presets: &[Preset]) -> Result<Vec<RunRecord>> {
    presets
        .par_iter()
        .map(|&p| {
            let mut cfg = base.clone();
            p.apply(&mut cfg);
            let mut rec = run_experiment(&cfg)?;
            rec.label = format!("{}: {}", p, rec.label);
            Ok(rec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: ModeChoice) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentKind::Kicked);
        c.m0 = 0;
        c.k = 3.0;
        c.window_halfwidth = 150;
        c.n_kicks = 40;
        c.measurement_mode = mode;
        c
    }

    #[test]
    fn presets_set_measurement() {
        let mut c = small(ModeChoice::None);
        Preset::C.apply(&mut c);
        assert_eq!((c.measurement_mode, c.measurement_period), (ModeChoice::All, 200));
        Preset::B.apply(&mut c);
        assert_eq!(build_schedule(&c).unwrap().mode(), &MeasurementMode::Subset(vec![0]));
        assert_eq!("D".parse::<Preset>().unwrap(), Preset::D);
        assert!("e".parse::<Preset>().is_err());
    }

    #[test]
    fn aggregate_covers_every_kick() {
        let mut c = small(ModeChoice::All);
        c.realizations = 3;
        let rec = run_experiment(&c).unwrap();
        assert_eq!(rec.aggregate.len(), 41);
        assert_eq!(rec.realizations.len(), 3);
        let first = &rec.aggregate.entries()[0];
        assert_eq!((first.j, first.dispersion, first.norm, first.p_m0), (0, 0.0, 1.0, 1.0));
        assert_eq!(rec.version, crate::VERSION);
        // one kick from a delta state gives k²/2 whatever the phases
        assert!((rec.aggregate.entries()[1].dispersion - 4.5).abs() < 1e-10);
    }

    #[test]
    fn runs_are_deterministic() {
        let mut c = small(ModeChoice::All);
        c.realizations = 2;
        c.spectrum = SpectrumChoice::Random;
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(render_csv(&a), render_csv(&b));
        c.seed = 1;
        assert_ne!(render_csv(&a), render_csv(&run_experiment(&c).unwrap()));
    }

    #[test]
    fn narrow_window_overflows() {
        let mut c = small(ModeChoice::None);
        c.k = 10.0;
        c.window_halfwidth = 30;
        assert!(matches!(run_experiment(&c), Err(Error::TruncationOverflow { .. })));
    }

    #[test]
    fn zeno_run_matches_closed_form() {
        let mut c = ExperimentConfig::new(ExperimentKind::Zeno);
        c.n_kicks = 16;
        c.realizations = 20_000;
        let rec = run_experiment(&c).unwrap();
        assert_eq!(rec.aggregate.len(), 17);
        let p2 = rec.aggregate.entries()[16].dispersion;
        let exact = crate::two_level::zeno_survival::<f64>(16).unwrap().p2;
        assert!((p2 - exact).abs() < 0.01, "{p2} vs {exact}");
    }

    #[test]
    fn classical_run_records_ensemble() {
        let mut c = ExperimentConfig::new(ExperimentKind::Classical);
        c.n_kicks = 5;
        c.realizations = 500;
        let rec = run_experiment(&c).unwrap();
        assert_eq!(rec.aggregate.len(), 6);
        assert_eq!(rec.aggregate.entries()[0].p_m0, 1.0);
        assert!(rec.aggregate.entries()[5].dispersion > 50.0);
        assert_eq!(rec.label, "classical");
    }

    #[test]
    fn preset_labels() {
        let recs = run_presets(&small(ModeChoice::None), &[Preset::A, Preset::D]).unwrap();
        assert_eq!(recs[0].label, "a: none");
        assert_eq!(recs[1].label, "d: all/1");
    }
}
