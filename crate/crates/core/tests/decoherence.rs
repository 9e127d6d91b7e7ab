use num_complex::Complex;
use zeno_map::kick_engine::DEFAULT_EPSILON;
use zeno_map::measurement::apply_measurement;
use zeno_map::observables::dispersion;
use zeno_map::{
    BasisWindow, FloquetMap, KickKernel, MeasurementMode, MeasurementSchedule, PhaseRandomizer, QuantumState,
    SpectrumKind, SpectrumModel,
};

#[test]
fn interference_term_averages_to_zero_after_full_measurement() {
    let (k, m0) = (10.0, 500);
    let w = BasisWindow::centered(m0, 200).unwrap();
    let map = FloquetMap::new(
        KickKernel::new(k, DEFAULT_EPSILON).unwrap(),
        SpectrumModel::new(SpectrumKind::Rotator, 1.0, w).unwrap(),
    );
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex::new(0.0, 0.0); w.len()];
    amps[w.offset(m0).unwrap()] = Complex::new(h, 0.0);
    amps[w.offset(m0 + 1).unwrap()] = Complex::new(h, 0.0);
    let start = QuantumState::from_amplitudes(w, amps).unwrap();

    // incoherent part: each component spreads by k²/2 around its own level
    let diagonal = 0.5 * (0.0 + k * k / 2.0) + 0.5 * (1.0 + k * k / 2.0);
    let all = MeasurementSchedule::all(1).unwrap();
    let seeds = 10_000;
    let mut interference = 0.0;
    for seed in 0..seeds {
        let mut s = start.clone();
        apply_measurement(&mut s, &all, &mut PhaseRandomizer::new(seed)).unwrap();
        map.step(&mut s).unwrap();
        interference += dispersion(&s) - diagonal;
    }
    let mean = interference / seeds as f64;
    assert!(mean.abs() < 0.01 * diagonal, "mean interference {mean}");

    // without measurement the cross term is present and fixed
    let mut s = start.clone();
    map.step(&mut s).unwrap();
    assert!((dispersion(&s) - diagonal).abs() > 1e-6);
}

#[test]
fn subset_measurement_keeps_unmeasured_coherence() {
    // measuring only m0 + 5 cannot change the interference between m0 and m0 + 1
    let w = BasisWindow::centered(0, 120).unwrap();
    let map = FloquetMap::new(
        KickKernel::new(4.0, DEFAULT_EPSILON).unwrap(),
        SpectrumModel::new(SpectrumKind::Rotator, 1.0, w).unwrap(),
    );
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex::new(0.0, 0.0); w.len()];
    amps[w.offset(0).unwrap()] = Complex::new(h, 0.0);
    amps[w.offset(1).unwrap()] = Complex::new(h, 0.0);
    let start = QuantumState::from_amplitudes(w, amps).unwrap();
    let sched = MeasurementSchedule::new(MeasurementMode::Subset(vec![5]), 1).unwrap();
    let mut reference = start.clone();
    map.step(&mut reference).unwrap();
    for seed in 0..20 {
        let mut s = start.clone();
        apply_measurement(&mut s, &sched, &mut PhaseRandomizer::new(seed)).unwrap();
        map.step(&mut s).unwrap();
        assert_eq!(dispersion(&s), dispersion(&reference));
    }
}
