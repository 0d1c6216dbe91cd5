//! Property-based invariants across modules.

use std::f64::consts::PI;

use proptest::prelude::*;
use resonance_lab::analysis::{classify, RegimeKind};
use resonance_lab::averaging::{average_order1, rotate, QuadratureSpec};
use resonance_lab::bench::{random_params, BenchFamily, FamilyParams, Regime};
use resonance_lab::campaign::{detect_regime, DetectorWindows, InitSet};
use resonance_lab::hashing::config_hash;
use resonance_lab::integrate::{InitialState, Sample, TrajectoryRecord};
use resonance_lab::model::{angle_distance, wrap_angle};
use resonance_lab::report::{render_svg, AxesSpec, Figure, Panel, Scale, Series};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wrapped_angles_stay_in_range(x in -1e4f64..1e4) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI - 1e-12 && w <= PI + 1e-12);
        prop_assert!(angle_distance(w, x) < 1e-9);
    }

    #[test]
    fn ball_draws_are_inside_and_reproducible(seed in any::<u64>(), radius in 0.0f64..1.0, count in 1usize..20) {
        let set = InitSet::Ball { rho: 1.0, theta: 0.5, radius, count, seed };
        let a = set.states().unwrap();
        prop_assert_eq!(&a, &set.states().unwrap());
        prop_assert_eq!(a.len(), count);
        for s in a {
            let InitialState::Shift { rho, theta } = s else { unreachable!() };
            prop_assert!((rho - 1.0).abs() + (theta - 0.5).abs() <= radius + 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_is_exact(vals in proptest::collection::vec((1.0f64..1e5, -10.0f64..10.0, -10.0f64..10.0), 0..50)) {
        let samples: Vec<Sample> = vals.iter().map(|&(t, a, b)| Sample { t, x1: a, x2: b, rho: a.hypot(b), theta: b.atan2(a) }).collect();
        let rec = TrajectoryRecord::from_samples(samples);
        let back = TrajectoryRecord::from_csv(&rec.to_csv()).unwrap();
        prop_assert_eq!(rec.samples, back.samples);
    }

    #[test]
    fn constant_series_is_steady(c in 0.1f64..5.0, th in -3.0f64..3.0) {
        let samples = (0..2000).map(|i| {
            let t = 1.0 + i as f64 * 0.5;
            Sample { t, x1: 0.0, x2: 0.0, rho: c, theta: th }
        }).collect();
        let obs = detect_regime(&TrajectoryRecord::from_samples(samples), &DetectorWindows::default()).unwrap();
        match obs.amplitude {
            resonance_lab::campaign::AmplitudeVerdict::SteadyAmplitude { rho_inf, .. } => prop_assert!((rho_inf - c).abs() < 1e-12),
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn svg_is_deterministic(ys in proptest::collection::vec(-1e3f64..1e3, 1..100)) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, y)| (1.0 + i as f64, *y)).collect();
        let fig = Figure {
            config_hash: config_hash(&ys),
            panels: vec![Panel { axes: AxesSpec::new("p", "t", "y", Scale::Log), series: vec![Series::new("s", pts)], references: vec![] }],
        };
        prop_assert_eq!(render_svg(&fig).unwrap(), render_svg(&fig).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quadrature_mean_matches_closed_form(seed in any::<u64>(), lock in any::<bool>(), which in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let name = ["ex1", "ex2", "ex3"][which];
        let regime = if lock || name == "ex1" { Regime::Lock } else { Regime::Drift };
        let fam = BenchFamily::new(random_params(name, regime, &mut rng).unwrap(), 4.0).unwrap();
        let exact = fam.closed_form_field().unwrap();
        let avg = average_order1(&rotate(&fam.system).unwrap(), QuadratureSpec::default()).unwrap();
        for r in [0.4, 1.1, 2.7] {
            for psi in [-2.0, 0.3, 1.9] {
                let (l, o) = avg.get(1, r, psi).unwrap();
                let (le, oe) = exact.get_or_zero(1, r, psi).unwrap();
                prop_assert!((l - le).abs() < 1e-10 && (o - oe).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_branches_are_fixed_points(seed in any::<u64>(), which in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let name = ["ex1", "ex2", "ex3"][which];
        let fam = BenchFamily::new(random_params(name, Regime::Lock, &mut rng).unwrap(), 8.0).unwrap();
        let exact = fam.closed_form_field().unwrap();
        let (n, m) = exact.indices().unwrap();
        for fp in fam.predicted_fixed_points() {
            prop_assert!(exact.lambda(n, fp.rho_star, fp.phi_star).unwrap().abs() < 1e-10);
            prop_assert!(exact.omega(m, fp.rho_star, fp.phi_star).unwrap().abs() < 1e-10);
            // Stability needs both effective exponents negative.
            if classify(&fp).kind == RegimeKind::PhaseLockedStable {
                prop_assert!(fp.beta1 < 0.0 && fp.beta2 < 0.0);
            }
        }
    }

    #[test]
    fn config_hash_follows_parameters(a in 0.5f64..2.0, b in 0.5f64..2.0) {
        let p = FamilyParams::Ex2 { b0: a, b1: b, c0: -1.0, c1: -1.0, s1: 0.0 };
        let q = FamilyParams::Ex2 { b0: a, b1: b + 1e-9, c0: -1.0, c1: -1.0, s1: 0.0 };
        prop_assert_eq!(config_hash(&p), config_hash(&p));
        prop_assert_ne!(config_hash(&p), config_hash(&q));
    }
}
