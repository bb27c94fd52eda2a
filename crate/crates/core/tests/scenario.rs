use cueval_core::geometry::rectangles_overlap;
use cueval_core::scenario::{
    build_trip, classify_crash, format_decimal, generate_dataset, generate_indexed, quantize,
    CrashType, CrashTypeRules, GenerationConfig, LaneChange, MotionPlan, ScenarioKind,
    TemplateCounts,
};
use cueval_core::VehicleState;
use proptest::prelude::*;

fn dataset() -> Vec<cueval_core::scenario::GeneratedTrip> {
    generate_dataset(&GenerationConfig::default()).unwrap()
}

#[test]
fn default_dataset_shape() {
    let data = dataset();
    assert_eq!(data.len(), 200);
    let crashes = data.iter().filter(|g| g.trip.crash).count();
    assert!(crashes >= 20, "{crashes}");
    for (i, g) in data.iter().enumerate() {
        assert_eq!(g.trip.trip_id, format!("trip_{i:04}"));
        assert_eq!(g.kind, TemplateCounts::default().kind_of(i));
        assert_eq!(g.crash_type.is_some(), g.trip.crash);
        assert!(!g.crash_after_end);
        assert!(g.trip.validate().is_ok());
    }
}

#[test]
fn generation_is_order_independent() {
    let cfg = GenerationConfig::default();
    let data = dataset();
    assert_eq!(data, dataset());
    for i in (0..200).rev().step_by(13) {
        assert_eq!(generate_indexed(&cfg, i).unwrap(), data[i]);
    }
    let other = generate_dataset(&GenerationConfig {
        seed: 1,
        ..GenerationConfig::default()
    })
    .unwrap();
    assert_ne!(other, data);
}

#[test]
fn trips_are_physically_sane() {
    let cfg = GenerationConfig::default();
    let (lo, hi) = cfg.road.bounds();
    let half = 0.5 * cfg.body.width;
    let dt = cfg.dt;
    for g in dataset() {
        for tr in std::iter::once(&g.trip.sv).chain(&g.trip.bvs) {
            assert_eq!(tr.len(), g.trip.len());
            for s in &tr.states {
                assert!(s.v >= 0.0);
                assert!(
                    s.q - half >= lo && s.q + half <= hi,
                    "{} q={}",
                    g.trip.trip_id,
                    s.q
                );
            }
            for w in tr.states.windows(2) {
                let ax = (w[1].v - w[0].v) / dt;
                assert!(
                    (-8.0 - 1e-6..=4.0 + 1e-6).contains(&ax),
                    "{} ax={ax}",
                    g.trip.trip_id
                );
            }
            for w in tr.states.windows(3) {
                let ay = (w[2].q - 2.0 * w[1].q + w[0].q) / (dt * dt);
                assert!(ay.abs() <= 5.0 + 1e-4, "{} ay={ay}", g.trip.trip_id);
            }
        }
    }
}

#[test]
fn crash_flag_matches_first_overlap() {
    let body = GenerationConfig::default().body;
    for g in dataset() {
        let trip = &g.trip;
        let first = (0..trip.len()).find(|&t| {
            trip.bvs
                .iter()
                .any(|b| rectangles_overlap((&trip.sv.states[t], &body), (&b.states[t], &body)))
        });
        assert_eq!(first, trip.crash_index, "{}", trip.trip_id);
        assert_eq!(trip.crash, first.is_some());
        if let Some(c) = first {
            assert_eq!(c, trip.len() - 1);
            assert!(c >= 15);
        }
    }
}

#[test]
fn zero_count_manifest_is_empty() {
    let cfg = GenerationConfig {
        counts: TemplateCounts {
            car_following: 0,
            cut_in: 0,
            dual_merge: 0,
            overtake: 0,
            adjacent_lane_change: 0,
        },
        ..GenerationConfig::default()
    };
    assert!(generate_dataset(&cfg).unwrap().is_empty());
    assert!(generate_indexed(&cfg, 0).is_err());
}

#[test]
fn hand_built_examples() {
    let cfg = GenerationConfig::default();
    let follow = build_trip(
        "follow".into(),
        &MotionPlan::cruise(0.0, 6.0, 25.0),
        &[MotionPlan::cruise(60.0, 6.0, 25.0)],
        &cfg,
    );
    assert!(!follow.trip.crash);
    assert_eq!(follow.trip.len(), cfg.steps() + 1);

    // BV 10 m/s slower cuts in at 3 m/s^2 peak lateral and enters the SV's
    // lane band about 1.45 s later with a 2 m bumper gap
    let cut_in = build_trip(
        "cut_in".into(),
        &MotionPlan::cruise(0.0, 6.0, 25.0),
        &[
            MotionPlan::cruise(21.5, 2.0, 15.0).with_lane_change(LaneChange {
                start: 0.0,
                offset: 4.0,
                accel: 3.0,
            }),
        ],
        &cfg,
    );
    assert!(cut_in.trip.crash);
    let c = cut_in.trip.crash_index.unwrap();
    assert_eq!(c, cut_in.trip.len() - 1);
    assert!((14..=18).contains(&c), "{c}");
    assert!(cut_in.crash_type.is_some());
}

#[test]
fn crash_type_rules() {
    let rules = CrashTypeRules::default();
    let s = VehicleState::new(0.0, 6.0, 20.0, 0.0);
    assert_eq!(
        classify_crash(&s, &VehicleState::new(4.0, 6.2, 10.0, 0.0), &rules),
        CrashType::RearEnd
    );
    assert_eq!(
        classify_crash(&s, &VehicleState::new(1.0, 7.8, 20.0, 0.1), &rules),
        CrashType::Sideswipe
    );
    assert_eq!(
        classify_crash(&s, &VehicleState::new(3.0, 7.0, 20.0, 0.5), &rules),
        CrashType::Angle
    );
    assert_eq!(ScenarioKind::DualMerge.name(), "dual_merge");
    assert_eq!(CrashType::RearEnd.name(), "rear_end");
}

#[test]
fn config_validation() {
    let ok = GenerationConfig::default();
    assert!(ok.validate().is_ok());
    for bad in [
        GenerationConfig {
            dt: 0.0,
            ..ok.clone()
        },
        GenerationConfig {
            duration: 0.01,
            ..ok.clone()
        },
        GenerationConfig {
            end_margin: -1.0,
            ..ok.clone()
        },
        GenerationConfig {
            max_attempts: 0,
            ..ok.clone()
        },
    ] {
        assert!(bad.validate().is_err());
    }
}

proptest! {
    #[test]
    fn decimal_text_round_trips(x in -1e4..1e4f64) {
        let q = quantize(x);
        prop_assert_eq!(format_decimal(q).parse::<f64>().unwrap(), q);
        prop_assert_eq!(quantize(q), q);
        prop_assert!((q - x).abs() <= 1e-8 * x.abs().max(1e-3));
    }
}
