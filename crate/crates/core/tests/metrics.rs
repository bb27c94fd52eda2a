use cueval_core::metrics::mprism::{mprism_pair_value, mprttc};
use cueval_core::metrics::pcm::{pcm, pcm_corridor, PcmConfig};
use cueval_core::metrics::ttc::{find_leading_vehicle, ttc, ttc_pair, TtcConfig};
use cueval_core::metrics::{
    evaluate_metric, MetricKind, MetricSuite, MetricsConfig, MprismConfig, Polarity,
};
use cueval_core::oracle::ManeuverFamily;
use cueval_core::scenario::golden_fixtures;
use cueval_core::{BodyModel, RoadSpec, Trip, VehicleState, VehicleTrack};
use proptest::prelude::*;

fn scene(sv: VehicleState, bvs: &[(u32, VehicleState)]) -> Trip {
    let body = BodyModel::default();
    Trip {
        trip_id: "scene".into(),
        dt: 0.1,
        sv: VehicleTrack::new(0, true, body, vec![sv]),
        bvs: bvs
            .iter()
            .map(|(id, s)| VehicleTrack::new(*id, false, body, vec![*s]))
            .collect(),
        crash: false,
        crash_index: None,
        road: RoadSpec::default(),
    }
}

fn st(p: f64, q: f64, v: f64) -> VehicleState {
    VehicleState::new(p, q, v, 0.0)
}

#[test]
fn metric_specs() {
    let ttc = MetricKind::Ttc.spec();
    assert_eq!(ttc.polarity, Polarity::AlarmWhenLeq);
    assert_eq!(ttc.default_threshold, 1.0);
    assert_eq!(ttc.sweep.len(), 40);
    assert!((ttc.sweep[0] - 0.1).abs() < 1e-12 && (ttc.sweep[39] - 4.0).abs() < 1e-12);
    assert_eq!(MetricKind::Mprism.spec().sweep, ttc.sweep);
    let pcm = MetricKind::Pcm.spec();
    assert_eq!(pcm.polarity, Polarity::AlarmWhenGeq);
    assert_eq!(pcm.default_threshold, 8.0);
    assert_eq!(pcm.sweep.len(), 10);
    assert!((pcm.sweep[0] - 0.8).abs() < 1e-12 && (pcm.sweep[9] - 8.0).abs() < 1e-12);
    assert_eq!(MetricKind::Ttc.sentinel(), f64::INFINITY);
    assert_eq!(MetricKind::Pcm.sentinel(), 0.0);
    assert!(Polarity::AlarmWhenLeq.alarms(1.0, 1.0) && Polarity::AlarmWhenGeq.alarms(8.0, 8.0));
}

#[test]
fn ttc_examples() {
    let cfg = TtcConfig::default();
    let trip = scene(st(20.0, 2.0, 20.0), &[(1, st(50.0, 2.0, 10.0))]);
    assert_eq!(find_leading_vehicle(&trip, 0, &cfg), Some(1));
    assert!((ttc(&trip, 0, &cfg) - 2.5).abs() < 1e-12);

    let faster = scene(st(20.0, 2.0, 20.0), &[(1, st(50.0, 2.0, 25.0))]);
    assert_eq!(ttc(&faster, 0, &cfg), f64::INFINITY);
    assert_eq!(ttc(&scene(st(0.0, 2.0, 20.0), &[]), 0, &cfg), f64::INFINITY);

    let adjacent = scene(st(20.0, 2.0, 20.0), &[(1, st(40.0, 6.0, 0.0))]);
    assert_eq!(find_leading_vehicle(&adjacent, 0, &cfg), None);
    let behind = scene(st(20.0, 2.0, 20.0), &[(1, st(10.0, 2.0, 0.0))]);
    assert_eq!(find_leading_vehicle(&behind, 0, &cfg), None);
}

#[test]
fn nearest_leader_wins_and_ties_go_to_lower_id() {
    let cfg = TtcConfig::default();
    let two = scene(
        st(0.0, 2.0, 20.0),
        &[(1, st(60.0, 2.0, 0.0)), (2, st(30.0, 3.0, 0.0))],
    );
    assert_eq!(find_leading_vehicle(&two, 0, &cfg), Some(2));
    let tie = scene(
        st(0.0, 2.0, 20.0),
        &[(7, st(30.0, 1.0, 0.0)), (3, st(30.0, 3.0, 0.0))],
    );
    assert_eq!(find_leading_vehicle(&tie, 0, &cfg), Some(3));
}

#[test]
fn pcm_corridor_examples() {
    let cfg = PcmConfig::default();
    let k = cfg.horizon;
    let empty = pcm_corridor(&scene(st(0.0, 6.0, 20.0), &[]), 0, &cfg);
    assert!(empty.front.iter().all(|f| *f == f64::INFINITY));
    assert!(empty.left.iter().all(|l| *l == 11.0));
    assert!(empty.right.iter().all(|r| *r == 1.0));

    let leader = pcm_corridor(
        &scene(st(0.0, 6.0, 20.0), &[(1, st(30.0, 6.0, 15.0))]),
        0,
        &cfg,
    );
    for i in 0..k {
        let want = 30.0 + 15.0 * 0.1 * (i + 1) as f64 - 5.0;
        assert!((leader.front[i] - want).abs() < 1e-9);
    }

    // a BV alongside in the left lane pinches the left bound
    let side = pcm_corridor(
        &scene(st(0.0, 6.0, 20.0), &[(1, st(1.0, 10.0, 20.0))]),
        0,
        &cfg,
    );
    assert!(side.left.iter().all(|l| (l - 8.0).abs() < 1e-9));
    assert!(side.front.iter().all(|f| *f == f64::INFINITY));

    // vehicles behind are ignored
    let behind = pcm_corridor(
        &scene(st(0.0, 6.0, 20.0), &[(1, st(-1.0, 10.0, 20.0))]),
        0,
        &cfg,
    );
    assert_eq!(behind, empty);
}

#[test]
fn pcm_examples() {
    let cfg = PcmConfig::default();
    let out = pcm(&scene(st(0.0, 6.0, 25.0), &[]), 0, &cfg)
        .unwrap()
        .unwrap();
    assert!(out.max_accel.abs() <= 1e-6);

    // stopped traffic across every lane 10 m ahead
    let wall: Vec<(u32, VehicleState)> = (0..3)
        .map(|l| (l + 1, st(10.0, 2.0 + 4.0 * l as f64, 0.0)))
        .collect();
    let out = pcm(&scene(st(0.0, 6.0, 25.0), &wall), 0, &cfg)
        .unwrap()
        .unwrap();
    assert_eq!(out.max_accel, 8.0);
    assert!(out.max_slack > 1e-3);

    // a slower leader 25 m ahead needs some braking, well under the cap
    let lead = pcm(
        &scene(st(0.0, 6.0, 25.0), &[(1, st(25.0, 6.0, 15.0))]),
        0,
        &cfg,
    )
    .unwrap()
    .unwrap();
    assert!(lead.max_accel > 0.0 && lead.max_accel < 8.0, "{lead:?}");
}

#[test]
fn mprism_examples() {
    let cfg = MprismConfig::default();
    let a = st(0.0, 6.0, 20.0);
    assert!(mprism_pair_value(&a, &a, 1, &cfg).unwrap() < cfg.collision_threshold);

    let near = st(0.0, 6.0, 5.0);
    let far = st(100.0, 6.0, 5.0);
    for n in 1..=cfg.horizon {
        assert!(mprism_pair_value(&near, &far, n, &cfg).unwrap() >= 85.0);
    }
    assert_eq!(
        mprttc(&scene(near, &[(1, far)]), 0, &cfg).unwrap(),
        f64::INFINITY
    );
    assert_eq!(mprttc(&scene(near, &[]), 0, &cfg).unwrap(), f64::INFINITY);
}

#[test]
fn mprttc_is_monotone_in_threshold() {
    for trip in golden_fixtures() {
        let series: Vec<Vec<f64>> = [2.0, 3.0, 4.0]
            .iter()
            .map(|&c| {
                let cfg = MetricsConfig {
                    mprism: MprismConfig {
                        collision_threshold: c,
                        ..MprismConfig::default()
                    },
                    ..MetricsConfig::default()
                };
                evaluate_metric(&trip, MetricKind::Mprism, &cfg)
                    .unwrap()
                    .values
            })
            .collect();
        for t in 0..trip.len() {
            assert!(
                series[1][t] <= series[0][t] && series[2][t] <= series[1][t],
                "{} t={t}",
                trip.trip_id
            );
        }
    }
}

#[test]
fn finer_pov_grid_only_adds_alarms() {
    let fine_pov = MprismConfig {
        pov_grid: ManeuverFamily::Fine,
        ..MprismConfig::default()
    };
    let both_fine = MprismConfig {
        sv_grid: ManeuverFamily::Fine,
        ..fine_pov
    };
    let std_cfg = MprismConfig::default();
    for trip in golden_fixtures() {
        for t in 0..trip.len() {
            let sv = trip.sv.states[t];
            for bv in &trip.bvs {
                let pov = bv.state_at(t, trip.dt);
                for n in 1..=std_cfg.horizon {
                    let s = mprism_pair_value(&sv, &pov, n, &std_cfg).unwrap();
                    let p = mprism_pair_value(&sv, &pov, n, &fine_pov).unwrap();
                    let f = mprism_pair_value(&sv, &pov, n, &both_fine).unwrap();
                    assert!(p <= s + 1e-9, "{} t={t} n={n}", trip.trip_id);
                    assert!(f <= s + 0.5, "{} t={t} n={n}", trip.trip_id);
                }
            }
            let m_std = mprttc(&trip, t, &std_cfg).unwrap();
            let m_fine = mprttc(&trip, t, &fine_pov).unwrap();
            if m_std <= 1.0 {
                assert!(m_fine <= 1.0);
            }
        }
    }
}

#[test]
fn series_cover_the_trip_and_stop_at_the_crash() {
    let suite = MetricSuite::new(&MetricsConfig::default()).unwrap();
    for trip in golden_fixtures() {
        for kind in MetricKind::ALL {
            let s = suite.evaluate(&trip, kind);
            assert_eq!(s.values.len(), trip.len());
            assert!(s.unavailable.is_empty());
            assert!(s
                .values
                .iter()
                .all(|v| v.is_finite() || *v == kind.sentinel()));
            if kind == MetricKind::Pcm {
                assert!(s.values.iter().all(|v| (0.0..=8.0).contains(v)));
            }
            let again = suite.evaluate(&trip, kind);
            assert_eq!(
                s.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                again.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }
    let mut cut = golden_fixtures()[1].clone();
    let c = cut.crash_index.unwrap();
    cut.sv.states.push(cut.sv.states[c]);
    let s = suite.evaluate(&cut, MetricKind::Ttc);
    assert_eq!(s.values[c + 1], f64::INFINITY);
}

proptest! {
    #[test]
    fn ttc_translation_invariance(
        lp in 6.0..100.0f64, lv in 0.0..30.0f64, v in 0.0..40.0f64, shift in -1e3..1e3f64,
    ) {
        let a = ttc_pair(lp, lv, 0.0, v, 5.0);
        let b = ttc_pair(lp + shift, lv, shift, v, 5.0);
        if a.is_finite() {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        } else {
            prop_assert_eq!(b, f64::INFINITY);
        }
    }

    #[test]
    fn ttc_scales_with_closing_speed(
        lp in 6.0..100.0f64, lv in 0.0..30.0f64, dv in 0.1..20.0f64, c in 0.1..10.0f64,
    ) {
        let a = ttc_pair(lp, lv, 0.0, lv + dv, 5.0);
        let b = ttc_pair(lp, lv, 0.0, lv + c * dv, 5.0);
        prop_assert!((b - a / c).abs() <= 1e-9 * (a / c).abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pcm_stays_within_the_cap(
        v in 0.0..35.0f64, q in 1.5..10.5f64,
        bvs in prop::collection::vec((0.5..60.0f64, 0.0..12.0f64, 0.0..35.0f64), 0..3),
    ) {
        let bvs: Vec<(u32, VehicleState)> = bvs
            .iter()
            .enumerate()
            .map(|(i, (p, q, v))| (i as u32 + 1, st(*p, *q, *v)))
            .collect();
        let out = pcm(&scene(st(0.0, q, v), &bvs), 0, &PcmConfig::default()).unwrap();
        if let Some(o) = out {
            prop_assert!((0.0..=8.0).contains(&o.max_accel));
        }
    }
}
