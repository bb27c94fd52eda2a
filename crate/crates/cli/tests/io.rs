use std::path::Path;

use cueval::dataset::{Dataset, Manifest, MANIFEST_FILE};
use cueval::pipeline;
use cueval::svg::RED;
use cueval::tables::{
    format_value, labels_to_csv, metrics_to_csv, parse_value, read_labels, read_metrics,
    summary_path, write_labels, LabelRecord,
};
use cueval::{CliError, RunConfig};
use cueval_core::metrics::MetricKind;
use cueval_core::scenario::fixtures::{S2_ID, S5_ID};
use cueval_core::scenario::{
    format_decimal, generate_dataset, golden_fixtures, quantize, GenerationConfig,
};
use cueval_core::{BodyModel, RoadSpec, Trip, VehicleState, VehicleTrack};
use proptest::prelude::*;

fn default_dataset() -> Dataset {
    let cfg = GenerationConfig::default();
    Dataset::from_generated(generate_dataset(&cfg).unwrap(), Some(cfg.seed))
}

#[test]
fn dataset_round_trip_is_exact() {
    for data in [default_dataset(), Dataset::new(golden_fixtures(), None)] {
        let dir = tempfile::tempdir().unwrap();
        data.write(dir.path()).unwrap();
        let back = Dataset::read(dir.path()).unwrap();
        assert_eq!(back, data);
        // and a second write reproduces the files
        let dir2 = tempfile::tempdir().unwrap();
        back.write(dir2.path()).unwrap();
        for e in &data.manifest.trips {
            assert_eq!(
                std::fs::read(dir.path().join(&e.file)).unwrap(),
                std::fs::read(dir2.path().join(&e.file)).unwrap()
            );
        }
    }
}

#[test]
fn trip_files_use_lf_and_plain_decimals() {
    let dir = tempfile::tempdir().unwrap();
    Dataset::new(golden_fixtures(), None)
        .write(dir.path())
        .unwrap();
    let text =
        std::fs::read_to_string(dir.path().join("trips").join(format!("{S2_ID}.csv"))).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("time_idx,vehicle_id,is_sv,p,q,v,phi\n0,0,1,"));
    let body = text.split_once('\n').unwrap().1;
    assert!(body
        .bytes()
        .all(|b| b.is_ascii_digit() || b"-.,\n".contains(&b)));
}

fn write_fixture_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    Dataset::new(golden_fixtures(), None)
        .write(dir.path())
        .unwrap();
    dir
}

fn corrupt(dir: &Path, file: &str, edit: impl Fn(String) -> String) -> CliError {
    let path = dir.join(file);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, edit(text)).unwrap();
    Dataset::read(dir).unwrap_err()
}

#[test]
fn malformed_trip_files_are_rejected() {
    let sv_file = format!("trips/{S5_ID}.csv");
    let cases: Vec<(&str, Box<dyn Fn(String) -> String>)> = vec![
        (&sv_file, Box::new(|t| t.replacen("0,0,1,", "0,0,0,", 1))),
        (
            &sv_file,
            Box::new(|t| t.replacen("\n3,0,1,", "\n4,0,1,", 1)),
        ),
        (&sv_file, Box::new(|t| t.replacen("time_idx", "t", 1))),
        (
            &sv_file,
            Box::new(|t| t.replacen("0,0,1,0,", "0,0,1,x,", 1)),
        ),
        (&sv_file, Box::new(|t| format!("{t}0,7,1,0,0,0,0\n"))),
        (
            MANIFEST_FILE,
            Box::new(|t| t.replacen("\"schema_version\": 1", "\"schema_version\": 9", 1)),
        ),
        (
            MANIFEST_FILE,
            Box::new(|t| t.replacen("\"seed\"", "\"extra\": 1, \"seed\"", 1)),
        ),
    ];
    for (i, (file, edit)) in cases.iter().enumerate() {
        let dir = write_fixture_dir();
        let e = corrupt(dir.path(), file, edit);
        assert_eq!(e.exit_code(), 3, "case {i}: {e}");
    }
    let dir = write_fixture_dir();
    std::fs::remove_file(dir.path().join(&sv_file)).unwrap();
    assert!(matches!(
        Dataset::read(dir.path()),
        Err(CliError::Io { .. })
    ));
}

#[test]
fn empty_dataset_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let data = Dataset::new(Vec::new(), Some(3));
    data.write(dir.path()).unwrap();
    let back = Dataset::read(dir.path()).unwrap();
    assert!(back.trips.is_empty());
    let m: Manifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap())
            .unwrap();
    assert_eq!(m.seed, Some(3));
}

#[test]
fn labels_and_metrics_are_self_consumable() {
    let cfg = RunConfig::default();
    let data = Dataset::new(golden_fixtures(), None);
    let labels = pipeline::label_all(&data, &cfg).unwrap();
    let series = pipeline::metrics_all(&data, &cfg, &MetricKind::ALL).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let lpath = dir.path().join("labels.csv");
    write_labels(&lpath, &labels).unwrap();
    assert_eq!(summary_path(&lpath), dir.path().join("labels_summary.csv"));
    let back = read_labels(&lpath).unwrap();
    assert_eq!(
        back,
        labels.iter().map(LabelRecord::from).collect::<Vec<_>>()
    );
    let (flags, summary) = labels_to_csv(&labels);
    assert_eq!(flags, std::fs::read(&lpath).unwrap());
    assert!(String::from_utf8(summary)
        .unwrap()
        .starts_with("trip_id,first_cu_index,deadline_index,fallback_used\n"));

    let mpath = dir.path().join("metrics.csv");
    std::fs::write(&mpath, metrics_to_csv(&series)).unwrap();
    let mback = read_metrics(&mpath).unwrap();
    assert_eq!(mback.len(), series.len());
    for (a, b) in mback.iter().zip(&series) {
        assert_eq!(a.trip_id, b.trip_id);
        assert_eq!(a.metric, b.metric);
        assert_eq!(a.values.len(), b.values.len());
        assert!(a
            .values
            .iter()
            .zip(&b.values)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    let text = std::fs::read_to_string(&mpath).unwrap();
    assert!(text.contains(",ttc,inf\n"));

    // the report built from files matches the one built in memory
    let report = pipeline::evaluate(&data, &back, &mback, &[0.0, 0.5]).unwrap();
    assert_eq!(report.curves.len(), 6);
    let out = dir.path().join("report");
    report.write(&out).unwrap();
    for m in ["ttc", "pcm", "mprism"] {
        for lead in ["lead_0", "lead_0.5"] {
            let roc = std::fs::read_to_string(out.join(m).join(lead).join("roc.csv")).unwrap();
            assert!(roc.starts_with("threshold,fpr,recall,precision\n"));
            let rows: Vec<Vec<f64>> = roc
                .lines()
                .skip(1)
                .map(|l| l.split(',').map(|x| parse_value(x).unwrap()).collect())
                .collect();
            assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));
        }
    }
}

#[test]
fn value_tokens() {
    assert_eq!(format_value(f64::INFINITY), "inf");
    assert_eq!(parse_value("inf"), Some(f64::INFINITY));
    assert_eq!(parse_value("1e-7"), Some(1e-7));
    for bad in ["Inf", "infinity", "NaN", "nan", "", "1,5"] {
        assert_eq!(parse_value(bad), None, "{bad}");
    }
}

#[test]
fn mismatched_labels_are_rejected() {
    let cfg = RunConfig::default();
    let data = Dataset::new(golden_fixtures(), None);
    let mut labels: Vec<LabelRecord> = pipeline::label_all(&data, &cfg)
        .unwrap()
        .iter()
        .map(LabelRecord::from)
        .collect();
    labels.pop();
    assert!(pipeline::check_labels(&data, &labels).is_err());
}

#[test]
fn committed_config_matches_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    assert_eq!(RunConfig::load(&path).unwrap(), RunConfig::default());
    let text = RunConfig::default().to_toml();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), RunConfig::default());
    assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
}

#[test]
fn config_errors_name_the_key() {
    let e = RunConfig::from_toml("[oracle]\nlookahed_steps = 3\n").unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("lookahed_steps"), "{e}");
    let e = RunConfig::from_toml("[metrics]\n").unwrap_err();
    assert!(e.to_string().contains("metrics"), "{e}");
    let e = RunConfig::from_toml("[oracle]\ndt = 0.0\n").unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let e = RunConfig::from_toml("[evaluation]\nlead_times = [-1.0]\n").unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let cfg = RunConfig::from_toml("[metric.mprism]\ncollision_threshold = 3.0\n").unwrap();
    assert_eq!(cfg.metric.mprism.collision_threshold, 3.0);
}

#[test]
fn timelines_are_deterministic_and_empty_road_is_gray() {
    let cfg = RunConfig::default();
    let fixtures = golden_fixtures();
    let s5 = fixtures.iter().find(|t| t.trip_id == S5_ID).unwrap();
    let a = pipeline::timeline(s5, &cfg).unwrap().render();
    assert_eq!(a, pipeline::timeline(s5, &cfg).unwrap().render());
    assert!(!a.contains(&format!("fill=\"{RED}\"")));
    assert_eq!(a.matches("<rect x=").count(), 4 * s5.len());

    // S2: CU span starts at the first CU index with MPrISM already alarmed
    let s2 = fixtures.iter().find(|t| t.trip_id == S2_ID).unwrap();
    let tl = pipeline::timeline(s2, &cfg).unwrap();
    let first_cu = tl.rows[0].1.iter().position(|&f| f).unwrap();
    let row = |name: &str| &tl.rows.iter().find(|r| r.0 == name).unwrap().1;
    assert!(row("MPrISM")[..=first_cu].iter().any(|&a| a));
    assert!(!row("TTC")[..=first_cu].iter().any(|&a| a));
    assert!(!row("PCM")[..=first_cu].iter().any(|&a| a));
}

fn state() -> impl Strategy<Value = VehicleState> {
    (-1e3..1e3f64, 0.0..12.0f64, 0.0..40.0f64, -0.5..0.5f64)
        .prop_map(|(p, q, v, phi)| VehicleState::new(p, q, v, phi))
}

fn quantized(s: &VehicleState) -> VehicleState {
    VehicleState::new(quantize(s.p), quantize(s.q), quantize(s.v), quantize(s.phi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn arbitrary_trips_round_trip(
        sv in prop::collection::vec(state(), 1..20),
        bvs in prop::collection::vec(prop::collection::vec(state(), 1..20), 0..4),
    ) {
        let body = BodyModel::default();
        let trip = Trip {
            trip_id: "t".into(),
            dt: 0.1,
            sv: VehicleTrack::new(0, true, body, sv.iter().map(quantized).collect()),
            bvs: bvs
                .iter()
                .enumerate()
                .map(|(i, s)| VehicleTrack::new(i as u32 + 1, false, body, s.iter().map(quantized).collect()))
                .collect(),
            crash: false,
            crash_index: None,
            road: RoadSpec::default(),
        };
        let dir = tempfile::tempdir().unwrap();
        let data = Dataset::new(vec![trip], None);
        data.write(dir.path()).unwrap();
        prop_assert_eq!(Dataset::read(dir.path()).unwrap(), data);
        // quantization error stays below a micrometre for these magnitudes
        for s in &sv {
            let q = quantized(s);
            prop_assert!((q.p - s.p).abs() < 1e-6 && (q.q - s.q).abs() < 1e-6);
            prop_assert_eq!(format_decimal(q.p).parse::<f64>().unwrap(), q.p);
        }
    }
}
