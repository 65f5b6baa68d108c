use std::path::Path;

use proptest::prelude::*;

use urbansynth::config::{load_config, Overrides, ScenarioConfig};
use urbansynth::dataset::{
    decode_depth, decode_flow, encode_depth, encode_flow, read_png, Manifest, ANNOTATIONS_CSV,
};
use urbansynth::image::Raster;
use urbansynth::model::CLASS_COUNT;
use urbansynth::pipeline::{preview_frame, run_pipeline, PipelineError};
use urbansynth::truth::{FlowField, FlowVector};

fn onboard(frames: u64) -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/presets/onboard.toml");
    load_config(
        &path,
        &Overrides {
            frames: Some(frames),
            ..Overrides::default()
        },
    )
    .unwrap()
}

#[test]
fn small_run_produces_consistent_outputs() {
    let cfg = onboard(4);
    let dir = tempfile::tempdir().unwrap();
    let mut progress = Vec::new();
    let summary = run_pipeline(&cfg, dir.path(), Some(2), |n| progress.push(n)).unwrap();
    assert_eq!(progress.last(), Some(&4));

    let m = Manifest::read(&dir.path().join("manifest.toml")).unwrap();
    assert_eq!(m, summary.manifest);
    assert_eq!(m.classes.len(), CLASS_COUNT);
    assert_eq!(m.classes.iter().map(|c| c.pixels).sum::<u64>(), 4 * 500 * 375);
    assert_eq!(m.config_hash, cfg.hash());

    let mut rdr = csv::Reader::from_path(dir.path().join(ANNOTATIONS_CSV)).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["frame", "track_id", "class_id", "x_min", "y_min", "x_max", "y_max", "occlusion_rate", "truncated"]
    );
    let mut keys = Vec::new();
    for row in rdr.records() {
        let row = row.unwrap();
        let frame: u64 = row[0].parse().unwrap();
        let track: u32 = row[1].parse().unwrap();
        let x: Vec<f64> = (3..8).map(|i| row[i].parse().unwrap()).collect();
        assert!(x[2] - x[0] >= 15.0 - 1e-3 && x[3] - x[1] >= 10.0 - 1e-3);
        assert!(x[4] <= 0.75);
        assert!(["0", "1"].contains(&&row[8]));
        keys.push((frame, track));
    }
    assert!(!keys.is_empty());
    assert!(keys.windows(2).all(|w| w[0] < w[1]), "rows sorted by (frame, track_id)");
    assert_eq!(m.classes.iter().map(|c| c.boxes).sum::<u64>(), keys.len() as u64);

    // frame 0 has no predecessor; later frames carry valid flow
    let flow0 = decode_flow(&read_png(&dir.path().join("flow/000000.png")).unwrap());
    assert!(flow0.data.iter().all(|f| !f.valid));
    let flow1 = decode_flow(&read_png(&dir.path().join("flow/000001.png")).unwrap());
    assert!(flow1.data.iter().filter(|f| f.valid).count() > 1000);
}

#[test]
fn preview_rejects_times_outside_capture() {
    let cfg = onboard(10);
    let dir = tempfile::tempdir().unwrap();
    for t in [-0.01, 1.0, f64::NAN] {
        assert!(matches!(
            preview_frame(&cfg, t, dir.path()),
            Err(PipelineError::TimeOutOfRange { .. })
        ));
    }
    assert_eq!(preview_frame(&cfg, 0.0, dir.path()).unwrap().frame, 0);
    assert_eq!(preview_frame(&cfg, 0.99, dir.path()).unwrap().frame, 9);
}

proptest! {
    #[test]
    fn encoders_are_idempotent(
        d in prop::collection::vec(0.0f64..=1.0, 12),
        f in prop::collection::vec((-600.0f64..600.0, -600.0f64..600.0, any::<bool>()), 12),
    ) {
        let depth = encode_depth(&Raster::from_vec(4, 3, d));
        prop_assert_eq!(&encode_depth(&decode_depth(&depth)), &depth);
        let flow: FlowField = Raster::from_vec(4, 3, f.into_iter().map(|(u, v, valid)| FlowVector { u, v, valid }).collect());
        let (enc, _) = encode_flow(&flow);
        prop_assert_eq!(&encode_flow(&decode_flow(&enc)).0, &enc);
    }
}
