use std::io::Write;

use forgetful::datastream::{batched, load_csv, write_csv_file, DriftConfig, Intensity, Schema};
use forgetful::tree::{max_height_for, ForgetfulTree, TreeConfig};

#[test]
fn stationary_stream_is_learnable() {
    let cfg = DriftConfig {
        n_samples: 10_000,
        n_drifts: 0,
        seed: 3,
        ..DriftConfig::default()
    };
    let s = cfg.generate().unwrap();
    let (train, test) = s.split_at(5000);
    let mut tree = ForgetfulTree::new(TreeConfig::new(2));
    tree.build(train, max_height_for(train.len() as f64)).unwrap();
    let acc = tree.evaluate_accuracy(test).unwrap();
    assert!(acc >= 0.95, "{acc}");
}

#[test]
fn drastic_drift_drops_a_frozen_model_to_chance() {
    let cfg = DriftConfig {
        n_samples: 20_000,
        n_drifts: 1,
        intensity: Intensity::Drastic,
        seed: 8,
        ..DriftConfig::default()
    };
    let s = cfg.generate().unwrap();
    let mid = cfg.drift_points()[0];
    let mut tree = ForgetfulTree::new(TreeConfig::new(2));
    tree.build(&s[..mid], max_height_for(mid as f64)).unwrap();
    let before = tree.evaluate_accuracy(&s[mid - 1000..mid]).unwrap();
    let after = tree.evaluate_accuracy(&s[mid..mid + 1000]).unwrap();
    assert!(before > 0.95, "{before}");
    assert!((after - 0.5).abs() <= 0.10, "{after}");
}

#[test]
fn noisy_streams_differ_but_are_seeded() {
    let base = DriftConfig {
        n_samples: 500,
        noise_std: 1.0,
        ..DriftConfig::default()
    };
    let clean = DriftConfig {
        noise_std: 0.0,
        ..base.clone()
    };
    assert_eq!(base.generate().unwrap(), base.generate().unwrap());
    assert_ne!(base.generate().unwrap(), clean.generate().unwrap());
}

#[test]
fn generated_stream_round_trips_through_csv() {
    let cfg = DriftConfig {
        n_samples: 300,
        ..DriftConfig::default()
    };
    let s = cfg.generate().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stream.csv");
    write_csv_file(&path, &s, None).unwrap();
    let header: Vec<String> = (0..10).map(|i| format!("f{i}")).chain(["label".to_string()]).collect();
    let mut schema = Schema::numeric_with_label(&header, "label");
    schema.columns.last_mut().unwrap().values = Some(vec!["0".into(), "1".into()]);
    let d = load_csv(&path, &schema).unwrap();
    assert_eq!(d.samples, s);
    assert_eq!(batched(d.samples, 100).count(), 3);
}

#[test]
fn schema_file_with_categories() {
    let dir = tempfile::tempdir().unwrap();
    let schema_path = dir.path().join("schema.toml");
    std::fs::write(
        &schema_path,
        r#"
[[columns]]
name = "day"
kind = "ignore"

[[columns]]
name = "price"
kind = "numeric"

[[columns]]
name = "color"
kind = "categorical"
values = ["R", "G", "B"]

[[columns]]
name = "trend"
kind = "label"
values = ["DOWN", "UP"]
"#,
    )
    .unwrap();
    let csv_path = dir.path().join("data.csv");
    let mut f = std::fs::File::create(&csv_path).unwrap();
    writeln!(f, "day,price,color,trend\nmon,0.5,B,UP\ntue,0.25,R,DOWN\nwed,1,G,UP").unwrap();
    drop(f);
    let schema = Schema::from_file(&schema_path).unwrap();
    let d = load_csv(&csv_path, &schema).unwrap();
    assert_eq!(d.feature_names, ["price", "color=R", "color=G", "color=B"]);
    let m: Vec<(Vec<f64>, usize)> = d.samples.iter().map(|s| (s.features.clone(), s.label)).collect();
    assert_eq!(
        m,
        vec![
            (vec![0.5, 0.0, 0.0, 1.0], 1),
            (vec![0.25, 1.0, 0.0, 0.0], 0),
            (vec![1.0, 0.0, 1.0, 0.0], 1),
        ]
    );
}

#[test]
fn two_label_columns_rejected() {
    let text = r#"
[[columns]]
name = "a"
kind = "label"
[[columns]]
name = "b"
kind = "label"
"#;
    assert!(Schema::from_toml_str(text).is_err());
}
