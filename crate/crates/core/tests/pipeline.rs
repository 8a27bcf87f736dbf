mod common;

use common::{label, synthetic_face, tone_sketch, write_dataset};
use sketchmatch::pipeline::{
    cmd_evaluate, cmd_train, evaluate_model, preprocess, train_model, Classifier, PipelineConfig,
    SketchModel, NO_SKETCH_WARNING,
};
use sketchmatch::{Error, GrayImage};

fn photos(n: u64, cfg: &PipelineConfig) -> Vec<(String, GrayImage)> {
    (0..n)
        .map(|i| (label(i), preprocess(&synthetic_face(i), cfg).unwrap()))
        .collect()
}

fn sketches(n: u64, cfg: &PipelineConfig) -> Vec<GrayImage> {
    (0..n)
        .map(|i| preprocess(&tone_sketch(&synthetic_face(i), i, 6.0), cfg).unwrap())
        .collect()
}

#[test]
fn photos_as_their_own_sketches_rank_first() {
    let cfg = PipelineConfig::default();
    let gallery = photos(12, &cfg);
    let images: Vec<GrayImage> = gallery.iter().map(|(_, p)| p.clone()).collect();
    let model = train_model(&cfg, &gallery, &images).unwrap();
    assert_eq!(model.eigen.offset().value(), 0.0);
    let pairs: Vec<_> = gallery
        .iter()
        .map(|(l, p)| (l.clone(), p.clone(), p.clone()))
        .collect();
    let report = evaluate_model(&model, &pairs, 12).unwrap();
    assert!(
        report.knn.ranks.iter().all(|&r| r == 1.0),
        "{:?}",
        report.knn.ranks
    );
    assert!(
        report.svm.ranks.iter().all(|&r| r == 1.0),
        "{:?}",
        report.svm.ranks
    );
    assert!(report
        .modality
        .iter()
        .all(|row| row.original == 0.0 && row.new_dimension == 0.0));
}

#[test]
fn tone_sketches_are_recognised() {
    let cfg = PipelineConfig::default();
    let gallery = photos(20, &cfg);
    let probes = sketches(20, &cfg);
    let model = train_model(&cfg, &gallery, &probes).unwrap();
    let pairs: Vec<_> = gallery
        .iter()
        .zip(&probes)
        .map(|((l, p), s)| (l.clone(), p.clone(), s.clone()))
        .collect();
    let report = evaluate_model(&model, &pairs, 5).unwrap();
    assert!(report.knn.rank1() >= 0.9, "{:?}", report.knn.ranks);
    assert!(report.svm.rank1() >= 0.9, "{:?}", report.svm.ranks);
    assert!(model.svm.as_ref().unwrap().max_kkt_violation() < 1e-3);
    for row in &report.modality {
        assert!(row.new_dimension < row.original, "{row:?}");
    }
    for curve in [&report.knn, &report.svm] {
        assert!(curve.ranks.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn default_config_dimensions() {
    let cfg = PipelineConfig::default();
    assert_eq!(cfg.feature_dim().unwrap(), 63);
    let model = train_model(&cfg, &photos(30, &cfg), &sketches(30, &cfg)).unwrap();
    assert_eq!(model.eigen.dim(), 63);
    assert!(model.eigen.components() <= 30);
}

#[test]
fn identical_photos_have_no_eigenspace() {
    let cfg = PipelineConfig::default();
    let face = preprocess(&synthetic_face(1), &cfg).unwrap();
    let gallery = vec![("a".to_string(), face.clone()), ("b".to_string(), face)];
    let err = train_model(&cfg, &gallery, &[]).unwrap_err();
    assert!(matches!(err, Error::NoPositiveEigenvalue), "{err}");
    assert!(err.is_numeric());
}

#[test]
fn missing_sketches_fall_back_to_zero_offset() {
    let cfg = PipelineConfig::default();
    let model = train_model(&cfg, &photos(5, &cfg), &[]).unwrap();
    assert_eq!(model.eigen.offset().value(), 0.0);
    assert_eq!(model.warning.as_deref(), Some(NO_SKETCH_WARNING));

    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 4, false);
    let summary = cmd_train(&cfg, dir.path(), &dir.path().join("m.txt")).unwrap();
    assert_eq!(summary.sketches, 0);
    assert!(summary.warning.is_some());
}

#[test]
fn training_is_deterministic_and_round_trips() {
    let cfg = PipelineConfig::default();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 10, true);
    let (a, b) = (dir.path().join("a.model"), dir.path().join("b.model"));
    cmd_train(&cfg, dir.path(), &a).unwrap();
    cmd_train(&cfg, dir.path(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    assert_eq!(
        SketchModel::load(&a).unwrap().to_text().as_bytes(),
        std::fs::read(&a).unwrap()
    );

    let trained = train_model(&cfg, &photos(10, &cfg), &sketches(10, &cfg)).unwrap();
    let path = dir.path().join("memory.model");
    trained.save(&path).unwrap();
    let loaded = SketchModel::load(&path).unwrap();
    assert_eq!(loaded.to_text(), trained.to_text());
    for i in 0..10 {
        let sketch = tone_sketch(&synthetic_face(i), i, 6.0);
        for classifier in [Classifier::Knn, Classifier::Svm] {
            assert_eq!(
                trained.rank_sketch(&sketch, classifier).unwrap(),
                loaded.rank_sketch(&sketch, classifier).unwrap()
            );
        }
    }
}

#[test]
fn evaluate_writes_both_reports() {
    let cfg = PipelineConfig::default();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 6, true);
    let model = dir.path().join("m.model");
    cmd_train(&cfg, dir.path(), &model).unwrap();
    let report = cmd_evaluate(&model, dir.path(), &dir.path().join("report.txt")).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report.modality.len(), 6);
    for needle in ["pca+knn(mahalanobis)", "pca+svm(linear)"] {
        assert!(text.contains(needle) && csv.contains(needle));
    }
}

#[test]
fn bad_config_is_rejected_before_reading_images() {
    let cfg = PipelineConfig {
        wavelet_levels: 9,
        ..PipelineConfig::default()
    };
    let err = cmd_train(
        &cfg,
        std::path::Path::new("/nonexistent/dataset"),
        std::path::Path::new("/tmp/never"),
    )
    .unwrap_err();
    assert!(err.is_usage(), "{err}");

    let cfg = PipelineConfig {
        wavelet_levels: 0,
        ..PipelineConfig::default()
    };
    assert!(cfg.validate().unwrap_err().is_usage());
}
