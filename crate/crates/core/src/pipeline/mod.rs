//! End-to-end train / query / evaluate commands.

mod config;
mod dataset;
mod model_file;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{Classifier, PipelineConfig};
pub use dataset::{ingest, load_pgm, DatasetEntry, DatasetManifest, PHOTO_DIR, SKETCH_DIR};
pub use model_file::{SketchModel, MAGIC, VERSION};

use crate::classify::{knn_rank, svm_rank, svm_train, LinearSvmModel, RankedMatches};
use crate::eigenspace::{train_with, FeatureVector, Route, TrainOptions};
use crate::error::{Error, Result};
use crate::evaluate::{
    cmc, cmc_table_csv, cmc_table_text, modality_report, modality_table_csv, modality_table_text,
    CmcCurve, ModalityRow,
};
use crate::image::{resize_bilinear, GrayImage};
use crate::modality::{negative_diagonal, offset_between, to_new_dimension, OffsetI, SourceKind};

pub const NO_SKETCH_WARNING: &str = "no sketches found; offset set to 0";

/// Resizes to the configured working size.
pub fn preprocess(img: &GrayImage, config: &PipelineConfig) -> Result<GrayImage> {
    resize_bilinear(img, config.resize_w, config.resize_h)
}

/// Flattened new-dimension vector of an already preprocessed image.
pub fn feature_values(
    img: &GrayImage,
    kind: SourceKind,
    offset: OffsetI,
    config: &PipelineConfig,
) -> Result<Vec<f64>> {
    Ok(
        to_new_dimension(img, kind, Some(offset), config.wavelet_levels)?
            .img
            .into_pixels(),
    )
}

fn load_preprocessed(path: &Path, config: &PipelineConfig) -> Result<GrayImage> {
    preprocess(&load_pgm(path)?, config)
}

/// Trains a model from in-memory, preprocessed photos and sketches.
pub fn train_model(
    config: &PipelineConfig,
    photos: &[(String, GrayImage)],
    sketches: &[GrayImage],
) -> Result<SketchModel> {
    config.validate()?;
    if photos.len() < 2 {
        return Err(Error::TooFewSamples(photos.len()));
    }
    let photo_images: Vec<GrayImage> = photos.iter().map(|(_, img)| img.clone()).collect();
    let (offset, warning) = if sketches.is_empty() {
        (OffsetI::ZERO, Some(NO_SKETCH_WARNING.to_string()))
    } else {
        (
            offset_between(
                &photo_images,
                sketches,
                config.wavelet_levels,
                config.offset_space,
            )?,
            None,
        )
    };
    let features = photos
        .iter()
        .map(|(label, img)| {
            Ok(FeatureVector::new(
                label.clone(),
                negative_diagonal(img, config.wavelet_levels)?.into_pixels(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let opts = TrainOptions {
        centering: config.centering_mode,
        eigen_threshold: config.eigen_threshold,
        route: Route::Auto,
    };
    let eigen = train_with(&features, &opts)?.with_offset(offset);
    let svm = Some(svm_train(eigen.gallery(), config.svm_c)?);
    Ok(SketchModel {
        config: config.clone(),
        eigen,
        svm,
        warning,
    })
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub photos: usize,
    pub sketches: usize,
    pub dim: usize,
    pub components: usize,
    pub offset: OffsetI,
    pub warning: Option<String>,
}

/// Ingests `dataset`, trains, and writes the model to `model_out`.
pub fn cmd_train(
    config: &PipelineConfig,
    dataset: &Path,
    model_out: &Path,
) -> Result<TrainSummary> {
    config.validate()?;
    let manifest = ingest(dataset)?;
    let photos = manifest
        .entries
        .iter()
        .map(|e| Ok((e.label.clone(), load_preprocessed(&e.photo, config)?)))
        .collect::<Result<Vec<_>>>()?;
    let sketches = manifest
        .entries
        .iter()
        .filter_map(|e| e.sketch.as_deref())
        .map(|p| load_preprocessed(p, config))
        .collect::<Result<Vec<_>>>()?;
    let model = train_model(config, &photos, &sketches)?;
    model.save(model_out)?;
    Ok(TrainSummary {
        photos: photos.len(),
        sketches: sketches.len(),
        dim: model.eigen.dim(),
        components: model.eigen.components(),
        offset: model.eigen.offset(),
        warning: model.warning,
    })
}

impl SketchModel {
    /// Full ranking of the gallery for a raw (not yet preprocessed) sketch.
    pub fn rank_sketch(&self, sketch: &GrayImage, classifier: Classifier) -> Result<RankedMatches> {
        let img = preprocess(sketch, &self.config)?;
        let values = feature_values(&img, SourceKind::Sketch, self.eigen.offset(), &self.config)?;
        self.rank_features(&values, classifier)
    }

    pub fn rank_features(&self, values: &[f64], classifier: Classifier) -> Result<RankedMatches> {
        let coords = self.eigen.project(values)?;
        match classifier {
            Classifier::Knn => knn_rank(&self.eigen, &coords, self.config.knn_epsilon),
            Classifier::Svm => svm_rank(&*self.svm_or_train()?, &coords),
        }
    }

    fn svm_or_train(&self) -> Result<std::borrow::Cow<'_, LinearSvmModel>> {
        match &self.svm {
            Some(svm) => Ok(std::borrow::Cow::Borrowed(svm)),
            None => Ok(std::borrow::Cow::Owned(svm_train(
                self.eigen.gallery(),
                self.config.svm_c,
            )?)),
        }
    }
}

/// Ranks a sketch file against a saved model and keeps the best `top_n`.
pub fn cmd_query(
    model_path: &Path,
    sketch_path: &Path,
    top_n: Option<usize>,
    classifier: Option<Classifier>,
) -> Result<RankedMatches> {
    let model = SketchModel::load(model_path)?;
    let top_n = top_n.unwrap_or(model.config.top_n);
    if top_n == 0 {
        return Err(Error::Config("top_n must be at least 1".into()));
    }
    let sketch = load_pgm(sketch_path)?;
    let ranked = model.rank_sketch(&sketch, classifier.unwrap_or(model.config.classifier))?;
    Ok(ranked.truncated(top_n))
}

pub const KNN_ROW: &str = "pca+knn(mahalanobis)";
pub const SVM_ROW: &str = "pca+svm(linear)";

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub modality: Vec<ModalityRow>,
    pub knn: CmcCurve,
    pub svm: CmcCurve,
}

impl EvaluationReport {
    pub fn text(&self) -> String {
        let mut out = String::from("RMSE between photo/sketch pairs\n");
        out.push_str(&modality_table_text(&self.modality));
        out.push_str("\nCumulative match scores (%)\n");
        out.push_str(&cmc_table_text(&[
            (KNN_ROW, &self.knn),
            (SVM_ROW, &self.svm),
        ]));
        out
    }

    pub fn csv(&self) -> String {
        let mut out = modality_table_csv(&self.modality);
        out.push('\n');
        out.push_str(&cmc_table_csv(&[
            (KNN_ROW, &self.knn),
            (SVM_ROW, &self.svm),
        ]));
        out
    }
}

/// Evaluates a model on in-memory, preprocessed photo/sketch pairs.
pub fn evaluate_model(
    model: &SketchModel,
    pairs: &[(String, GrayImage, GrayImage)],
    max_rank: usize,
) -> Result<EvaluationReport> {
    if pairs.is_empty() {
        return Err(Error::Dataset("no paired sketches to evaluate".into()));
    }
    let modality = modality_report(pairs, model.eigen.offset(), model.config.wavelet_levels)?;
    let svm = model.svm_or_train()?;
    let mut knn_lists = Vec::with_capacity(pairs.len());
    let mut svm_lists = Vec::with_capacity(pairs.len());
    for (label, _, sketch) in pairs {
        let values = feature_values(
            sketch,
            SourceKind::Sketch,
            model.eigen.offset(),
            &model.config,
        )?;
        let coords = model.eigen.project(&values)?;
        knn_lists.push((
            label.clone(),
            knn_rank(&model.eigen, &coords, model.config.knn_epsilon)?,
        ));
        svm_lists.push((label.clone(), svm_rank(&svm, &coords)?));
    }
    Ok(EvaluationReport {
        modality,
        knn: cmc(&knn_lists, max_rank)?,
        svm: cmc(&svm_lists, max_rank)?,
    })
}

/// Paths of the text and comma-separated reports for a `--report` path.
pub fn report_paths(report: &Path) -> (PathBuf, PathBuf) {
    if report.extension().and_then(|e| e.to_str()) == Some("csv") {
        (report.with_extension("txt"), report.to_path_buf())
    } else {
        (report.to_path_buf(), report.with_extension("csv"))
    }
}

/// Runs the modality RMSE report and CMC scoring over every paired sketch in `dataset`.
pub fn cmd_evaluate(model_path: &Path, dataset: &Path, report: &Path) -> Result<EvaluationReport> {
    let model = SketchModel::load(model_path)?;
    let manifest = ingest(dataset)?;
    let pairs = manifest
        .entries
        .iter()
        .filter_map(|e| e.sketch.as_ref().map(|s| (e, s)))
        .map(|(e, s)| {
            Ok((
                e.label.clone(),
                load_preprocessed(&e.photo, &model.config)?,
                load_preprocessed(s, &model.config)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let result = evaluate_model(&model, &pairs, model.config.top_n)?;
    let (text_path, csv_path) = report_paths(report);
    fs::write(&text_path, result.text()).map_err(|e| Error::io(&text_path, e))?;
    fs::write(&csv_path, result.csv()).map_err(|e| Error::io(&csv_path, e))?;
    Ok(result)
}
