use std::fmt;
use std::str::FromStr;

use crate::classify::{DEFAULT_KNN_EPSILON, DEFAULT_SVM_C};
use crate::eigenspace::{CenteringMode, DEFAULT_EIGEN_THRESHOLD};
use crate::error::{Error, Result};
use crate::modality::{OffsetSpace, DEFAULT_LEVELS};
use crate::wavelet::band_dims;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Classifier {
    #[default]
    Knn,
    Svm,
}

impl Classifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Classifier::Knn => "knn",
            Classifier::Svm => "svm",
        }
    }
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(Classifier::Knn),
            "svm" => Ok(Classifier::Svm),
            other => Err(Error::Config(format!(
                "unknown classifier {other:?} (expected knn or svm)"
            ))),
        }
    }
}

fn offset_space_str(space: OffsetSpace) -> &'static str {
    match space {
        OffsetSpace::PostNegative => "post_negative",
        OffsetSpace::PreNegative => "pre_negative",
    }
}

fn parse_offset_space(s: &str) -> Result<OffsetSpace> {
    match s {
        "post_negative" => Ok(OffsetSpace::PostNegative),
        "pre_negative" => Ok(OffsetSpace::PreNegative),
        other => Err(Error::Config(format!("unknown offset space {other:?}"))),
    }
}

/// Every tunable of the train/query/evaluate pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub resize_w: usize,
    pub resize_h: usize,
    pub wavelet_levels: usize,
    pub centering_mode: CenteringMode,
    pub eigen_threshold: f64,
    pub classifier: Classifier,
    /// Mahalanobis ridge, relative to the largest eigenvalue.
    pub knn_epsilon: f64,
    pub svm_c: f64,
    pub top_n: usize,
    pub offset_space: OffsetSpace,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            resize_w: 50,
            resize_h: 65,
            wavelet_levels: DEFAULT_LEVELS,
            centering_mode: CenteringMode::PerImageScalar,
            eigen_threshold: DEFAULT_EIGEN_THRESHOLD,
            classifier: Classifier::Knn,
            knn_epsilon: DEFAULT_KNN_EPSILON,
            svm_c: DEFAULT_SVM_C,
            top_n: 5,
            offset_space: OffsetSpace::PostNegative,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl PipelineConfig {
    pub const KEYS: [&'static str; 10] = [
        "resize_w",
        "resize_h",
        "wavelet_levels",
        "centering_mode",
        "eigen_threshold",
        "classifier",
        "knn_epsilon",
        "svm_c",
        "top_n",
        "offset_space",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "resize_w" => self.resize_w = parse_num(key, value)?,
            "resize_h" => self.resize_h = parse_num(key, value)?,
            "wavelet_levels" => self.wavelet_levels = parse_num(key, value)?,
            "centering_mode" => {
                self.centering_mode = value
                    .parse()
                    .map_err(|e: Error| Error::Config(e.to_string()))?
            }
            "eigen_threshold" => self.eigen_threshold = parse_num(key, value)?,
            "classifier" => self.classifier = value.parse()?,
            "knn_epsilon" => self.knn_epsilon = parse_num(key, value)?,
            "svm_c" => self.svm_c = parse_num(key, value)?,
            "top_n" => self.top_n = parse_num(key, value)?,
            "offset_space" => self.offset_space = parse_offset_space(value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Value of `key` as written by [`PipelineConfig::set`]. Floats keep 17 significant digits.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "resize_w" => self.resize_w.to_string(),
            "resize_h" => self.resize_h.to_string(),
            "wavelet_levels" => self.wavelet_levels.to_string(),
            "centering_mode" => self.centering_mode.as_str().to_string(),
            "eigen_threshold" => format!("{:.16e}", self.eigen_threshold),
            "classifier" => self.classifier.as_str().to_string(),
            "knn_epsilon" => format!("{:.16e}", self.knn_epsilon),
            "svm_c" => format!("{:.16e}", self.svm_c),
            "top_n" => self.top_n.to_string(),
            "offset_space" => offset_space_str(self.offset_space).to_string(),
            _ => return None,
        })
    }

    /// Checks ranges, including that the wavelet depth fits the resized image.
    pub fn validate(&self) -> Result<()> {
        if self.resize_w == 0 || self.resize_h == 0 {
            return Err(Error::Config(format!(
                "resize dimensions must be positive, got {}x{}",
                self.resize_w, self.resize_h
            )));
        }
        band_dims(self.resize_w, self.resize_h, self.wavelet_levels).map_err(|e| {
            Error::Config(format!(
                "wavelet_levels {} incompatible with {}x{}: {e}",
                self.wavelet_levels, self.resize_w, self.resize_h
            ))
        })?;
        if self.top_n == 0 {
            return Err(Error::Config("top_n must be at least 1".into()));
        }
        if !(self.eigen_threshold >= 0.0 && self.eigen_threshold < 1.0) {
            return Err(Error::Config(format!(
                "eigen_threshold {} outside [0, 1)",
                self.eigen_threshold
            )));
        }
        if !(self.knn_epsilon >= 0.0 && self.knn_epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "knn_epsilon {} must be non-negative",
                self.knn_epsilon
            )));
        }
        if !(self.svm_c > 0.0 && self.svm_c.is_finite()) {
            return Err(Error::Config(format!(
                "svm_c {} must be positive",
                self.svm_c
            )));
        }
        Ok(())
    }

    /// Length of the flattened new-dimension feature vector.
    pub fn feature_dim(&self) -> Result<usize> {
        let (w, h) = band_dims(self.resize_w, self.resize_h, self.wavelet_levels)?;
        Ok(w * h)
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for key in Self::KEYS {
            writeln!(f, "{key} = {}", self.get(key).unwrap_or_default())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = PipelineConfig::default();
        assert_eq!(
            (c.resize_w, c.resize_h, c.wavelet_levels, c.top_n),
            (50, 65, 3, 5)
        );
        assert_eq!(c.feature_dim().unwrap(), 63);
        c.validate().unwrap();
    }

    #[test]
    fn parses_text_and_round_trips() {
        let c = PipelineConfig::from_text(
            "# comment\nresize_w = 64\nresize_h=64 # trailing\nclassifier = svm\ncentering_mode = global_mean_vector\nsvm_c = 2.5\noffset_space = pre_negative\n",
        )
        .unwrap();
        assert_eq!(c.resize_w, 64);
        assert_eq!(c.classifier, Classifier::Svm);
        assert_eq!(c.centering_mode, CenteringMode::GlobalMeanVector);
        assert_eq!(c.offset_space, OffsetSpace::PreNegative);
        assert_eq!(PipelineConfig::from_text(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PipelineConfig::from_text("nope = 1").is_err());
        assert!(PipelineConfig::from_text("resize_w").is_err());
        assert!(PipelineConfig::from_text("top_n = -1").is_err());
        assert!(PipelineConfig::from_text("classifier = tree").is_err());

        let mut c = PipelineConfig {
            wavelet_levels: 7,
            ..PipelineConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.wavelet_levels = 0;
        assert!(c.validate().is_err());
        let c = PipelineConfig {
            top_n: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = PipelineConfig {
            svm_c: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
