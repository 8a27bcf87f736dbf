//! Versioned plain-text model format.
//!
//! ```text
//! SKETCHMATCH-MODEL
//! version 1
//! config <key> <value>        (one line per configuration key)
//! offset_i <float>
//! warning <text>              (optional)
//! dim <D>
//! components <K>
//! global_mean <D floats>      (global centering only)
//! eigenvalues <K floats>
//! eigenvector_rows <D>
//! <K floats>                  (D lines, row i of the D x K basis)
//! gallery <N>
//! label <label>               (N pairs of lines)
//! coords <K floats>
//! svm <C> <classes>           (optional)
//! class <label>               (per class: label, bias, kkt, weights)
//! bias <float>
//! kkt <float>
//! weights <K floats>
//! end
//! ```
//!
//! Floats are written with 17 significant digits so they parse back exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::classify::{LinearSvmModel, SvmClass};
use crate::eigenspace::{CenteringMode, EigenModel, GalleryEntry};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::modality::OffsetI;
use crate::pipeline::config::PipelineConfig;

pub const MAGIC: &str = "SKETCHMATCH-MODEL";
pub const VERSION: u32 = 1;

/// Everything needed to answer queries: preprocessing settings, the PCA
/// model with its gallery, and optionally the trained SVMs.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchModel {
    pub config: PipelineConfig,
    pub eigen: EigenModel,
    pub svm: Option<LinearSvmModel>,
    pub warning: Option<String>,
}

fn push_floats(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:.16e}");
    }
}

fn float_line(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(key);
    if !values.is_empty() {
        out.push(' ');
    }
    push_floats(out, values);
    out.push('\n');
}

impl SketchModel {
    pub fn to_text(&self) -> String {
        let e = &self.eigen;
        let mut out = format!("{MAGIC}\nversion {VERSION}\n");
        for key in PipelineConfig::KEYS {
            let _ = writeln!(
                out,
                "config {key} {}",
                self.config.get(key).unwrap_or_default()
            );
        }
        float_line(&mut out, "offset_i", &[e.offset().value()]);
        if let Some(w) = &self.warning {
            let _ = writeln!(out, "warning {}", w.replace('\n', " "));
        }
        let _ = writeln!(out, "dim {}", e.dim());
        let _ = writeln!(out, "components {}", e.components());
        if let Some(mean) = e.global_mean() {
            float_line(&mut out, "global_mean", mean);
        }
        float_line(&mut out, "eigenvalues", e.eigenvalues());
        let _ = writeln!(out, "eigenvector_rows {}", e.dim());
        for i in 0..e.dim() {
            push_floats(&mut out, e.eigenvectors().row(i));
            out.push('\n');
        }
        let _ = writeln!(out, "gallery {}", e.gallery().len());
        for g in e.gallery() {
            let _ = writeln!(out, "label {}", g.label);
            float_line(&mut out, "coords", &g.coords);
        }
        if let Some(svm) = &self.svm {
            let _ = writeln!(out, "svm {:.16e} {}", svm.c, svm.classes.len());
            for cl in &svm.classes {
                let _ = writeln!(out, "class {}", cl.label);
                float_line(&mut out, "bias", &[cl.bias]);
                float_line(&mut out, "kkt", &[cl.kkt_violation]);
                float_line(&mut out, "weights", &cl.weights);
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader {
            lines: text.lines().enumerate().peekable(),
        };
        let (n, first) = r.next_line()?;
        if first != MAGIC {
            return Err(Error::Model(format!("line {}: bad magic {first:?}", n + 1)));
        }
        let version: u32 = r.keyed_one("version")?;
        if version != VERSION {
            return Err(Error::Model(format!(
                "unsupported version {version} (expected {VERSION})"
            )));
        }
        let mut config = PipelineConfig::default();
        while r.peek_key() == Some("config") {
            let (n, rest) = r.keyed_line("config")?;
            let (key, value) = rest
                .split_once(' ')
                .ok_or_else(|| Error::Model(format!("line {}: malformed config line", n + 1)))?;
            config
                .set(key, value)
                .map_err(|e| Error::Model(format!("line {}: {e}", n + 1)))?;
        }
        let offset =
            OffsetI::new(r.keyed_one("offset_i")?).map_err(|e| Error::Model(e.to_string()))?;
        let warning = if r.peek_key() == Some("warning") {
            Some(r.keyed_line("warning")?.1.to_string())
        } else {
            None
        };
        let dim: usize = r.keyed_one("dim")?;
        let k: usize = r.keyed_one("components")?;
        let global_mean = if r.peek_key() == Some("global_mean") {
            Some(r.keyed_floats("global_mean", dim)?)
        } else {
            None
        };
        let eigenvalues = r.keyed_floats("eigenvalues", k)?;
        let rows: usize = r.keyed_one("eigenvector_rows")?;
        if rows != dim {
            return Err(Error::Model(format!(
                "eigenvector_rows {rows} != dim {dim}"
            )));
        }
        let mut basis = Vec::with_capacity(dim * k);
        for _ in 0..dim {
            let (n, line) = r.next_line()?;
            basis.extend(parse_floats(n, line, k)?);
        }
        let eigenvectors = Matrix::from_row_major(dim, k, basis)?;
        let count: usize = r.keyed_one("gallery")?;
        let mut gallery = Vec::with_capacity(count);
        for _ in 0..count {
            let label = r.keyed_line("label")?.1.to_string();
            let coords = r.keyed_floats("coords", k)?;
            gallery.push(GalleryEntry { label, coords });
        }
        let svm = if r.peek_key() == Some("svm") {
            let (n, rest) = r.keyed_line("svm")?;
            let mut parts = rest.split(' ');
            let c: f64 = parse_token(n, parts.next())?;
            let classes: usize = parse_token(n, parts.next())?;
            let mut out = Vec::with_capacity(classes);
            for _ in 0..classes {
                let label = r.keyed_line("class")?.1.to_string();
                let bias = r.keyed_one("bias")?;
                let kkt_violation = r.keyed_one("kkt")?;
                let weights = r.keyed_floats("weights", k)?;
                out.push(SvmClass {
                    label,
                    weights,
                    bias,
                    kkt_violation,
                });
            }
            Some(LinearSvmModel { c, classes: out })
        } else {
            None
        };
        let (n, last) = r.next_line()?;
        if last != "end" {
            return Err(Error::Model(format!(
                "line {}: expected end, found {last:?}",
                n + 1
            )));
        }
        let centering: CenteringMode = config.centering_mode;
        let eigen = EigenModel::from_parts(
            centering,
            global_mean,
            eigenvalues,
            eigenvectors,
            gallery,
            offset,
        )
        .map_err(|e| Error::Model(e.to_string()))?;
        Ok(SketchModel {
            config,
            eigen,
            svm,
            warning,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Model(format!("bad magic in {}", path.display())))?;
        Self::from_text(&text)
    }
}

fn parse_token<T: std::str::FromStr>(n: usize, tok: Option<&str>) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Model(format!("line {}: expected a number", n + 1)))
}

fn parse_floats(n: usize, line: &str, expected: usize) -> Result<Vec<f64>> {
    let values = line
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(|t| parse_token::<f64>(n, Some(t)))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::Model(format!(
            "line {}: expected {expected} values, found {}",
            n + 1,
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Model(format!("line {}: non-finite value", n + 1)));
    }
    Ok(values)
}

struct Reader<'a, I: Iterator<Item = (usize, &'a str)>> {
    lines: std::iter::Peekable<I>,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Reader<'a, I> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.lines
            .next()
            .ok_or_else(|| Error::Model("unexpected end of file".into()))
    }

    fn peek_key(&mut self) -> Option<&'a str> {
        self.lines
            .peek()
            .map(|(_, l)| l.split(' ').next().unwrap_or(""))
    }

    fn keyed_line(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next_line()?;
        let rest = line
            .strip_prefix(key)
            .and_then(|r| {
                if r.is_empty() {
                    Some(r)
                } else {
                    r.strip_prefix(' ')
                }
            })
            .ok_or_else(|| Error::Model(format!("line {}: expected {key:?}", n + 1)))?;
        Ok((n, rest))
    }

    fn keyed_one<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (n, rest) = self.keyed_line(key)?;
        parse_token(n, Some(rest))
    }

    fn keyed_floats(&mut self, key: &str, expected: usize) -> Result<Vec<f64>> {
        let (n, rest) = self.keyed_line(key)?;
        parse_floats(n, rest, expected)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::svm_train;
    use crate::eigenspace::{train, FeatureVector};

    fn sample(mode: CenteringMode) -> SketchModel {
        let feats: Vec<_> = (0..5)
            .map(|i| {
                FeatureVector::new(
                    format!("id{i}"),
                    (0..6)
                        .map(|j| ((i * 7 + j * 3) % 11) as f64 / 3.0)
                        .collect(),
                )
            })
            .collect();
        let eigen = train(&feats, mode, 1e-10)
            .unwrap()
            .with_offset(OffsetI::new(7.0).unwrap());
        let svm = svm_train(eigen.gallery(), 1.0).unwrap();
        SketchModel {
            config: PipelineConfig {
                centering_mode: mode,
                ..Default::default()
            },
            eigen,
            svm: Some(svm),
            warning: Some("no sketches".into()),
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        for mode in [
            CenteringMode::PerImageScalar,
            CenteringMode::GlobalMeanVector,
        ] {
            let m = sample(mode);
            let text = m.to_text();
            let back = SketchModel::from_text(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_text(), text);
        }
        let mut m = sample(CenteringMode::PerImageScalar);
        m.svm = None;
        m.warning = None;
        assert_eq!(SketchModel::from_text(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn rejects_corruption() {
        let text = sample(CenteringMode::PerImageScalar).to_text();
        assert!(
            matches!(SketchModel::from_text("GARBAGE\n"), Err(Error::Model(m)) if m.contains("bad magic"))
        );
        let v2 = text.replacen("version 1", "version 2", 1);
        assert!(
            matches!(SketchModel::from_text(&v2), Err(Error::Model(m)) if m.contains("version"))
        );
        let cut = &text[..text.len() / 2];
        assert!(SketchModel::from_text(cut).is_err());
        let nan = text.replacen("eigenvalues ", "eigenvalues NaN ", 1);
        assert!(SketchModel::from_text(&nan).is_err());
    }
}
