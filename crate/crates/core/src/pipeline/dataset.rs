use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::pgm::read_pgm;

pub const PHOTO_DIR: &str = "photos";
pub const SKETCH_DIR: &str = "sketches";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub label: String,
    pub photo: PathBuf,
    pub sketch: Option<PathBuf>,
}

/// Photos and optional sketches paired by file stem, sorted by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<DatasetEntry>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sketch_count(&self) -> usize {
        self.entries.iter().filter(|e| e.sketch.is_some()).count()
    }
}

/// Reads one PGM file, tagging errors with its path.
pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_pgm(&bytes).map_err(|e| Error::ImageFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

// Sorted (stem, path) pairs of the *.pgm files directly inside `dir`.
fn pgm_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() || path.extension().and_then(|e| e.to_str()) != Some("pgm") {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| {
                Error::Dataset(format!("{}: file name is not valid UTF-8", path.display()))
            })?
            .to_string();
        out.push((stem, path));
    }
    out.sort();
    Ok(out)
}

/// Scans `<root>/photos/*.pgm` and `<root>/sketches/*.pgm`, validating every file.
pub fn ingest(root: &Path) -> Result<DatasetManifest> {
    if !root.is_dir() {
        return Err(Error::Dataset(format!(
            "{}: not a directory",
            root.display()
        )));
    }
    let photo_dir = root.join(PHOTO_DIR);
    if !photo_dir.is_dir() {
        return Err(Error::Dataset(format!(
            "{}: missing photos directory",
            photo_dir.display()
        )));
    }
    let photos = pgm_files(&photo_dir)?;
    if photos.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: no .pgm photos",
            photo_dir.display()
        )));
    }
    let sketch_dir = root.join(SKETCH_DIR);
    let sketches = if sketch_dir.is_dir() {
        pgm_files(&sketch_dir)?
    } else {
        Vec::new()
    };

    let mut entries = Vec::with_capacity(photos.len());
    for (label, photo) in photos {
        if label.chars().any(|c| c.is_whitespace() || c == ',') {
            return Err(Error::Dataset(format!(
                "{}: labels may not contain whitespace or commas",
                photo.display()
            )));
        }
        load_pgm(&photo)?;
        let sketch = match sketches.binary_search_by(|(s, _)| s.as_str().cmp(&label)) {
            Ok(i) => {
                let path = sketches[i].1.clone();
                load_pgm(&path)?;
                Some(path)
            }
            Err(_) => None,
        };
        entries.push(DatasetEntry {
            label,
            photo,
            sketch,
        });
    }
    Ok(DatasetManifest {
        root: root.to_path_buf(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgm::write_pgm;

    fn put(dir: &Path, name: &str) {
        fs::create_dir_all(dir).unwrap();
        let img = GrayImage::filled(4, 4, 10.0).unwrap();
        fs::write(dir.join(name), write_pgm(&img)).unwrap();
    }

    #[test]
    fn pairs_by_basename() {
        let tmp = tempfile::tempdir().unwrap();
        put(&tmp.path().join("photos"), "b.pgm");
        put(&tmp.path().join("photos"), "a.pgm");
        put(&tmp.path().join("sketches"), "a.pgm");
        put(&tmp.path().join("sketches"), "b.pgm");
        fs::write(tmp.path().join("photos/readme.txt"), "ignored").unwrap();
        let m = ingest(tmp.path()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.entries[0].label, "a");
        assert_eq!(m.sketch_count(), 2);
    }

    #[test]
    fn sketch_optional() {
        let tmp = tempfile::tempdir().unwrap();
        put(&tmp.path().join("photos"), "a.pgm");
        fs::create_dir_all(tmp.path().join("sketches")).unwrap();
        let m = ingest(tmp.path()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.entries[0].sketch, None);
    }

    #[test]
    fn errors() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(ingest(tmp.path()), Err(Error::Dataset(_))));
        assert!(matches!(
            ingest(&tmp.path().join("nothing")),
            Err(Error::Dataset(_))
        ));
        fs::create_dir_all(tmp.path().join("photos")).unwrap();
        assert!(matches!(ingest(tmp.path()), Err(Error::Dataset(_))));
        fs::write(tmp.path().join("photos/bad.pgm"), b"P2 1 1 255\n0").unwrap();
        match ingest(tmp.path()) {
            Err(Error::ImageFile { path, .. }) => assert!(path.ends_with("bad.pgm")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
