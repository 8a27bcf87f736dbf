//! Brings photos and sketches into the shared "new dimension" representation.
//!
//! The deepest diagonal Haar band is min-max rescaled to `[0, 255]`, inverted
//! (`255 - v`), and for sketches shifted by a dataset-level integer offset that
//! closes the gap between the photo and sketch mean intensities.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::wavelet::decompose;

/// Number of Haar levels used for the new-dimension band.
pub const DEFAULT_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Photo,
    Sketch,
}

/// Which representation the offset means are taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffsetSpace {
    /// After inversion (the images that are actually compared).
    #[default]
    PostNegative,
    /// The rescaled band before inversion.
    PreNegative,
}

/// Non-negative integer intensity offset added to sketches.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OffsetI(f64);

impl OffsetI {
    pub const ZERO: OffsetI = OffsetI(0.0);

    /// Rounds half away from zero; rejects negative or non-finite input.
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidOffset(value));
        }
        Ok(OffsetI(value.round()))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewDimensionImage {
    pub img: GrayImage,
    pub source_kind: SourceKind,
}

/// Per-image linear map of the value range onto `[0, 255]`; constant input maps to zeros.
pub fn rescale_to_byte_range(band: &GrayImage) -> GrayImage {
    let (lo, hi) = band.min_max();
    let span = hi - lo;
    if span <= 0.0 {
        return GrayImage::filled(band.width(), band.height(), 0.0).expect("dims already valid");
    }
    band.map(|v| ((v - lo) * 255.0 / span).clamp(0.0, 255.0))
        .expect("finite range gives finite output")
}

/// `255 - v` per pixel. Values must already lie in `[0, 255]`.
pub fn negative(img: &GrayImage) -> Result<GrayImage> {
    if let Some(&bad) = img.pixels().iter().find(|v| !(0.0..=255.0).contains(*v)) {
        return Err(Error::ValueOutOfRange(bad));
    }
    img.map(|v| 255.0 - v)
}

fn pooled_mean(images: &[GrayImage]) -> f64 {
    let (sum, count) = images.iter().fold((0.0, 0usize), |(s, n), img| {
        (s + img.pixels().iter().sum::<f64>(), n + img.pixels().len())
    });
    sum / count as f64
}

/// `|mean(training pixels) - mean(testing pixels)|`, rounded to an integer.
///
/// Means pool every pixel of every image, summed in index order.
pub fn compute_offset(training: &[GrayImage], testing: &[GrayImage]) -> Result<OffsetI> {
    if training.is_empty() {
        return Err(Error::EmptySet("training"));
    }
    if testing.is_empty() {
        return Err(Error::EmptySet("testing"));
    }
    OffsetI::new((pooled_mean(training) - pooled_mean(testing)).abs())
}

/// Adds the offset to every pixel, without clamping.
pub fn apply_offset(img: &GrayImage, offset: OffsetI) -> GrayImage {
    img.map(|v| v + offset.value())
        .expect("finite offset keeps pixels finite")
}

/// Rescaled diagonal band at depth `levels`, before inversion.
pub fn rescaled_diagonal(img: &GrayImage, levels: usize) -> Result<GrayImage> {
    let pyramid = decompose(img, levels)?;
    Ok(rescale_to_byte_range(pyramid.diagonal_band(levels)?))
}

/// Inverted rescaled diagonal band; the common photo/sketch transform without the offset.
pub fn negative_diagonal(img: &GrayImage, levels: usize) -> Result<GrayImage> {
    negative(&rescaled_diagonal(img, levels)?)
}

/// Full new-dimension transform. Sketches require `offset`; photos ignore it.
pub fn to_new_dimension(
    img: &GrayImage,
    kind: SourceKind,
    offset: Option<OffsetI>,
    levels: usize,
) -> Result<NewDimensionImage> {
    let base = negative_diagonal(img, levels)?;
    let img = match kind {
        SourceKind::Photo => base,
        SourceKind::Sketch => apply_offset(&base, offset.ok_or(Error::MissingOffset)?),
    };
    Ok(NewDimensionImage {
        img,
        source_kind: kind,
    })
}

/// Offset between a photo set and a sketch set, measured in `space`.
pub fn offset_between(
    photos: &[GrayImage],
    sketches: &[GrayImage],
    levels: usize,
    space: OffsetSpace,
) -> Result<OffsetI> {
    let transform = |img: &GrayImage| match space {
        OffsetSpace::PostNegative => negative_diagonal(img, levels),
        OffsetSpace::PreNegative => rescaled_diagonal(img, levels),
    };
    let p = photos.iter().map(transform).collect::<Result<Vec<_>>>()?;
    let s = sketches.iter().map(transform).collect::<Result<Vec<_>>>()?;
    compute_offset(&p, &s)
}
