//! Orthonormal 2D Haar analysis and the multi-level pyramid.
//!
//! Odd-length rows and columns are extended by replicating their last sample
//! before pairing, so each level has `ceil(len / 2)` coefficients per axis and
//! the padded pair contributes a zero detail coefficient.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// One analysis step: approximation plus vertical, horizontal and diagonal details.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarLevel {
    pub level: usize,
    /// Low-pass on rows, low-pass on columns.
    pub approx: GrayImage,
    /// Low-pass on rows, high-pass on columns.
    pub detail_v: GrayImage,
    /// High-pass on rows, low-pass on columns.
    pub detail_h: GrayImage,
    /// High-pass on both axes.
    pub detail_d: GrayImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    levels: Vec<HaarLevel>,
    source_dims: (usize, usize),
}

impl WaveletPyramid {
    pub fn levels(&self) -> &[HaarLevel] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn source_dims(&self) -> (usize, usize) {
        self.source_dims
    }

    pub fn level(&self, j: usize) -> Result<&HaarLevel> {
        if j == 0 || j > self.levels.len() {
            return Err(Error::LevelOutOfRange {
                requested: j,
                levels: self.levels.len(),
            });
        }
        Ok(&self.levels[j - 1])
    }

    /// Diagonal detail band of level `j` (1-based).
    pub fn diagonal_band(&self, j: usize) -> Result<&GrayImage> {
        self.level(j).map(|l| &l.detail_d)
    }
}

#[inline]
fn half_len(n: usize) -> usize {
    n.div_ceil(2)
}

// Writes approx/detail coefficients of `signal` into the two output slices.
fn analyze(signal: &[f64], approx: &mut [f64], detail: &mut [f64]) {
    let n = signal.len();
    for k in 0..half_len(n) {
        let a = signal[2 * k];
        let b = if 2 * k + 1 < n { signal[2 * k + 1] } else { a };
        approx[k] = (a + b) * FRAC_1_SQRT_2;
        detail[k] = (a - b) * FRAC_1_SQRT_2;
    }
}

// Inverse of `analyze` for the padded length 2 * approx.len().
fn synthesize(approx: &[f64], detail: &[f64], out: &mut [f64]) {
    for k in 0..approx.len() {
        out[2 * k] = (approx[k] + detail[k]) * FRAC_1_SQRT_2;
        out[2 * k + 1] = (approx[k] - detail[k]) * FRAC_1_SQRT_2;
    }
}

/// One level of the 1D Haar transform.
pub fn haar_step_1d(signal: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let half = half_len(signal.len());
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    analyze(signal, &mut approx, &mut detail);
    Ok((approx, detail))
}

// Applies the column filters to a (width x height) row-major buffer.
fn analyze_columns(data: &[f64], width: usize, height: usize) -> (Vec<f64>, Vec<f64>) {
    let out_h = half_len(height);
    let mut low = vec![0.0; width * out_h];
    let mut high = vec![0.0; width * out_h];
    let mut column = vec![0.0; height];
    let mut lo_col = vec![0.0; out_h];
    let mut hi_col = vec![0.0; out_h];
    for x in 0..width {
        for y in 0..height {
            column[y] = data[y * width + x];
        }
        analyze(&column, &mut lo_col, &mut hi_col);
        for y in 0..out_h {
            low[y * width + x] = lo_col[y];
            high[y * width + x] = hi_col[y];
        }
    }
    (low, high)
}

/// One level of the 2D transform: rows first, then columns.
pub fn haar_step_2d(img: &GrayImage) -> HaarLevel {
    let (w, h) = img.dims();
    let out_w = half_len(w);
    let out_h = half_len(h);

    let mut row_low = vec![0.0; out_w * h];
    let mut row_high = vec![0.0; out_w * h];
    for y in 0..h {
        let span = y * out_w..(y + 1) * out_w;
        analyze(img.row(y), &mut row_low[span.clone()], &mut row_high[span]);
    }

    let (ll, lh) = analyze_columns(&row_low, out_w, h);
    let (hl, hh) = analyze_columns(&row_high, out_w, h);
    let band =
        |px| GrayImage::new(out_w, out_h, px).expect("finite input gives finite coefficients");
    HaarLevel {
        level: 1,
        approx: band(ll),
        detail_v: band(lh),
        detail_h: band(hl),
        detail_d: band(hh),
    }
}

/// Band dimensions after `levels` steps on a `width x height` image.
///
/// Every step must see at least two samples along each axis.
pub fn band_dims(width: usize, height: usize, levels: usize) -> Result<(usize, usize)> {
    if levels == 0 {
        return Err(Error::ZeroLevels);
    }
    let (mut w, mut h) = (width, height);
    for level in 1..=levels {
        if w < 2 || h < 2 {
            return Err(Error::LevelsExhausted {
                level,
                width: w,
                height: h,
            });
        }
        w = half_len(w);
        h = half_len(h);
    }
    Ok((w, h))
}

/// Multi-level decomposition; level `j` is computed from the approximation of level `j - 1`.
pub fn decompose(img: &GrayImage, levels: usize) -> Result<WaveletPyramid> {
    band_dims(img.width(), img.height(), levels)?;
    let mut out = Vec::with_capacity(levels);
    let mut current = img.clone();
    for j in 1..=levels {
        let mut step = haar_step_2d(&current);
        step.level = j;
        current = step.approx.clone();
        out.push(step);
    }
    Ok(WaveletPyramid {
        levels: out,
        source_dims: img.dims(),
    })
}

/// Inverts one analysis step, dropping any padded row or column.
pub fn reconstruct_step_2d(level: &HaarLevel, orig_dims: (usize, usize)) -> Result<GrayImage> {
    let (bw, bh) = level.approx.dims();
    for band in [&level.detail_v, &level.detail_h, &level.detail_d] {
        if band.dims() != (bw, bh) {
            return Err(Error::InconsistentDims(format!(
                "band {:?} differs from approximation {:?}",
                band.dims(),
                (bw, bh)
            )));
        }
    }
    let (ow, oh) = orig_dims;
    if ow == 0 || oh == 0 || half_len(ow) != bw || half_len(oh) != bh {
        return Err(Error::InconsistentDims(format!(
            "{ow}x{oh} does not halve to {bw}x{bh}"
        )));
    }
    let (pw, ph) = (2 * bw, 2 * bh);

    // columns: rebuild the row-filtered planes at full height
    let mut row_low = vec![0.0; bw * ph];
    let mut row_high = vec![0.0; bw * ph];
    let mut a = vec![0.0; bh];
    let mut d = vec![0.0; bh];
    let mut col = vec![0.0; ph];
    for (plane, lo, hi) in [
        (&mut row_low, &level.approx, &level.detail_v),
        (&mut row_high, &level.detail_h, &level.detail_d),
    ] {
        for x in 0..bw {
            for y in 0..bh {
                a[y] = lo.get(x, y);
                d[y] = hi.get(x, y);
            }
            synthesize(&a, &d, &mut col);
            for y in 0..ph {
                plane[y * bw + x] = col[y];
            }
        }
    }

    let mut row = vec![0.0; pw];
    let mut pixels = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        let span = y * bw..(y + 1) * bw;
        synthesize(&row_low[span.clone()], &row_high[span], &mut row);
        pixels.extend_from_slice(&row[..ow]);
    }
    GrayImage::new(ow, oh, pixels)
}
