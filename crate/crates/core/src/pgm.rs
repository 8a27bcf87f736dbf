//! Binary PGM (P5) reading and writing.

use crate::error::{PgmError, Result};
use crate::image::GrayImage;

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &'static str) -> Result<u32, PgmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::MalformedHeader(what));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PgmError::MalformedHeader(what))
    }
}

/// Decodes a binary PGM. Pixel values are the stored bytes.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let magic = bytes.get(..2).unwrap_or(bytes);
    if magic != b"P5" {
        return Err(PgmError::UnsupportedMagic(String::from_utf8_lossy(magic).into_owned()).into());
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if !cur
        .bytes
        .get(cur.pos)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PgmError::MalformedHeader("magic").into());
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::InvalidDimensions { width, height }.into());
    }
    if maxval > 255 {
        return Err(PgmError::MaxvalTooLarge(maxval).into());
    }
    if maxval == 0 {
        return Err(PgmError::MalformedHeader("maxval").into());
    }
    // exactly one whitespace byte separates the header from the raster
    if !cur.bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(PgmError::MalformedHeader("raster separator").into());
    }
    let data = &bytes[cur.pos + 1..];
    let expected = width * height;
    if data.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            found: data.len(),
        }
        .into());
    }
    let pixels = data[..expected].iter().map(|&b| f64::from(b)).collect();
    GrayImage::new(width, height, pixels)
}

/// Encodes as P5 with maxval 255, clamping and rounding half away from zero.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(
        img.pixels()
            .iter()
            .map(|&v| v.clamp(0.0, 255.0).round() as u8),
    );
    out
}
