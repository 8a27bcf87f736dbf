#![allow(dead_code)]

use std::fs;
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sketchmatch::pgm::write_pgm;
use sketchmatch::GrayImage;

pub const FACE_W: usize = 60;
pub const FACE_H: usize = 78;

/// Deterministic face-like image for identity `id`: smooth blobs plus a
/// block texture unique to the identity, with values spanning most of [0, 255].
pub fn synthetic_face(id: u64) -> GrayImage {
    let mut rng = StdRng::seed_from_u64(0x5eed_0000 + id);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(0.15..0.85) * FACE_W as f64,
                rng.gen_range(0.15..0.85) * FACE_H as f64,
                rng.gen_range(4.0..14.0),
                rng.gen_range(-90.0..90.0),
            )
        })
        .collect();
    let cells_x = FACE_W.div_ceil(5);
    let cells_y = FACE_H.div_ceil(5);
    let texture: Vec<f64> = (0..cells_x * cells_y)
        .map(|_| rng.gen_range(-45.0..45.0))
        .collect();
    GrayImage::from_fn(FACE_W, FACE_H, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let mut v = 128.0 + 30.0 * (fy / FACE_H as f64 - 0.5);
        for &(cx, cy, r, amp) in &blobs {
            let d2 = (fx - cx).powi(2) + (fy - cy).powi(2);
            v += amp * (-d2 / (2.0 * r * r)).exp();
        }
        v += texture[(y / 5) * cells_x + x / 5];
        v.clamp(0.0, 255.0)
    })
    .unwrap()
}

/// Lighter, lower-contrast rendering of the photo with mild noise.
pub fn tone_sketch(photo: &GrayImage, seed: u64, noise: f64) -> GrayImage {
    let mut rng = StdRng::seed_from_u64(0xdead_0000 + seed);
    let (w, h) = photo.dims();
    GrayImage::from_fn(w, h, |x, y| {
        let n = if noise > 0.0 {
            rng.gen_range(-noise..noise)
        } else {
            0.0
        };
        (255.0 - 0.6 * (255.0 - photo.get(x, y)) + n).clamp(0.0, 255.0)
    })
    .unwrap()
}

/// Inverted copy of the photo with its contrast stretched by `gain` around mid-gray.
pub fn inverted_sketch(photo: &GrayImage, gain: f64) -> GrayImage {
    photo
        .map(|v| (255.0 - (gain * (v - 128.0) + 128.0)).clamp(0.0, 255.0))
        .unwrap()
}

pub fn label(id: u64) -> String {
    format!("id{id:03}")
}

/// `<root>/photos/idNNN.pgm` and, optionally, matching tone sketches.
pub fn write_dataset(root: &Path, ids: u64, with_sketches: bool) {
    fs::create_dir_all(root.join("photos")).unwrap();
    if with_sketches {
        fs::create_dir_all(root.join("sketches")).unwrap();
    }
    for id in 0..ids {
        let photo = synthetic_face(id);
        fs::write(
            root.join("photos").join(format!("{}.pgm", label(id))),
            write_pgm(&photo),
        )
        .unwrap();
        if with_sketches {
            let sketch = tone_sketch(&photo, id, 6.0);
            fs::write(
                root.join("sketches").join(format!("{}.pgm", label(id))),
                write_pgm(&sketch),
            )
            .unwrap();
        }
    }
}

/// High-contrast, piecewise-smooth portrait: near-black background and hair,
/// a bright hard-edged head ellipse, dark eyes, brows, nose and mouth whose
/// geometry depends on `id`.
pub fn cartoon_face(id: u64) -> GrayImage {
    let mut rng = StdRng::seed_from_u64(0xface_0000 + id);
    let (w, h) = (FACE_W as f64, FACE_H as f64);
    let head = (
        w * rng.gen_range(0.46..0.54),
        h * rng.gen_range(0.47..0.53),
        w * rng.gen_range(0.33..0.42),
        h * rng.gen_range(0.36..0.44),
    );
    let skin = rng.gen_range(225.0..250.0);
    let bg = rng.gen_range(5.0..25.0);
    let eye_y = h * rng.gen_range(0.36..0.44);
    let eye_dx = w * rng.gen_range(0.14..0.2);
    let eye_r = rng.gen_range(2.0..4.0);
    let brow_y = eye_y - rng.gen_range(4.0..7.0);
    let nose_len = h * rng.gen_range(0.12..0.18);
    let mouth_y = h * rng.gen_range(0.66..0.74);
    let mouth_w = w * rng.gen_range(0.12..0.2);
    let hair = rng.gen_range(5.0..30.0);
    let hairline = h * rng.gen_range(0.18..0.26);
    GrayImage::from_fn(FACE_W, FACE_H, |x, y| {
        let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
        let mut v = bg + 15.0 * fx / w;
        let e = ((fx - head.0) / head.2).powi(2) + ((fy - head.1) / head.3).powi(2);
        if e < 1.0 {
            v = skin - 15.0 * e;
            if fy < hairline {
                v = hair;
            }
            for side in [-1.0, 1.0] {
                let ex = head.0 + side * eye_dx;
                if (fx - ex).powi(2) + (fy - eye_y).powi(2) < eye_r * eye_r {
                    v = 15.0;
                }
                if (fy - brow_y).abs() < 1.2 && (fx - ex).abs() < eye_r * 1.8 {
                    v = 25.0;
                }
            }
            if (fx - head.0).abs() < 1.0 && fy > eye_y && fy < eye_y + nose_len {
                v -= 90.0;
            }
            if (fy - mouth_y).abs() < 1.5 && (fx - head.0).abs() < mouth_w {
                v = 40.0;
            }
        }
        v.clamp(0.0, 255.0)
    })
    .unwrap()
}
