//! Matching face sketches against a photo gallery.
//!
//! Both modalities are mapped to a common representation (the inverted,
//! rescaled diagonal band of a 3-level Haar decomposition), reduced with PCA,
//! and ranked with either a Mahalanobis nearest-neighbour rule or one-vs-rest
//! linear SVMs.

pub mod classify;
pub mod eigenspace;
pub mod error;
pub mod evaluate;
pub mod image;
pub mod linalg;
pub mod modality;
pub mod pgm;
pub mod pipeline;
pub mod wavelet;

pub use error::{Error, PgmError, Result};
pub use image::{GrayImage, RgbImage};
