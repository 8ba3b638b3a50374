//! Hyperbolic mean curvature flow active contours.
//!
//! A level set is advanced by a sequence of short wave-equation intervals
//! whose initial velocity carries the image force, with signed-distance
//! reinitialization in between. See [`engine::segment`] for the main entry
//! point.

pub mod engine;
pub mod error;
pub mod eval;
pub mod field;
pub mod io;
pub mod velocity;
pub mod wave;

pub use error::{Error, Result};
