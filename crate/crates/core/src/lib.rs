//! Detection of triangular moth silhouettes in colour images.
//!
//! The pipeline converts to HSV, back-projects hue templates into
//! probability maps, fuses and erodes them, thresholds with a constrained
//! Otsu split, traces contours and keeps those whose Hu invariants match a
//! reference shape. See [`pipeline::Detector`].

pub mod annotate;
pub mod backproject;
pub mod color;
pub mod config;
pub mod contour;
pub mod controller;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod histogram;
pub mod moments;
pub mod pipeline;
pub mod raster;
pub mod segment;

pub use error::{Error, Result};
