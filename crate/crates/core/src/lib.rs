//! Map priors and sensor masks for driving-environment understanding.
//!
//! The crate turns OpenStreetMap extracts and vehicle poses into scene
//! attribute records, renders map-based road masks in the camera view, and
//! fuses them with image (GrabCut, lane marks) and Lidar road masks.

pub mod attributes;
pub mod fusion;
pub mod geodesy;
pub mod lidar;
pub mod mask;
pub mod morph;
pub mod osm;
pub mod refine;
pub mod renderer;
pub mod vision;

pub use mask::{MaskKind, RoadMask};
