//! Lidar road masks: scan loading, ground segmentation, projection into the
//! camera and filling the sparse projection.

mod ground;

use thiserror::Error;

use crate::mask::{MaskError, RoadMask};
use crate::morph::{close_disc, dilate_disc, keep_largest_component, Connectivity};
use crate::renderer::{project, CameraModel};

pub use ground::{segment_ground, GroundSegConfig};

#[derive(Debug, Error)]
pub enum LidarError {
    #[error("scan length {0} is not a multiple of 16 bytes")]
    TruncatedScan(usize),
    #[error("non-finite coordinate in point {0}")]
    NonFinite(usize),
    #[error("invalid ground segmentation config: {0}")]
    BadConfig(String),
    #[error("{0} labels for {1} points")]
    LabelCount(usize, usize),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub reflectance: f64,
}

/// Velodyne `.bin` scan: little-endian `f32` quadruples `x y z reflectance`.
pub fn load_velodyne(bytes: &[u8]) -> Result<Vec<Point>, LidarError> {
    if !bytes.len().is_multiple_of(16) {
        return Err(LidarError::TruncatedScan(bytes.len()));
    }
    let f = |c: &[u8]| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
    bytes
        .chunks_exact(16)
        .enumerate()
        .map(|(i, c)| {
            let p = Point { x: f(&c[0..4]), y: f(&c[4..8]), z: f(&c[8..12]), reflectance: f(&c[12..16]) };
            if [p.x, p.y, p.z].iter().all(|v| v.is_finite()) {
                Ok(p)
            } else {
                Err(LidarError::NonFinite(i))
            }
        })
        .collect()
}

pub fn load_velodyne_file(path: impl AsRef<std::path::Path>) -> Result<Vec<Point>, LidarError> {
    load_velodyne(&std::fs::read(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectedPoint {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
    pub ground: bool,
}

/// Points in front of the camera that land inside the image.
pub fn project_points(cloud: &[Point], labels: &[bool], cam: &CameraModel) -> Result<Vec<ProjectedPoint>, LidarError> {
    if labels.len() != cloud.len() {
        return Err(LidarError::LabelCount(labels.len(), cloud.len()));
    }
    let m = cam.velo_to_image();
    let (w, h) = (cam.width as f64, cam.height as f64);
    Ok(cloud
        .iter()
        .zip(labels)
        .filter_map(|(p, &ground)| {
            let (u, v, depth) = project(&m, [p.x, p.y, p.z])?;
            (u >= 0.0 && u < w && v >= 0.0 && v < h).then_some(ProjectedPoint { u, v, depth, ground })
        })
        .collect())
}

/// Pixels hit by ground points, before smoothing.
pub fn splat(points: &[ProjectedPoint], width: u32, height: u32) -> Vec<bool> {
    let mut bits = vec![false; width as usize * height as usize];
    for p in points.iter().filter(|p| p.ground) {
        let (x, y) = (p.u.floor(), p.v.floor());
        if x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64 {
            bits[y as usize * width as usize + x as usize] = true;
        }
    }
    bits
}

/// Splat, dilate, close, then keep the largest 8-connected region.
pub fn fill_mask(
    points: &[ProjectedPoint],
    width: u32,
    height: u32,
    cfg: &GroundSegConfig,
) -> Result<RoadMask, LidarError> {
    let (w, h) = (width as usize, height as usize);
    let bits = splat(points, width, height);
    let grown = dilate_disc(w, h, &bits, cfg.fill_radius);
    let closed = close_disc(w, h, &grown, cfg.fill_radius);
    Ok(RoadMask::from_bools(width, height, &keep_largest_component(w, h, &closed, Connectivity::Eight))?)
}

/// Full chain from a scan to a binary road mask.
pub fn lidar_mask(cloud: &[Point], cam: &CameraModel, cfg: &GroundSegConfig) -> Result<RoadMask, LidarError> {
    let labels = segment_ground(cloud, cfg)?;
    let projected = project_points(cloud, &labels, cam)?;
    fill_mask(&projected, cam.width, cam.height, cfg)
}
