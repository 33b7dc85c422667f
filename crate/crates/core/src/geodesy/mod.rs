//! WGS84 to UTM projection, planar geometry and nearest-way-node queries.
//!
//! Everything downstream of projection is planar 2-D in UTM meters. Angles
//! are east-based, counter-clockwise degrees throughout.

mod index;
mod planar;
mod pose;
mod utm;

pub use index::{IndexEntry, Nearest, SpatialIndex};
pub use planar::{normalize_deg, point_segment_distance, project_on_segment, segment_distance, Vec2};
pub use pose::{north_cw_to_east_ccw, parse_pose_file, PlanarPose, VehiclePose};
pub use utm::{to_utm, to_utm_in_zone, utm_zone, Hemisphere, UtmPoint};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside the UTM band (|lat| <= 84)")]
    OutOfBand(f64),
    #[error("invalid coordinate ({lat}, {lon})")]
    InvalidCoordinate { lat: f64, lon: f64 },
    #[error("UTM zone mismatch: {0:?} vs {1:?}")]
    ZoneMismatch((u8, Hemisphere), (u8, Hemisphere)),
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("spatial index is empty")]
    EmptyIndex,
    #[error("no planar position for node {0}")]
    MissingPosition(i64),
    #[error("pose line {line}: {msg}")]
    PoseFormat { line: usize, msg: String },
}
