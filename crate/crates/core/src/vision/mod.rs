//! Road masks computed from the camera image alone.

mod canny;
mod gmm;
mod grabcut;
mod hough;
mod lanemark;
mod maxflow;

use thiserror::Error;

use crate::mask::MaskError;

pub use canny::{canny, gaussian_blur, to_gray};
pub use gmm::{kmeans, Component, Gmm};
pub use grabcut::{grabcut_road, GrabcutConfig, GrabcutResult, Rect};
pub use hough::{hough_segments, HoughConfig, LineSegment};
pub use lanemark::{fill_between, fit_lane, lane_mark_mask, LaneMarkConfig, LaneMarkResult, LaneStatus};
pub use maxflow::{FlowGraph, Segment};

#[derive(Debug, Error)]
pub enum VisionError {
    #[error("{0} {1:?} is not inside the image")]
    RectOutOfBounds(&'static str, Rect),
    #[error("background and foreground rectangles overlap")]
    RectsOverlap,
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Mask(#[from] MaskError),
}
