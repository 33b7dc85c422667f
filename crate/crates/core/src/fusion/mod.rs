//! Weighted fusion of road masks and pixel-wise evaluation against ground
//! truth.

mod eval;
mod report;

use image::RgbImage;
use thiserror::Error;

use crate::mask::{MaskError, MaskKind, RoadMask};

pub use eval::{evaluate, pr_sweep, sweep_counts, Category, Counts, EvalResult, PrPoint, PrSweep};
pub use report::{format_table, ReportRow};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("weights must lie in [0, 1] and sum to 1 (got {0:?})")]
    BadWeights(Vec<f64>),
    #[error("no masks to fuse")]
    NothingToFuse,
    #[error("threshold step {0} must lie in (0, 1]")]
    BadStep(f64),
    #[error("unknown category in `{0}`")]
    UnknownCategory(String),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// Source order used everywhere masks come as a group of five.
pub const SOURCES: [&str; 5] = ["osm_refined", "osm_candidates", "grabcut", "lanemark", "lidar"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionWeights {
    pub osm_refined: f64,
    pub osm_candidates: f64,
    pub grabcut: f64,
    pub lanemark: f64,
    pub lidar: f64,
}

impl Default for FusionWeights {
    fn default() -> Self {
        Self { osm_refined: 0.2, osm_candidates: 0.2, grabcut: 0.2, lanemark: 0.2, lidar: 0.2 }
    }
}

impl FusionWeights {
    pub fn from_array(w: [f64; 5]) -> Result<Self, FusionError> {
        let fw = Self { osm_refined: w[0], osm_candidates: w[1], grabcut: w[2], lanemark: w[3], lidar: w[4] };
        fw.validate()?;
        Ok(fw)
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.osm_refined, self.osm_candidates, self.grabcut, self.lanemark, self.lidar]
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        let w = self.to_array();
        let sum: f64 = w.iter().sum();
        if w.iter().all(|v| (0.0..=1.0).contains(v)) && (sum - 1.0).abs() <= 1e-9 {
            Ok(())
        } else {
            Err(FusionError::BadWeights(w.to_vec()))
        }
    }
}

/// Per-pixel weighted sum of the five masks, in [`SOURCES`] order.
pub fn fuse(masks: [&RoadMask; 5], w: &FusionWeights) -> Result<RoadMask, FusionError> {
    w.validate()?;
    weighted_sum(&masks.iter().copied().zip(w.to_array()).collect::<Vec<_>>())
}

/// Fuses whichever masks are present, rescaling the remaining weights to
/// sum to one.
pub fn fuse_available(masks: [Option<&RoadMask>; 5], w: &FusionWeights) -> Result<RoadMask, FusionError> {
    w.validate()?;
    let present: Vec<(&RoadMask, f64)> =
        masks.iter().zip(w.to_array()).filter_map(|(m, wi)| m.map(|m| (m, wi))).collect();
    let total: f64 = present.iter().map(|p| p.1).sum();
    if present.is_empty() || total <= 0.0 {
        return Err(FusionError::NothingToFuse);
    }
    weighted_sum(&present.iter().map(|&(m, wi)| (m, wi / total)).collect::<Vec<_>>())
}

fn weighted_sum(parts: &[(&RoadMask, f64)]) -> Result<RoadMask, FusionError> {
    let (first, _) = parts.first().ok_or(FusionError::NothingToFuse)?;
    let mut data = vec![0.0; first.len()];
    for (m, wi) in parts {
        first.same_shape(m)?;
        for (d, v) in data.iter_mut().zip(m.data()) {
            *d += wi * v;
        }
    }
    // weights may sum to 1 + 1e-9
    for d in &mut data {
        *d = d.clamp(0.0, 1.0);
    }
    Ok(RoadMask::from_vec(first.width(), first.height(), MaskKind::Confidence, data)?)
}

/// Road wherever the value is strictly above `t`.
pub fn threshold(conf: &RoadMask, t: f64) -> RoadMask {
    let bits: Vec<bool> = conf.data().iter().map(|&v| v > t).collect();
    RoadMask::from_bools(conf.width(), conf.height(), &bits).expect("same shape as input")
}

/// How road pixels are recognised in an annotation image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GtRule {
    /// Exact colour match.
    Color([u8; 3]),
    /// One channel at or above a level.
    Channel { channel: usize, min: u8 },
}

impl Default for GtRule {
    fn default() -> Self {
        GtRule::Color([255, 0, 255])
    }
}

pub fn decode_gt(image: &RgbImage, rule: GtRule) -> RoadMask {
    let bits: Vec<bool> = image
        .pixels()
        .map(|p| match rule {
            GtRule::Color(c) => p.0 == c,
            GtRule::Channel { channel, min } => p.0[channel.min(2)] >= min,
        })
        .collect();
    RoadMask::from_bools(image.width(), image.height(), &bits).expect("sized from image")
}
