//! Superpixel refinement of a binary road mask: whole segments are road
//! when more than half their pixels are, and only the largest connected
//! road region is kept.

mod slic;

use thiserror::Error;

pub use slic::{rgb_to_lab, superpixels, SlicConfig, SuperpixelMap};

use crate::mask::{MaskError, MaskKind, RoadMask};
use crate::morph::{keep_largest_component, Connectivity};

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("K = {k} exceeds the {pixels} image pixels")]
    KTooLarge { k: usize, pixels: usize },
    #[error("image is empty")]
    EmptyImage,
    #[error("bad superpixel labels: {0}")]
    BadLabels(String),
    #[error("initial mask must be binary")]
    NotBinary,
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// Road and total pixel counts per segment.
pub fn segment_road_counts(sp: &SuperpixelMap, init: &RoadMask) -> Result<Vec<(usize, usize)>, RefineError> {
    check_shape(sp, init)?;
    let mut counts = vec![(0usize, 0usize); sp.k()];
    for (&l, &v) in sp.labels().iter().zip(init.data()) {
        let c = &mut counts[l as usize];
        c.0 += (v == 1.0) as usize;
        c.1 += 1;
    }
    Ok(counts)
}

fn check_shape(sp: &SuperpixelMap, init: &RoadMask) -> Result<(), RefineError> {
    if sp.width() != init.width() || sp.height() != init.height() {
        return Err(MaskError::ShapeMismatch(sp.width(), sp.height(), init.width(), init.height()).into());
    }
    if init.kind() != MaskKind::Binary {
        return Err(RefineError::NotBinary);
    }
    Ok(())
}

/// Segment-level relabelling followed by largest 8-connected component.
/// A segment exactly half road stays non-road.
pub fn relabel(sp: &SuperpixelMap, init: &RoadMask) -> Result<RoadMask, RefineError> {
    let counts = segment_road_counts(sp, init)?;
    let road: Vec<bool> = counts.iter().map(|&(r, t)| 2 * r > t).collect();
    let bits: Vec<bool> = sp.labels().iter().map(|&l| road[l as usize]).collect();
    let (w, h) = (sp.width() as usize, sp.height() as usize);
    let kept = keep_largest_component(w, h, &bits, Connectivity::Eight);
    Ok(RoadMask::from_bools(sp.width(), sp.height(), &kept)?)
}
