//! Map-based road masks in the camera view: road polygons from OSM
//! centrelines, projected through the camera onto the image plane.

mod camera;
mod candidates;
mod polygons;
mod raster;

use thiserror::Error;

pub use camera::{mul34, mul44, project, translation, CameraModel, Mat34, Mat4, IDENTITY4, KITTI_VELO_HEIGHT};
pub use candidates::{
    average_masks, candidate_masks, candidate_poses, candidates_mask, sample_offsets, Distribution, PoseCandidateSpec,
};
pub use polygons::{build_road_polygons, RoadPolygon, RoadPolygonSet, WorldRoads};
pub use raster::{clip_depth, fill_polygon, to_pixels};

use crate::geodesy::GeoError;
use crate::mask::{MaskError, RoadMask};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("projection matrix has rank < 3")]
    DegenerateProjection,
    #[error("calibration: {0}")]
    Calib(String),
    #[error("invalid candidate spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    /// Metres per lane.
    pub lane_width: f64,
    /// Roads farther than this from the pose are not rendered (m).
    pub radius: f64,
    /// Depth clipping band (m).
    pub near: f64,
    pub far: f64,
    /// Longest miter, as a multiple of half the width, before bevelling.
    pub miter_limit: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { lane_width: 3.5, radius: 100.0, near: 1.0, far: 100.0, miter_limit: 4.0 }
    }
}

/// Rasterizes road polygons (vehicle frame, on the ground plane) into a
/// binary mask of the camera image.
pub fn render_mask(polys: &RoadPolygonSet, cam: &CameraModel, cfg: &RenderConfig) -> Result<RoadMask, RenderError> {
    let m = cam.ground_to_image();
    let (w, h) = (cam.width, cam.height);
    let mut bits = vec![false; w as usize * h as usize];
    for poly in &polys.polygons {
        let clipped = clip_depth(&poly.vertices, &m, cfg.near, cfg.far);
        if clipped.len() < 3 {
            continue;
        }
        fill_polygon(&mut bits, w, h, &to_pixels(&clipped, &m));
    }
    Ok(RoadMask::from_bools(w, h, &bits)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::testutil::build;
    use crate::attributes::AttributeConfig;
    use crate::geodesy::{Hemisphere, PlanarPose, UtmPoint};

    const HW: &[(&str, &str)] = &[("highway", "residential")];

    fn kitti_like() -> CameraModel {
        CameraModel::pinhole(721.5, 609.6, 172.9, 1242, 375, 1.65).unwrap()
    }

    fn pose(x: f64, y: f64, h: f64) -> PlanarPose {
        PlanarPose::new(UtmPoint::new(x, y, 32, Hemisphere::North), h)
    }

    fn row_extent(mask: &RoadMask, y: u32) -> Option<(u32, u32)> {
        let xs: Vec<u32> = (0..mask.width()).filter(|&x| mask.get(x, y) == 1.0).collect();
        Some((*xs.first()?, *xs.last()?))
    }

    #[test]
    fn empty_set_renders_nothing() {
        let m = render_mask(&RoadPolygonSet::default(), &kitti_like(), &RenderConfig::default()).unwrap();
        assert_eq!(m.count_positive(), 0);
    }

    #[test]
    fn road_behind_camera_is_culled() {
        let (g, idx) = build(&[(1, 0.0, 0.0), (2, 80.0, 0.0)], &[(10, &[1, 2], HW)]);
        let cfg = RenderConfig::default();
        let polys = build_road_polygons(&g, &idx, &pose(-1.0, 0.0, 180.0), &cfg, &AttributeConfig::default()).unwrap();
        assert!(!polys.is_empty());
        assert_eq!(render_mask(&polys, &kitti_like(), &cfg).unwrap().count_positive(), 0);
    }

    #[test]
    fn bottom_row_matches_pinhole_arithmetic() {
        let (g, idx) = build(&[(1, 0.0, 0.0), (2, 200.0, 0.0)], &[(10, &[1, 2], HW)]);
        let cfg = RenderConfig::default();
        let polys = build_road_polygons(&g, &idx, &pose(0.0, 0.0, 0.0), &cfg, &AttributeConfig::default()).unwrap();
        let mask = render_mask(&polys, &kitti_like(), &cfg).unwrap();
        // bottom row centre v = 374.5 sees the ground at z = h f / (v - cy)
        let z = 1.65 * 721.5 / (374.5 - 172.9);
        let half = 721.5 * 3.5 / z;
        let (lo, hi) = row_extent(&mask, 374).unwrap();
        assert!((lo as f64 - (609.6 - half)).abs() <= 2.0, "{lo}");
        assert!((hi as f64 - (609.6 + half)).abs() <= 2.0, "{hi}");
        // nothing above the horizon
        assert!(row_extent(&mask, 172).is_none());
    }

    #[test]
    fn shorter_far_plane_never_adds_road() {
        let (g, idx) = build(&[(1, 0.0, 0.0), (2, 60.0, 10.0), (3, 90.0, -30.0)], &[(10, &[1, 2, 3], HW)]);
        let attr = AttributeConfig::default();
        let mut prev = usize::MAX;
        for far in [100.0, 60.0, 30.0, 10.0, 2.0] {
            let cfg = RenderConfig { far, ..Default::default() };
            let polys = build_road_polygons(&g, &idx, &pose(0.0, 0.0, 5.0), &cfg, &attr).unwrap();
            let area = render_mask(&polys, &kitti_like(), &cfg).unwrap().count_positive();
            assert!(area <= prev);
            prev = area;
        }
    }

    #[test]
    fn single_still_candidate_equals_direct_render() {
        let (g, idx) = build(&[(1, 0.0, 0.0), (2, 60.0, 10.0), (3, 90.0, -30.0)], &[(10, &[1, 2, 3], HW)]);
        let (cfg, attr, cam) = (RenderConfig::default(), AttributeConfig::default(), kitti_like());
        let p = pose(3.0, 1.0, 10.0);
        let direct = render_mask(&build_road_polygons(&g, &idx, &p, &cfg, &attr).unwrap(), &cam, &cfg).unwrap();
        let spec = PoseCandidateSpec { n: 1, dx: 0.0, dy: 0.0, dtheta: 0.0, ..Default::default() };
        let cand = candidates_mask(&g, &idx, &p, &cam, &spec, &cfg, &attr).unwrap();
        assert_eq!(cand.data(), direct.data());
        assert!(direct.count_positive() > 0);
    }
}
