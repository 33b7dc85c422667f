//! Browser bindings: candidate confidence masks, GrabCut and lane-mark
//! segmentation, and fusion with a precision/recall sweep.
//!
//! Images cross the boundary as RGBA bytes, masks as one byte per pixel.

use image::RgbImage;
use roadprior::fusion::{fuse_available, pr_sweep, FusionWeights};
use roadprior::geodesy::{SpatialIndex, VehiclePose};
use roadprior::osm::parse_osm;
use roadprior::renderer::{candidates_mask, CameraModel, PoseCandidateSpec, RenderConfig};
use roadprior::vision::{grabcut_road, lane_mark_mask, GrabcutConfig, LaneMarkConfig};
use roadprior::{MaskKind, RoadMask};
use wasm_bindgen::prelude::*;

pub const WIDTH: u32 = 320;
pub const HEIGHT: u32 = 192;
const FOCAL: f64 = 240.0;
const CX: f64 = 160.0;
const CY: f64 = 80.0;
const CAM_HEIGHT: f64 = 1.73;
const HALF_ROAD: f64 = 3.5;
const LAT0: f64 = 49.0;
const LON0: f64 = 8.4;

fn calib() -> String {
    format!(
        "P2: {FOCAL} 0 {CX} 0 0 {FOCAL} {CY} 0 0 0 1 0\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 0\n"
    )
}

/// A residential road running due north through the camera.
fn osm_xml() -> String {
    let mut s = String::from("<osm version=\"0.6\">\n");
    for i in 0..9 {
        s += &format!("<node id=\"{}\" lat=\"{:.7}\" lon=\"{LON0}\"/>\n", i + 1, LAT0 - 0.002 + i as f64 * 0.0005);
    }
    s += "<way id=\"1\">";
    for i in 0..9 {
        s += &format!("<nd ref=\"{}\"/>", i + 1);
    }
    s + "<tag k=\"highway\" v=\"residential\"/></way>\n</osm>\n"
}

/// Forward distance and lateral offset (left positive) of the ground
/// seen at a pixel centre, if it lies below the horizon.
fn ground_at(x: u32, y: u32) -> Option<(f64, f64)> {
    let (u, v) = (x as f64 + 0.5, y as f64 + 0.5);
    if v <= CY + 0.5 {
        return None;
    }
    let fwd = FOCAL * CAM_HEIGHT / (v - CY);
    Some((fwd, -(u - CX) * fwd / FOCAL))
}

/// The built-in scene as RGBA: sky, asphalt with white edge lines, grass.
#[wasm_bindgen]
pub fn scene_rgba() -> Vec<u8> {
    let mut out = Vec::with_capacity((WIDTH * HEIGHT * 4) as usize);
    for y in 0..HEIGHT {
        for x in 0..WIDTH {
            let px = match ground_at(x, y) {
                None => [150, 190, 235],
                Some((fwd, lat)) => {
                    let edge = (lat.abs() - HALF_ROAD).abs() * FOCAL / fwd;
                    if edge < 1.5 {
                        [245, 245, 245]
                    } else if lat.abs() < HALF_ROAD {
                        [75, 75, 80]
                    } else {
                        [60, 140, 50]
                    }
                }
            };
            out.extend_from_slice(&px);
            out.push(255);
        }
    }
    out
}

/// Ground truth road for the built-in scene, 0 or 255 per pixel.
#[wasm_bindgen]
pub fn scene_truth() -> Vec<u8> {
    (0..WIDTH * HEIGHT)
        .map(|i| match ground_at(i % WIDTH, i / WIDTH) {
            Some((_, lat)) if lat.abs() <= HALF_ROAD => 255,
            _ => 0,
        })
        .collect()
}

#[wasm_bindgen]
pub fn scene_width() -> u32 {
    WIDTH
}

#[wasm_bindgen]
pub fn scene_height() -> u32 {
    HEIGHT
}

/// Confidence mask from `n` perturbed poses around a GPS fix that is off
/// by `gps_east` metres and `gps_heading` degrees. Values are round(255·k/n).
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn candidates(
    n: usize,
    dx: f64,
    dy: f64,
    dtheta: f64,
    seed: u64,
    gps_east: f64,
    gps_heading: f64,
) -> Result<Vec<u8>, String> {
    let (graph, _) = parse_osm(osm_xml().as_bytes()).map_err(|e| e.to_string())?;
    let index = SpatialIndex::build(&graph).map_err(|e| e.to_string())?;
    let cam = CameraModel::parse_kitti(&calib(), WIDTH, HEIGHT).map_err(|e| e.to_string())?;
    let (zone, hemi) = index.zone();
    let pose = VehiclePose::new(0.0, LAT0, LON0, 90.0 + gps_heading)
        .and_then(|p| p.in_zone(zone, hemi))
        .map_err(|e| e.to_string())?
        .planar()
        .perturbed(gps_east, 0.0, 0.0);
    let spec = PoseCandidateSpec { n, dx, dy, dtheta, seed, ..Default::default() };
    let mask = candidates_mask(&graph, &index, &pose, &cam, &spec, &RenderConfig::default(), &Default::default())
        .map_err(|e| e.to_string())?;
    Ok(mask.to_gray().into_raw())
}

fn rgb(rgba: &[u8], width: u32, height: u32) -> Result<RgbImage, String> {
    if rgba.len() != (width * height * 4) as usize {
        return Err(format!("expected {} RGBA bytes, got {}", width * height * 4, rgba.len()));
    }
    let raw = rgba.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect();
    RgbImage::from_raw(width, height, raw).ok_or_else(|| "bad image buffer".to_string())
}

/// GrabCut road mask with the default seed rectangles (0 or 255).
#[wasm_bindgen]
pub fn grabcut(rgba: &[u8], width: u32, height: u32, seed: u64) -> Result<Vec<u8>, String> {
    let img = rgb(rgba, width, height)?;
    let cfg = GrabcutConfig { seed, ..GrabcutConfig::for_image(width, height) };
    let r = grabcut_road(&img, &cfg).map_err(|e| e.to_string())?;
    Ok(r.mask.to_gray().into_raw())
}

/// Region between the fitted lane lines (0 or 255); all zero when either
/// side has no line.
#[wasm_bindgen]
pub fn lane_marks(rgba: &[u8], width: u32, height: u32) -> Result<Vec<u8>, String> {
    let img = rgb(rgba, width, height)?;
    let r = lane_mark_mask(&img, &LaneMarkConfig::default()).map_err(|e| e.to_string())?;
    Ok(r.mask.to_gray().into_raw())
}

#[wasm_bindgen]
pub struct Fusion {
    fused: Vec<u8>,
    sweep: Vec<f64>,
    best: Vec<f64>,
}

#[wasm_bindgen]
impl Fusion {
    /// Fused confidence, round(255·p) per pixel.
    #[wasm_bindgen(getter)]
    pub fn fused(&self) -> Vec<u8> {
        self.fused.clone()
    }

    /// Flat `[t, precision, recall, f1]` rows.
    #[wasm_bindgen(getter)]
    pub fn sweep(&self) -> Vec<f64> {
        self.sweep.clone()
    }

    /// `[t, precision, recall, f1]` at the best F1.
    #[wasm_bindgen(getter)]
    pub fn best(&self) -> Vec<f64> {
        self.best.clone()
    }
}

fn confidence(bytes: &[u8]) -> Option<RoadMask> {
    if bytes.is_empty() {
        return None;
    }
    let data = bytes.iter().map(|&b| b as f64 / 255.0).collect();
    RoadMask::from_vec(WIDTH, HEIGHT, MaskKind::Confidence, data).ok()
}

/// Fuses whichever scene masks are given (empty slices are skipped; the
/// weights are renormalised over the rest) and sweeps the threshold
/// against the scene truth. Weights are in source order: refined,
/// candidates, GrabCut, lane marks, Lidar.
#[wasm_bindgen]
pub fn fuse_and_sweep(
    candidates: &[u8],
    grabcut: &[u8],
    lane_marks: &[u8],
    weights: &[f64],
    step: f64,
) -> Result<Fusion, String> {
    let (c, g, l) = (confidence(candidates), confidence(grabcut), confidence(lane_marks));
    let w: [f64; 5] = weights.try_into().map_err(|_| format!("expected 5 weights, got {}", weights.len()))?;
    let w = FusionWeights::from_array(w).map_err(|e| e.to_string())?;
    let fused = fuse_available([None, c.as_ref(), g.as_ref(), l.as_ref(), None], &w).map_err(|e| e.to_string())?;
    let truth = RoadMask::from_bools(WIDTH, HEIGHT, &scene_truth().iter().map(|&b| b > 0).collect::<Vec<_>>())
        .map_err(|e| e.to_string())?;
    let s = pr_sweep(&fused, &truth, step).map_err(|e| e.to_string())?;
    let row = |p: &roadprior::fusion::PrPoint| [p.t, p.precision, p.recall, p.f1];
    Ok(Fusion {
        fused: fused.to_gray().into_raw(),
        sweep: s.points.iter().flat_map(row).collect(),
        best: row(&s.best).to_vec(),
    })
}
