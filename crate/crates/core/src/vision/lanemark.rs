//! Road region between two detected lane marks.

use image::RgbImage;

use super::canny::{canny, gaussian_blur, to_gray};
use super::hough::{hough_segments, HoughConfig, LineSegment};
use super::VisionError;
use crate::mask::RoadMask;

#[derive(Clone, Debug, PartialEq)]
pub struct LaneMarkConfig {
    pub canny_low: f64,
    pub canny_high: f64,
    pub hough_rho: f64,
    pub hough_theta: f64,
    pub hough_votes: u32,
    pub min_len: f64,
    pub max_gap: f64,
    /// Image row (as a fraction of height) where the filled region stops.
    pub horizon_frac: f64,
    pub blur_sigma: f64,
    /// Width of the ROI trapezoid's top edge as a fraction of image width.
    pub roi_top_width: f64,
    /// Segments flatter than this (|dy/dx|) are dropped.
    pub min_abs_slope: f64,
    /// Polynomial degree of x(y) per lane mark, 1 or 2.
    pub degree: usize,
}

impl Default for LaneMarkConfig {
    fn default() -> Self {
        Self {
            canny_low: 50.0,
            canny_high: 150.0,
            hough_rho: 1.0,
            hough_theta: 1.0,
            hough_votes: 30,
            min_len: 20.0,
            max_gap: 10.0,
            horizon_frac: 0.55,
            blur_sigma: 1.5,
            roi_top_width: 0.5,
            min_abs_slope: 0.3,
            degree: 1,
        }
    }
}

impl LaneMarkConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), VisionError> {
        let bad = |m: &str| Err(VisionError::BadConfig(m.to_string()));
        if !(self.canny_low < self.canny_high) {
            return bad("canny_low must be below canny_high");
        }
        if !(self.horizon_frac > 0.0 && self.horizon_frac < 1.0) {
            return bad("horizon_frac must lie in (0, 1)");
        }
        if !(1..=2).contains(&self.degree) {
            return bad("degree must be 1 or 2");
        }
        if !(self.hough_rho > 0.0 && self.hough_theta > 0.0 && self.blur_sigma >= 0.0) {
            return bad("hough_rho, hough_theta must be positive and blur_sigma non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaneStatus {
    Ok,
    NoLaneFound,
}

#[derive(Clone, Debug)]
pub struct LaneMarkResult {
    pub mask: RoadMask,
    pub status: LaneStatus,
    pub edges: Vec<bool>,
    pub segments: Vec<LineSegment>,
    /// Coefficients of x(y) = c0 + c1·y (+ c2·y²) for the left and right marks.
    pub fits: Option<(Vec<f64>, Vec<f64>)>,
}

/// Weighted least squares for x as a polynomial in y. Each segment
/// contributes its two endpoints and midpoint, weighted by its length.
pub fn fit_lane(segments: &[LineSegment], degree: usize) -> Option<Vec<f64>> {
    let n = degree + 1;
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![0.0; n];
    for s in segments {
        let wgt = s.length();
        let pts = [(s.x0, s.y0), ((s.x0 + s.x1) / 2.0, (s.y0 + s.y1) / 2.0), (s.x1, s.y1)];
        for (x, y) in pts {
            let row: Vec<f64> = (0..n).map(|p| y.powi(p as i32)).collect();
            for i in 0..n {
                atb[i] += wgt * row[i] * x;
                for j in 0..n {
                    ata[i][j] += wgt * row[i] * row[j];
                }
            }
        }
    }
    solve(ata, atb)
}

/// Gaussian elimination with partial pivoting; None when singular.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn eval(c: &[f64], y: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * y + k)
}

/// Fills pixels whose centre lies between the two curves, on rows whose
/// centre is at or below `horizon_y`.
pub fn fill_between(w: usize, h: usize, left: &[f64], right: &[f64], horizon_y: f64) -> Vec<bool> {
    let mut bits = vec![false; w * h];
    for y in 0..h {
        let cy = y as f64 + 0.5;
        if cy < horizon_y {
            continue;
        }
        let (xl, xr) = (eval(left, cy), eval(right, cy));
        for x in 0..w {
            let cx = x as f64 + 0.5;
            if cx >= xl && cx < xr {
                bits[y * w + x] = true;
            }
        }
    }
    bits
}

fn in_roi(x: f64, y: f64, w: f64, h: f64, horizon_y: f64, top_width: f64) -> bool {
    if y < horizon_y {
        return false;
    }
    // half-width grows linearly from the top edge to the full bottom row
    let t = (y - horizon_y) / (h - horizon_y);
    let half = 0.5 * w * (top_width + (1.0 - top_width) * t);
    (x - 0.5 * w).abs() <= half
}

pub fn lane_mark_mask(image: &RgbImage, cfg: &LaneMarkConfig) -> Result<LaneMarkResult, VisionError> {
    cfg.validate()?;
    let (w, h) = (image.width() as usize, image.height() as usize);
    let gray = to_gray(image);
    let blurred = if cfg.blur_sigma > 0.0 { gaussian_blur(&gray, w, h, cfg.blur_sigma) } else { gray };
    let mut edges = canny(&blurred, w, h, cfg.canny_low, cfg.canny_high);
    let horizon_y = cfg.horizon_frac * h as f64;
    for (i, e) in edges.iter_mut().enumerate() {
        let (x, y) = ((i % w) as f64 + 0.5, (i / w) as f64 + 0.5);
        *e = *e && in_roi(x, y, w as f64, h as f64, horizon_y, cfg.roi_top_width);
    }
    let hough = HoughConfig {
        rho: cfg.hough_rho,
        theta_deg: cfg.hough_theta,
        votes: cfg.hough_votes,
        min_len: cfg.min_len,
        max_gap: cfg.max_gap,
    };
    let segments = hough_segments(&edges, w, h, &hough);
    let (left, right): (Vec<LineSegment>, Vec<LineSegment>) =
        segments.iter().filter(|s| s.slope().abs() >= cfg.min_abs_slope).partition(|s| s.slope() < 0.0);
    let fits = match (fit_lane(&left, cfg.degree), fit_lane(&right, cfg.degree)) {
        (Some(l), Some(r)) if !left.is_empty() && !right.is_empty() => Some((l, r)),
        _ => None,
    };
    let (bits, status) = match &fits {
        Some((l, r)) => (fill_between(w, h, l, r, horizon_y), LaneStatus::Ok),
        None => (vec![false; w * h], LaneStatus::NoLaneFound),
    };
    Ok(LaneMarkResult { mask: RoadMask::from_bools(w as u32, h as u32, &bits)?, status, edges, segments, fits })
}
