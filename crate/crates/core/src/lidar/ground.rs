//! Ground segmentation by polar sectors and piecewise line fits over the
//! lowest point of each range bin.

use std::f64::consts::PI;

use super::{LidarError, Point};
use crate::renderer::KITTI_VELO_HEIGHT;

#[derive(Clone, Debug, PartialEq)]
pub struct GroundSegConfig {
    pub n_sectors: usize,
    /// Range bin length in metres.
    pub bin_size: f64,
    pub max_slope_deg: f64,
    /// Largest vertical distance from a sector's ground line for a point to
    /// count as ground.
    pub height_tol: f64,
    /// Disc radius in pixels used when filling the projected mask.
    pub fill_radius: u32,
    /// Height of the sensor above the road; anchors the first line of every
    /// sector at range zero.
    pub sensor_height: f64,
}

impl Default for GroundSegConfig {
    fn default() -> Self {
        Self {
            n_sectors: 180,
            bin_size: 0.5,
            max_slope_deg: 10.0,
            height_tol: 0.3,
            fill_radius: 5,
            sensor_height: KITTI_VELO_HEIGHT,
        }
    }
}

impl GroundSegConfig {
    pub fn validate(&self) -> Result<(), LidarError> {
        let ok = self.n_sectors > 0
            && self.bin_size > 0.0
            && self.max_slope_deg > 0.0
            && self.max_slope_deg < 90.0
            && self.height_tol > 0.0
            && self.fill_radius > 0
            && self.sensor_height > 0.0;
        if ok {
            Ok(())
        } else {
            Err(LidarError::BadConfig(format!("{self:?}")))
        }
    }
}

/// Least-squares line z = a + b·r over a run of (r, z) prototypes.
#[derive(Clone, Debug)]
struct Line {
    pts: Vec<(f64, f64)>,
    a: f64,
    b: f64,
}

impl Line {
    fn fit(pts: Vec<(f64, f64)>) -> Line {
        let n = pts.len() as f64;
        let (mr, mz) = pts.iter().fold((0.0, 0.0), |(sr, sz), (r, z)| (sr + r / n, sz + z / n));
        let (mut srr, mut srz) = (0.0, 0.0);
        for (r, z) in &pts {
            srr += (r - mr) * (r - mr);
            srz += (r - mr) * (z - mz);
        }
        let b = if srr > 0.0 { srz / srr } else { 0.0 };
        Line { a: mz - b * mr, b, pts }
    }

    fn at(&self, r: f64) -> f64 {
        self.a + self.b * r
    }

    fn start(&self) -> f64 {
        self.pts[0].0
    }

    fn max_residual(&self) -> f64 {
        self.pts.iter().map(|(r, z)| (z - self.at(*r)).abs()).fold(0.0, f64::max)
    }
}

/// Ground lines of one sector from its range-sorted prototypes.
fn sector_lines(protos: &[(f64, f64)], cfg: &GroundSegConfig) -> Vec<Line> {
    let max_slope = cfg.max_slope_deg.to_radians().tan();
    let anchor = (0.0, -cfg.sensor_height);
    let mut lines: Vec<Line> = Vec::new();
    let mut current = Line::fit(vec![anchor]);
    for &p in protos {
        if (p.1 - current.at(p.0)).abs() > cfg.height_tol {
            continue;
        }
        let mut grown = current.pts.clone();
        grown.push(p);
        let cand = Line::fit(grown);
        if cand.b.abs() <= max_slope && cand.max_residual() <= cfg.height_tol {
            current = cand;
            continue;
        }
        // start a new line from the last accepted prototype
        let last = *current.pts.last().expect("lines are never empty");
        let step = (p.1 - last.1) / (p.0 - last.0).max(f64::EPSILON);
        if step.abs() <= max_slope {
            let done = std::mem::replace(&mut current, Line::fit(vec![last, p]));
            lines.push(done);
        }
    }
    lines.push(current);
    // a lone anchor carries no evidence about the ground
    lines.retain(|l| l.pts.len() >= 2);
    lines
}

fn sector_of(p: &Point, n: usize) -> usize {
    let a = p.y.atan2(p.x) + PI;
    ((a / (2.0 * PI) * n as f64) as usize).min(n - 1)
}

/// Per-point ground labels. Sectors without a usable line label all their
/// points non-ground.
pub fn segment_ground(cloud: &[Point], cfg: &GroundSegConfig) -> Result<Vec<bool>, LidarError> {
    cfg.validate()?;
    let n = cfg.n_sectors;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in cloud.iter().enumerate() {
        members[sector_of(p, n)].push(i);
    }
    let mut labels = vec![false; cloud.len()];
    for idx in members.iter().filter(|m| !m.is_empty()) {
        // lowest point per range bin
        let mut bins: Vec<(usize, f64, f64)> = Vec::new();
        for &i in idx {
            let p = &cloud[i];
            let r = p.x.hypot(p.y);
            bins.push(((r / cfg.bin_size) as usize, r, p.z));
        }
        bins.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.total_cmp(&b.2)).then(a.1.total_cmp(&b.1)));
        bins.dedup_by_key(|b| b.0);
        let protos: Vec<(f64, f64)> = bins.iter().map(|&(_, r, z)| (r, z)).collect();
        let lines = sector_lines(&protos, cfg);
        if lines.is_empty() {
            continue;
        }
        for &i in idx {
            let p = &cloud[i];
            let r = p.x.hypot(p.y);
            let line = lines.iter().rev().find(|l| l.start() <= r).unwrap_or(&lines[0]);
            labels[i] = (p.z - line.at(r)).abs() <= cfg.height_tol;
        }
    }
    Ok(labels)
}
