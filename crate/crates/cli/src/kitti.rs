//! File layout of a KITTI road style frame set.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use roadprior::attributes::Dynamics;

/// Frame names (image file stems) in sorted order.
pub fn list_frames(image_dir: &Path) -> Result<Vec<String>> {
    let mut frames = Vec::new();
    for entry in std::fs::read_dir(image_dir).with_context(|| format!("listing {}", image_dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                frames.push(stem.to_string());
            }
        }
    }
    frames.sort();
    Ok(frames)
}

/// KITTI names road ground truth `um_road_000000.png` for frame
/// `um_000000`; a file named exactly after the frame is accepted too.
pub fn gt_path(gt_dir: &Path, frame: &str) -> Option<PathBuf> {
    let mut candidates = Vec::new();
    if let Some((cat, id)) = frame.split_once('_') {
        candidates.push(gt_dir.join(format!("{cat}_road_{id}.png")));
    }
    candidates.push(gt_dir.join(format!("{frame}.png")));
    candidates.into_iter().find(|p| p.exists())
}

/// Per-frame seed derived from the run seed and the frame name (FNV-1a), so
/// results do not depend on which frames are processed together.
pub fn frame_seed(seed: u64, frame: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in frame.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ seed
}

/// The fields of an OXTS record the pipeline uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Oxts {
    pub lat: f64,
    pub lon: f64,
    /// Radians, 0 = east, counter-clockwise.
    pub yaw: f64,
    pub dynamics: Dynamics,
}

pub fn parse_oxts(text: &str) -> Result<Oxts> {
    let line = text.lines().find(|l| !l.trim().is_empty()).context("empty OXTS file")?;
    let v: Vec<f64> =
        line.split_whitespace().map(str::parse).collect::<Result<_, _>>().context("OXTS record is not numeric")?;
    if v.len() < 6 {
        bail!("OXTS record has {} fields, need at least 6", v.len());
    }
    let at = |i: usize| v.get(i).copied().unwrap_or(0.0);
    let dynamics =
        Dynamics::new([at(11), at(12), at(13)], [at(17), at(18), at(19)], at(6).hypot(at(7)), v[5].to_degrees());
    Ok(Oxts { lat: v[0], lon: v[1], yaw: v[5], dynamics })
}

/// Lines of `ax ay az wx wy wz speed heading`.
pub fn parse_dynamics(text: &str) -> Result<Vec<Dynamics>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .with_context(|| format!("dynamics line {}", i + 1))?;
        let [ax, ay, az, wx, wy, wz, speed, heading] = v[..] else {
            bail!("dynamics line {}: expected 8 values, found {}", i + 1, v.len());
        };
        out.push(Dynamics::new([ax, ay, az], [wx, wy, wz], speed, heading));
    }
    Ok(out)
}
