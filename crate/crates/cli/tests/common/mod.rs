//! A miniature KITTI road tree: a straight two-lane road running north,
//! seen by a level pinhole camera 1.73 m above it.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use image::{Rgb, RgbImage};

pub const W: u32 = 160;
pub const H: u32 = 96;
pub const F: f64 = 120.0;
pub const CX: f64 = 80.0;
pub const CY: f64 = 40.0;
pub const CAM_H: f64 = 1.73;
pub const HALF_ROAD: f64 = 3.5;

pub const CALIB: &str = "P0: 120 0 80 0 0 120 40 0 0 0 1 0
P2: 120 0 80 0 0 120 40 0 0 0 1 0
R0_rect: 1 0 0 0 1 0 0 0 1
Tr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 0
";

/// Lateral road coordinate (metres, left positive) seen at a pixel centre
/// below the horizon, with its forward distance.
fn ground_at(x: u32, y: u32) -> Option<(f64, f64)> {
    let (u, v) = (x as f64 + 0.5, y as f64 + 0.5);
    if v <= CY + 0.5 {
        return None;
    }
    let fwd = F * CAM_H / (v - CY);
    Some((fwd, -(u - CX) * fwd / F))
}

pub fn scene_image() -> RgbImage {
    RgbImage::from_fn(W, H, |x, y| match ground_at(x, y) {
        None => Rgb([150, 190, 235]),
        Some((fwd, lat)) => {
            // marks drawn about two pixels wide at every distance
            let px_per_m = F / fwd;
            let edge = (lat.abs() - HALF_ROAD).abs() * px_per_m;
            if edge < 1.2 {
                Rgb([245, 245, 245])
            } else if lat.abs() < HALF_ROAD {
                Rgb([70, 70, 75])
            } else {
                Rgb([60, 140, 50])
            }
        }
    })
}

pub fn gt_image() -> RgbImage {
    RgbImage::from_fn(W, H, |x, y| match ground_at(x, y) {
        Some((_, lat)) if lat.abs() <= HALF_ROAD => Rgb([255, 0, 255]),
        _ => Rgb([255, 0, 0]),
    })
}

/// Ground grid plus a parked box on the right.
pub fn scan_bytes() -> Vec<u8> {
    let mut pts = Vec::new();
    let mut x = 3.0;
    while x < 40.0 {
        let mut y = -12.0;
        while y <= 12.0 {
            pts.push([x, y, -CAM_H as f32, 0.2]);
            y += 0.25;
        }
        x += 0.25;
    }
    for i in 0..20 {
        for k in 0..20 {
            pts.push([12.0 + i as f32 * 0.2, -5.0, -1.3 + k as f32 * 0.1, 0.5]);
        }
    }
    pts.iter().flat_map(|p| p.iter().flat_map(|v| v.to_le_bytes())).collect()
}

pub const LAT0: f64 = 49.0;
pub const LON0: f64 = 8.4;

pub fn osm_xml() -> String {
    let mut s = String::from("<?xml version=\"1.0\"?>\n<osm version=\"0.6\">\n");
    for i in 0..9 {
        s += &format!("  <node id=\"{}\" lat=\"{:.7}\" lon=\"{LON0}\"/>\n", i + 1, LAT0 - 0.002 + i as f64 * 0.0005);
    }
    s += "  <way id=\"100\">\n";
    for i in 0..9 {
        s += &format!("    <nd ref=\"{}\"/>\n", i + 1);
    }
    s += "    <tag k=\"highway\" v=\"residential\"/>\n  </way>\n</osm>\n";
    s
}

/// Frame names: one per category.
pub const FRAMES: [&str; 3] = ["um_000000", "umm_000001", "uu_000002"];

fn oxts_line(lat: f64) -> String {
    let mut v = vec![0.0; 30];
    v[0] = lat;
    v[1] = LON0;
    v[5] = std::f64::consts::FRAC_PI_2;
    v[6] = 8.0;
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Writes the tree and a config under `dir`; returns the config path.
pub fn write_fixture(dir: &Path) -> PathBuf {
    let root = dir.join("training");
    for sub in ["image_2", "calib", "velodyne", "gt_image_2", "oxts"] {
        std::fs::create_dir_all(root.join(sub)).unwrap();
    }
    let img = scene_image();
    let gt = gt_image();
    for (i, f) in FRAMES.iter().enumerate() {
        img.save(root.join("image_2").join(format!("{f}.png"))).unwrap();
        std::fs::write(root.join("calib").join(format!("{f}.txt")), CALIB).unwrap();
        std::fs::write(root.join("velodyne").join(format!("{f}.bin")), scan_bytes()).unwrap();
        let (cat, id) = f.split_once('_').unwrap();
        gt.save(root.join("gt_image_2").join(format!("{cat}_road_{id}.png"))).unwrap();
        std::fs::write(root.join("oxts").join(format!("{f}.txt")), oxts_line(LAT0 + i as f64 * 0.0001)).unwrap();
    }
    std::fs::write(dir.join("map.osm"), osm_xml()).unwrap();
    let mut poses = String::from("# t lat lon heading\n");
    for i in 0..100 {
        poses += &format!("{} {:.7} {} 0\n", i as f64 * 0.1, LAT0 - 0.001 + i as f64 * 0.00002, LON0 + 0.00001);
    }
    std::fs::write(dir.join("poses.txt"), poses).unwrap();
    let cfg = dir.join("roadprior.toml");
    std::fs::write(
        &cfg,
        "[paths]\nosm = \"map.osm\"\nkitti_root = \"training\"\npose_file = \"poses.txt\"\noutput_dir = \"out\"\n\n\
         [run]\nseed = 7\njobs = 2\n\n[superpixels]\nk = 120\n\n[candidates]\nn = 20\n",
    )
    .unwrap();
    cfg
}

pub fn roadprior(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_roadprior")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

/// Every regular file under `dir`, relative path and contents, sorted.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
