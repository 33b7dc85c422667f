//! SLIC superpixels: k-means over (L, a, b, x, y) with a compactness
//! weight and a local search window.

use image::RgbImage;

use super::RefineError;
use crate::morph::{label_components, Connectivity};

#[derive(Clone, Debug, PartialEq)]
pub struct SlicConfig {
    /// Spatial weight against colour distance.
    pub compactness: f64,
    pub iterations: usize,
}

impl Default for SlicConfig {
    fn default() -> Self {
        Self { compactness: 10.0, iterations: 10 }
    }
}

/// Segment label per pixel, row-major, labels `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperpixelMap {
    width: u32,
    height: u32,
    labels: Vec<u32>,
    k: usize,
}

impl SuperpixelMap {
    /// Wraps an existing label grid. Labels must be dense in `0..k`.
    pub fn from_labels(width: u32, height: u32, labels: Vec<u32>) -> Result<Self, RefineError> {
        if labels.len() != width as usize * height as usize {
            return Err(RefineError::BadLabels("length does not match dimensions".into()));
        }
        let k = labels.iter().max().map_or(0, |&m| m as usize + 1);
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(RefineError::BadLabels("labels are not contiguous".into()));
        }
        Ok(Self { width, height, labels, k })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &l in &self.labels {
            out[l as usize] += 1;
        }
        out
    }

    /// Whether every segment is a single 4-connected region.
    pub fn segments_connected(&self) -> bool {
        let (w, h) = (self.width as usize, self.height as usize);
        (0..self.k as u32).all(|s| {
            let bits: Vec<bool> = self.labels.iter().map(|&l| l == s).collect();
            label_components(w, h, &bits, Connectivity::Four).1.len() == 1
        })
    }
}

/// sRGB (8-bit) to CIE Lab under D65.
pub fn rgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = |c: u8| {
        let c = c as f64 / 255.0;
        if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    };
    let (r, g, b) = (lin(rgb[0]), lin(rgb[1]), lin(rgb[2]));
    let x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
    let f = |t: f64| {
        if t > 216.0 / 24389.0 {
            t.cbrt()
        } else {
            (24389.0 / 27.0 * t + 16.0) / 116.0
        }
    };
    let (fx, fy, fz) = (f(x), f(y), f(z));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

#[derive(Clone, Copy, Debug)]
struct Centre {
    lab: [f64; 3],
    x: f64,
    y: f64,
}

/// Segments `image` into roughly `k` superpixels.
pub fn superpixels(image: &RgbImage, k: usize, cfg: &SlicConfig) -> Result<SuperpixelMap, RefineError> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let n = w * h;
    if n == 0 {
        return Err(RefineError::EmptyImage);
    }
    if k == 0 || k > n {
        return Err(RefineError::KTooLarge { k, pixels: n });
    }
    let lab: Vec<[f64; 3]> = image.pixels().map(|p| rgb_to_lab(p.0)).collect();

    // seed grid with aspect-matched cell counts
    let nx = ((k as f64 * w as f64 / h as f64).sqrt().round() as usize).clamp(1, w);
    let ny = ((k as f64 / nx as f64).round() as usize).clamp(1, h);
    let step = ((n as f64) / (nx * ny) as f64).sqrt();
    let mut centres = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let cx = (((i as f64 + 0.5) * w as f64 / nx as f64) as usize).min(w - 1);
            let cy = (((j as f64 + 0.5) * h as f64 / ny as f64) as usize).min(h - 1);
            let (cx, cy) = lowest_gradient(&lab, w, h, cx, cy);
            let i = cy * w + cx;
            centres.push(Centre { lab: lab[i], x: cx as f64, y: cy as f64 });
        }
    }

    let spatial = (cfg.compactness / step).powi(2);
    let radius = step.ceil() as i64;
    let mut labels = vec![0u32; n];
    let mut dist = vec![f64::INFINITY; n];
    for _ in 0..cfg.iterations.max(1) {
        dist.fill(f64::INFINITY);
        for (ci, c) in centres.iter().enumerate() {
            let (x0, x1) = ((c.x as i64 - radius).max(0), (c.x as i64 + radius).min(w as i64 - 1));
            let (y0, y1) = ((c.y as i64 - radius).max(0), (c.y as i64 + radius).min(h as i64 - 1));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let i = y as usize * w + x as usize;
                    let p = lab[i];
                    let dc = (p[0] - c.lab[0]).powi(2) + (p[1] - c.lab[1]).powi(2) + (p[2] - c.lab[2]).powi(2);
                    let ds = (x as f64 - c.x).powi(2) + (y as f64 - c.y).powi(2);
                    let d = dc + ds * spatial;
                    if d < dist[i] {
                        dist[i] = d;
                        labels[i] = ci as u32;
                    }
                }
            }
        }
        // pixels no window reached keep their previous label
        let mut sums = vec![[0.0f64; 6]; centres.len()];
        for (i, &l) in labels.iter().enumerate() {
            let s = &mut sums[l as usize];
            s[0] += lab[i][0];
            s[1] += lab[i][1];
            s[2] += lab[i][2];
            s[3] += (i % w) as f64;
            s[4] += (i / w) as f64;
            s[5] += 1.0;
        }
        for (c, s) in centres.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                *c = Centre { lab: [s[0] / s[5], s[1] / s[5], s[2] / s[5]], x: s[3] / s[5], y: s[4] / s[5] };
            }
        }
    }

    let min_size = ((step * step) / 4.0).max(1.0) as usize;
    let labels = enforce_connectivity(&labels, w, h, min_size);
    SuperpixelMap::from_labels(w as u32, h as u32, labels)
}

/// Moves a seed to the lowest colour-gradient pixel of its 3x3
/// neighbourhood, keeping the centre on ties.
fn lowest_gradient(lab: &[[f64; 3]], w: usize, h: usize, cx: usize, cy: usize) -> (usize, usize) {
    let grad = |x: usize, y: usize| {
        if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
            return f64::INFINITY;
        }
        let d = |a: [f64; 3], b: [f64; 3]| (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>();
        d(lab[y * w + x + 1], lab[y * w + x - 1]) + d(lab[(y + 1) * w + x], lab[(y - 1) * w + x])
    };
    let mut best = (cx, cy);
    let mut best_g = grad(cx, cy);
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            let (x, y) = (cx as i64 + dx, cy as i64 + dy);
            if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                continue;
            }
            let g = grad(x as usize, y as usize);
            if g < best_g {
                best_g = g;
                best = (x as usize, y as usize);
            }
        }
    }
    best
}

/// Splits each label into 4-connected pieces; pieces smaller than
/// `min_size` are absorbed by an adjacent piece found earlier in raster
/// order. Labels come out dense, numbered by first appearance.
fn enforce_connectivity(labels: &[u32], w: usize, h: usize, min_size: usize) -> Vec<u32> {
    const UNSET: u32 = u32::MAX;
    let mut out = vec![UNSET; labels.len()];
    let mut next = 0u32;
    let mut stack = Vec::new();
    let mut members = Vec::new();
    for start in 0..labels.len() {
        if out[start] != UNSET {
            continue;
        }
        // an already-labelled 4-neighbour of the first pixel
        let (sx, sy) = (start % w, start / w);
        let mut adjacent = None;
        for (nx, ny) in neighbours4(sx, sy, w, h) {
            let j = ny * w + nx;
            if out[j] != UNSET {
                adjacent = Some(out[j]);
                break;
            }
        }
        members.clear();
        stack.push(start);
        out[start] = next;
        while let Some(i) = stack.pop() {
            members.push(i);
            for (nx, ny) in neighbours4(i % w, i / w, w, h) {
                let j = ny * w + nx;
                if out[j] == UNSET && labels[j] == labels[start] {
                    out[j] = next;
                    stack.push(j);
                }
            }
        }
        match adjacent {
            Some(a) if members.len() < min_size => {
                for &i in &members {
                    out[i] = a;
                }
            }
            _ => next += 1,
        }
    }
    out
}

fn neighbours4(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    let cand = [(x.wrapping_sub(1), y), (x, y.wrapping_sub(1)), (x + 1, y), (x, y + 1)];
    cand.into_iter().filter(move |&(a, b)| a < w && b < h)
}
