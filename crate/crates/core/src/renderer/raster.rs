//! Depth clipping and pixel-centre scanline fill.

use super::camera::Mat34;
use crate::geodesy::Vec2;

/// Depth `w` of a ground-plane point under a ground→image matrix.
fn depth(m: &Mat34, p: Vec2) -> f64 {
    m[2][0] * p.x + m[2][1] * p.y + m[2][3]
}

/// Clips a ground polygon to `near <= w <= far`. Depth is affine on the
/// ground plane, so both bounds are half-planes.
pub fn clip_depth(poly: &[Vec2], m: &Mat34, near: f64, far: f64) -> Vec<Vec2> {
    let near_side = clip_half_plane(poly, |p| depth(m, p) - near);
    clip_half_plane(&near_side, |p| far - depth(m, p))
}

/// Sutherland–Hodgman against `f(p) >= 0`, with `f` affine.
fn clip_half_plane(poly: &[Vec2], f: impl Fn(Vec2) -> f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (fa, fb) = (f(a), f(b));
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let t = fa / (fa - fb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Projects clipped ground vertices to pixel coordinates.
pub fn to_pixels(poly: &[Vec2], m: &Mat34) -> Vec<(f64, f64)> {
    poly.iter()
        .map(|p| {
            let w = depth(m, *p);
            let u = m[0][0] * p.x + m[0][1] * p.y + m[0][3];
            let v = m[1][0] * p.x + m[1][1] * p.y + m[1][3];
            (u / w, v / w)
        })
        .collect()
}

/// Even-odd fill: pixel `(x, y)` is set when its centre `(x+0.5, y+0.5)`
/// lies inside. Edges are half-open in y so shared edges are not doubled.
pub fn fill_polygon(bits: &mut [bool], width: u32, height: u32, poly: &[(f64, f64)]) {
    if poly.len() < 3 {
        return;
    }
    let (min_y, max_y) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let y0 = ((min_y - 0.5).ceil().max(0.0)) as i64;
    let y1 = ((max_y - 0.5).floor().min(height as f64 - 1.0)) as i64;
    let mut xs = Vec::new();
    let n = poly.len();
    for y in y0..=y1 {
        let yc = y as f64 + 0.5;
        xs.clear();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if (a.1 <= yc) != (b.1 <= yc) {
                xs.push(a.0 + (yc - a.1) * (b.0 - a.0) / (b.1 - a.1));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            // centres in [x_left, x_right)
            let lo = (pair[0] - 0.5).ceil().max(0.0);
            let hi = ((pair[1] - 0.5).ceil()).min(width as f64);
            if hi <= lo {
                continue;
            }
            let row = y as usize * width as usize;
            for x in lo as usize..hi as usize {
                bits[row + x] = true;
            }
        }
    }
}
