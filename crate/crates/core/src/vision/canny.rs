//! Grayscale conversion, Gaussian blur and the Canny edge detector.

use image::RgbImage;

/// Rec. 601 luma as `f64` in `[0, 255]`.
pub fn to_gray(image: &RgbImage) -> Vec<f64> {
    image.pixels().map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64).collect()
}

/// Separable Gaussian blur with a kernel radius of `ceil(3σ)` and
/// replicated borders.
pub fn gaussian_blur(src: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return src.to_vec();
    }
    let r = (3.0 * sigma).ceil() as i64;
    let mut kernel: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= s);
    let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;
    let mut tmp = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] =
                kernel.iter().enumerate().map(|(k, kv)| kv * src[y * w + clamp(x as i64 + k as i64 - r, w)]).sum();
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] =
                kernel.iter().enumerate().map(|(k, kv)| kv * tmp[clamp(y as i64 + k as i64 - r, h) * w + x]).sum();
        }
    }
    out
}

/// Canny edges on a (pre-blurred) grayscale image: Sobel gradient with L2
/// magnitude, non-maximum suppression along the quantised gradient
/// direction, then hysteresis with 8-connectivity.
pub fn canny(gray: &[f64], w: usize, h: usize, low: f64, high: f64) -> Vec<bool> {
    let at = |x: i64, y: i64| gray[(y.clamp(0, h as i64 - 1) as usize) * w + x.clamp(0, w as i64 - 1) as usize];
    let mut mag = vec![0.0; w * h];
    let mut dir = vec![0u8; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x - 1, y)
                - at(x - 1, y + 1);
            let gy = at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x, y - 1)
                - at(x + 1, y - 1);
            let i = y as usize * w + x as usize;
            mag[i] = gx.hypot(gy);
            // 0: horizontal gradient, 1: 45°, 2: vertical, 3: 135° (image y down)
            let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            dir[i] = match angle {
                a if !(22.5..157.5).contains(&a) => 0,
                a if a < 67.5 => 1,
                a if a < 112.5 => 2,
                _ => 3,
            };
        }
    }
    let m = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut strong = vec![false; w * h];
    let mut weak = vec![false; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            let v = mag[i];
            if v < low {
                continue;
            }
            let (dx, dy) = match dir[i] {
                0 => (1, 0),
                1 => (1, 1),
                2 => (0, 1),
                _ => (-1, 1),
            };
            // ties with the forward neighbour are suppressed so plateaus thin
            if v > m(x - dx, y - dy) && v >= m(x + dx, y + dy) {
                if v >= high {
                    strong[i] = true;
                } else {
                    weak[i] = true;
                }
            }
        }
    }
    let mut edges = strong.clone();
    let mut stack: Vec<usize> = (0..w * h).filter(|&i| strong[i]).collect();
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if weak[j] && !edges[j] {
                    edges[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blur_preserves_constant_and_mass() {
        let img = vec![7.0; 30];
        assert!(gaussian_blur(&img, 6, 5, 1.5).iter().all(|v| (v - 7.0).abs() < 1e-12));
        let mut spike = vec![0.0; 21 * 21];
        spike[10 * 21 + 10] = 1.0;
        let b = gaussian_blur(&spike, 21, 21, 1.5);
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(b[10 * 21 + 10] > b[10 * 21 + 11]);
    }

    #[test]
    fn step_edge_is_one_pixel_wide() {
        let (w, h) = (20, 10);
        let img: Vec<f64> = (0..w * h).map(|i| if i % w < 10 { 0.0 } else { 200.0 }).collect();
        let e = canny(&gaussian_blur(&img, w, h, 1.5), w, h, 50.0, 150.0);
        for y in 0..h {
            let cols: Vec<usize> = (0..w).filter(|&x| e[y * w + x]).collect();
            assert_eq!(cols.len(), 1, "row {y}: {cols:?}");
            assert!(cols[0] == 9 || cols[0] == 10);
        }
        assert!(canny(&vec![100.0; w * h], w, h, 50.0, 150.0).iter().all(|&b| !b));
    }
}
