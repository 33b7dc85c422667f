//! Binary grid helpers shared by the mask producers: connected components
//! and disc morphology via an exact Euclidean distance transform.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(i32, i32)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
        }
    }
}

/// Labels connected `true` regions. Returns per-pixel labels (`u32::MAX`
/// for background) and the size of each component, numbered in raster
/// order of their first pixel.
pub fn label_components(width: usize, height: usize, bits: &[bool], conn: Connectivity) -> (Vec<u32>, Vec<usize>) {
    assert_eq!(bits.len(), width * height);
    let mut labels = vec![u32::MAX; bits.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..bits.len() {
        if !bits[start] || labels[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        labels[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % width) as i32, (i / width) as i32);
            for &(dx, dy) in conn.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= width as i32 || ny >= height as i32 {
                    continue;
                }
                let j = ny as usize * width + nx as usize;
                if bits[j] && labels[j] == u32::MAX {
                    labels[j] = id;
                    queue.push_back(j);
                }
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

/// Keeps only the largest connected component. Ties go to the component
/// whose first pixel comes earliest in raster order.
pub fn keep_largest_component(width: usize, height: usize, bits: &[bool], conn: Connectivity) -> Vec<bool> {
    let (labels, sizes) = label_components(width, height, bits, conn);
    let Some(best) = largest_index(&sizes) else {
        return vec![false; bits.len()];
    };
    labels.iter().map(|&l| l == best as u32).collect()
}

pub(crate) fn largest_index(sizes: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in sizes.iter().enumerate() {
        if best.is_none_or(|b| s > sizes[b]) {
            best = Some(i);
        }
    }
    best
}

const INF: f64 = 1e20;

/// 1-D squared distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let intersect =
        |q: usize, p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s = intersect(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = intersect(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Squared Euclidean distance from every pixel to the nearest `true` pixel
/// (large value when there is none).
pub fn squared_distance_to(width: usize, height: usize, bits: &[bool]) -> Vec<f64> {
    let mut grid: Vec<f64> = bits.iter().map(|&b| if b { 0.0 } else { INF }).collect();
    let n = width.max(height);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        edt_1d(&f[..height], &mut out[..height], &mut v, &mut z);
        for y in 0..height {
            grid[y * width + x] = out[y];
        }
    }
    for y in 0..height {
        let row = &mut grid[y * width..(y + 1) * width];
        f[..width].copy_from_slice(row);
        edt_1d(&f[..width], &mut out[..width], &mut v, &mut z);
        row.copy_from_slice(&out[..width]);
    }
    grid
}

/// Dilation by a disc of the given radius (pixel offsets with dx²+dy² ≤ r²).
pub fn dilate_disc(width: usize, height: usize, bits: &[bool], radius: u32) -> Vec<bool> {
    let r2 = (radius * radius) as f64;
    squared_distance_to(width, height, bits).into_iter().map(|d| d <= r2).collect()
}

/// Erosion by a disc; pixels outside the image count as set.
pub fn erode_disc(width: usize, height: usize, bits: &[bool], radius: u32) -> Vec<bool> {
    let inverted: Vec<bool> = bits.iter().map(|&b| !b).collect();
    let r2 = (radius * radius) as f64;
    squared_distance_to(width, height, &inverted).into_iter().map(|d| d > r2).collect()
}

pub fn close_disc(width: usize, height: usize, bits: &[bool], radius: u32) -> Vec<bool> {
    let d = dilate_disc(width, height, bits, radius);
    erode_disc(width, height, &d, radius)
}
