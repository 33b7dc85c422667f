//! Iterated graph-cut road/non-road segmentation seeded by two fixed
//! rectangles.

use image::RgbImage;
use log::warn;

use super::gmm::{kmeans, Gmm, Vec3};
use super::maxflow::{FlowGraph, Segment};
use super::VisionError;
use crate::mask::RoadMask;
use crate::morph::{keep_largest_component, Connectivity};

/// Pixel rectangle `[x, x + w) × [y, y + h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && y >= self.y && x - self.x < self.w && y - self.y < self.h
    }

    fn intersects(&self, o: &Rect) -> bool {
        self.x < o.x + o.w && o.x < self.x + self.w && self.y < o.y + o.h && o.y < self.y + self.h
    }

    fn inside(&self, width: u32, height: u32) -> bool {
        self.w > 0 && self.h > 0 && self.x + self.w <= width && self.y + self.h <= height
    }

    /// Rectangle from fractions of the image size: the pixels whose centres
    /// fall in `[x0·W, x1·W) × [y0·H, y1·H)`.
    pub fn from_fractions(width: u32, height: u32, x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        let px = |f: f64, n: u32| (f * n as f64 - 0.5).ceil().clamp(0.0, n as f64) as u32;
        let (ax, ay, bx, by) = (px(x0, width), px(y0, height), px(x1, width), px(y1, height));
        Rect::new(ax, ay, bx.saturating_sub(ax), by.saturating_sub(ay))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrabcutConfig {
    /// Certain background.
    pub bg_rect: Rect,
    /// Certain foreground (road).
    pub fg_rect: Rect,
    pub gmm_components: usize,
    pub max_iters: usize,
    pub gamma: f64,
    /// Stop once fewer than this fraction of pixels change label.
    pub convergence: f64,
    /// Ridge added to each component's scatter matrix.
    pub ridge: f64,
    /// Seed for the k-means initialisation.
    pub seed: u64,
}

impl GrabcutConfig {
    /// Top 30 % of rows as background; rows from 80 % down, columns
    /// 35–65 %, as road.
    pub fn for_image(width: u32, height: u32) -> Self {
        Self {
            bg_rect: Rect::from_fractions(width, height, 0.0, 0.0, 1.0, 0.30),
            fg_rect: Rect::from_fractions(width, height, 0.35, 0.80, 0.65, 1.0),
            gmm_components: 5,
            max_iters: 5,
            gamma: 50.0,
            convergence: 0.001,
            ridge: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrabcutResult {
    pub mask: RoadMask,
    /// Energy after each graph cut.
    pub energies: Vec<f64>,
    pub iterations: usize,
    pub fg_components: usize,
    pub bg_components: usize,
}

struct Problem<'a> {
    w: usize,
    h: usize,
    z: &'a [Vec3],
    hard: Vec<Option<bool>>,
    /// (i, j, weight) for each 8-neighbour pair once.
    pairs: Vec<(u32, u32, f64)>,
}

impl Problem<'_> {
    fn new<'a>(w: usize, h: usize, z: &'a [Vec3], cfg: &GrabcutConfig) -> Problem<'a> {
        let mut hard = vec![None; w * h];
        for y in 0..h {
            for x in 0..w {
                if cfg.fg_rect.contains(x as u32, y as u32) {
                    hard[y * w + x] = Some(true);
                } else if cfg.bg_rect.contains(x as u32, y as u32) {
                    hard[y * w + x] = Some(false);
                }
            }
        }
        // right, down-left, down, down-right
        let offsets: [(i64, i64, f64); 4] =
            [(1, 0, 1.0), (-1, 1, std::f64::consts::SQRT_2), (0, 1, 1.0), (1, 1, std::f64::consts::SQRT_2)];
        let d2 = |a: &Vec3, b: &Vec3| (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>();
        let mut raw = Vec::with_capacity(4 * w * h);
        let mut sum = 0.0;
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                for &(dx, dy, dist) in &offsets {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let (i, j) = ((y * w as i64 + x) as u32, (ny * w as i64 + nx) as u32);
                    let d = d2(&z[i as usize], &z[j as usize]);
                    sum += d;
                    raw.push((i, j, d, dist));
                }
            }
        }
        let mean = if raw.is_empty() { 0.0 } else { sum / raw.len() as f64 };
        let beta = if mean > 0.0 { 1.0 / (2.0 * mean) } else { 0.0 };
        let pairs = raw.into_iter().map(|(i, j, d, dist)| (i, j, cfg.gamma * (-beta * d).exp() / dist)).collect();
        Problem { w, h, z, hard, pairs }
    }

    fn data_costs(&self, fg: &Gmm, bg: &Gmm) -> Vec<(f64, f64)> {
        self.z.iter().map(|z| (fg.best(z).0, bg.best(z).0)).collect()
    }

    fn energy(&self, labels: &[bool], costs: &[(f64, f64)], fg: &Gmm, bg: &Gmm) -> f64 {
        let data: f64 = labels.iter().zip(costs).map(|(&l, c)| if l { c.0 } else { c.1 }).sum();
        let smooth: f64 =
            self.pairs.iter().filter(|(i, j, _)| labels[*i as usize] != labels[*j as usize]).map(|p| p.2).sum();
        data + smooth + fg.prior_energy() + bg.prior_energy()
    }

    fn cut(&self, costs: &[(f64, f64)]) -> Vec<bool> {
        let mut g = FlowGraph::with_capacity(self.w * self.h, self.pairs.len());
        for (i, (&(dfg, dbg), hard)) in costs.iter().zip(&self.hard).enumerate() {
            match hard {
                Some(true) => g.add_tweights(i, f64::INFINITY, 0.0),
                Some(false) => g.add_tweights(i, 0.0, f64::INFINITY),
                None => {
                    let m = dfg.min(dbg);
                    // source side (road) pays the sink link
                    g.add_tweights(i, dbg - m, dfg - m);
                }
            }
        }
        for &(i, j, wt) in &self.pairs {
            g.add_edge(i as usize, j as usize, wt, wt);
        }
        g.maxflow();
        (0..self.w * self.h).map(|i| g.segment(i) == Segment::Source).collect()
    }
}

fn distinct_count(samples: &[Vec3], cap: usize) -> usize {
    let mut seen: Vec<[u64; 3]> = Vec::new();
    for s in samples {
        let key = s.map(f64::to_bits);
        if !seen.contains(&key) {
            seen.push(key);
            if seen.len() >= cap {
                break;
            }
        }
    }
    seen.len()
}

/// k-means initialised mixture; `k` is reduced (with a warning) when the
/// samples hold fewer distinct colours.
fn init_gmm(samples: &[Vec3], k: usize, ridge: f64, seed: u64, which: &str) -> Gmm {
    let distinct = distinct_count(samples, k);
    let k_eff = k.min(distinct).max(1);
    if k_eff < k {
        warn!("{which} seeds hold {distinct} distinct colours; using {k_eff} mixture components instead of {k}");
    }
    let assign = kmeans(samples, k_eff, 10, seed);
    Gmm::fit(samples, &assign, k_eff, ridge)
}

/// Re-estimates each mixture from the pixels currently carrying its label,
/// keeping per-pixel component assignment to the best current component.
fn refit(gmm: &Gmm, samples: &[Vec3]) -> Gmm {
    let assign: Vec<usize> = samples.iter().map(|z| gmm.best(z).1).collect();
    Gmm::fit(samples, &assign, gmm.components.len(), gmm.ridge)
}

pub fn grabcut_road(image: &RgbImage, cfg: &GrabcutConfig) -> Result<GrabcutResult, VisionError> {
    let (width, height) = image.dimensions();
    for (name, r) in [("bg_rect", &cfg.bg_rect), ("fg_rect", &cfg.fg_rect)] {
        if !r.inside(width, height) {
            return Err(VisionError::RectOutOfBounds(name, *r));
        }
    }
    if cfg.bg_rect.intersects(&cfg.fg_rect) {
        return Err(VisionError::RectsOverlap);
    }
    let (w, h) = (width as usize, height as usize);
    let z: Vec<Vec3> = image.pixels().map(|p| p.0.map(f64::from)).collect();
    let problem = Problem::new(w, h, &z, cfg);

    let pick = |want: bool| -> Vec<Vec3> {
        problem.hard.iter().zip(&z).filter(|(hd, _)| **hd == Some(want)).map(|(_, v)| *v).collect()
    };
    let mut fg = init_gmm(&pick(true), cfg.gmm_components, cfg.ridge, cfg.seed, "road");
    let mut bg = init_gmm(&pick(false), cfg.gmm_components, cfg.ridge, cfg.seed.wrapping_add(1), "background");

    let mut costs = problem.data_costs(&fg, &bg);
    let mut labels = problem.cut(&costs);
    let mut energies = vec![problem.energy(&labels, &costs, &fg, &bg)];
    let mut iterations = 1;
    while iterations < cfg.max_iters {
        let split =
            |want: bool| -> Vec<Vec3> { labels.iter().zip(&z).filter(|(l, _)| **l == want).map(|(_, v)| *v).collect() };
        fg = refit(&fg, &split(true));
        bg = refit(&bg, &split(false));
        costs = problem.data_costs(&fg, &bg);
        let next = problem.cut(&costs);
        let e = problem.energy(&next, &costs, &fg, &bg);
        let prev = *energies.last().unwrap();
        debug_assert!(e <= prev + 1e-9 * prev.abs().max(1.0), "energy rose from {prev} to {e}");
        energies.push(e);
        let changed = next.iter().zip(&labels).filter(|(a, b)| a != b).count();
        labels = next;
        iterations += 1;
        if (changed as f64) < cfg.convergence * (w * h) as f64 {
            break;
        }
    }
    let kept = keep_largest_component(w, h, &labels, Connectivity::Eight);
    Ok(GrabcutResult {
        mask: RoadMask::from_bools(width, height, &kept)?,
        energies,
        iterations,
        fg_components: fg.components.len(),
        bg_components: bg.components.len(),
    })
}
