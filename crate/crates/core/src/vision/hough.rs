//! Line segments from an edge map: a (ρ, θ) vote accumulator, peaks taken
//! in descending vote order, and segments read off along each peak line.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSegment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl LineSegment {
    pub fn length(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    /// dy/dx in image coordinates (y down); infinite for vertical segments.
    pub fn slope(&self) -> f64 {
        (self.y1 - self.y0) / (self.x1 - self.x0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoughConfig {
    pub rho: f64,
    pub theta_deg: f64,
    pub votes: u32,
    pub min_len: f64,
    pub max_gap: f64,
}

impl Default for HoughConfig {
    fn default() -> Self {
        Self { rho: 1.0, theta_deg: 1.0, votes: 30, min_len: 20.0, max_gap: 10.0 }
    }
}

/// Pixel centres of edge pixels are used as coordinates.
pub fn hough_segments(edges: &[bool], w: usize, h: usize, cfg: &HoughConfig) -> Vec<LineSegment> {
    let n_theta = (180.0 / cfg.theta_deg).round().max(1.0) as usize;
    let diag = ((w * w + h * h) as f64).sqrt();
    let n_rho = (2.0 * diag / cfg.rho).ceil() as usize + 1;
    let trig: Vec<(f64, f64)> = (0..n_theta).map(|t| (t as f64 * cfg.theta_deg).to_radians().sin_cos()).collect();
    let rho_bin = |x: f64, y: f64, t: usize| {
        let (s, c) = trig[t];
        ((x * c + y * s + diag) / cfg.rho).round() as usize
    };
    let points: Vec<(f64, f64)> =
        (0..w * h).filter(|&i| edges[i]).map(|i| ((i % w) as f64 + 0.5, (i / w) as f64 + 0.5)).collect();
    let mut acc = vec![0u32; n_theta * n_rho];
    for &(x, y) in &points {
        for t in 0..n_theta {
            acc[t * n_rho + rho_bin(x, y, t)] += 1;
        }
    }
    // local maxima over the 3x3 (θ wraps) neighbourhood, strongest first
    let mut peaks = Vec::new();
    for t in 0..n_theta {
        for r in 0..n_rho {
            let v = acc[t * n_rho + r];
            if v < cfg.votes {
                continue;
            }
            let mut is_max = true;
            'nb: for dt in [n_theta - 1, 0, 1] {
                for dr in [-1i64, 0, 1] {
                    if dt == 0 && dr == 0 {
                        continue;
                    }
                    let (t2, r2) = ((t + dt) % n_theta, r as i64 + dr);
                    if r2 < 0 || r2 >= n_rho as i64 {
                        continue;
                    }
                    let u = acc[t2 * n_rho + r2 as usize];
                    // ties resolve to the earlier cell
                    if u > v || (u == v && (t2, r2 as usize) < (t, r)) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                peaks.push((v, t, r));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut used = vec![false; points.len()];
    let mut out = Vec::new();
    for (_, t, r) in peaks {
        let (s, c) = trig[t];
        let rho = r as f64 * cfg.rho - diag;
        // unused points within half a bin of the line, ordered along it
        let mut on_line: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|(i, p)| !used[*i] && (p.0 * c + p.1 * s - rho).abs() <= cfg.rho.max(1.0) * 0.5 + 0.5)
            .map(|(i, p)| (-p.0 * s + p.1 * c, i))
            .collect();
        on_line.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut start = 0;
        while start < on_line.len() {
            let mut end = start;
            while end + 1 < on_line.len() && on_line[end + 1].0 - on_line[end].0 <= cfg.max_gap {
                end += 1;
            }
            let (a, b) = (points[on_line[start].1], points[on_line[end].1]);
            let seg = LineSegment { x0: a.0, y0: a.1, x1: b.0, y1: b.1 };
            if seg.length() >= cfg.min_len {
                for &(_, i) in &on_line[start..=end] {
                    used[i] = true;
                }
                out.push(seg);
            }
            start = end + 1;
        }
    }
    out
}
