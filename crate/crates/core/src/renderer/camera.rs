//! KITTI-style camera model: projection, rectification and extrinsics.

use super::RenderError;

pub type Mat34 = [[f64; 4]; 3];
pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY4: Mat4 = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

/// Mounting height of the KITTI Velodyne above the road (m).
pub const KITTI_VELO_HEIGHT: f64 = 1.73;

pub fn mul44(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mul34(a: &Mat34, b: &Mat4) -> Mat34 {
    let mut out = [[0.0; 4]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn translation(x: f64, y: f64, z: f64) -> Mat4 {
    let mut m = IDENTITY4;
    m[0][3] = x;
    m[1][3] = y;
    m[2][3] = z;
    m
}

fn det3(c: [[f64; 3]; 3]) -> f64 {
    c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
        + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
}

/// Whether a 3x4 matrix has full row rank, judged by its largest 3x3 minor.
fn full_rank(p: &Mat34) -> bool {
    let scale = p.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return false;
    }
    let cols = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let largest = cols.iter().map(|c| det3([0, 1, 2].map(|r| c.map(|j| p[r][j] / scale))).abs()).fold(0.0, f64::max);
    largest > 1e-12
}

#[derive(Clone, Debug, PartialEq)]
pub struct CameraModel {
    /// Rectified camera → pixels.
    pub p: Mat34,
    pub r_rect: Mat4,
    /// Lidar → camera.
    pub t_velo_cam: Mat4,
    /// Road-plane vehicle frame (x forward, y left, z up, z = 0 on the
    /// ground) → Lidar.
    pub t_ground_velo: Mat4,
    pub width: u32,
    pub height: u32,
}

impl CameraModel {
    pub fn new(p: Mat34, r_rect: Mat4, t_velo_cam: Mat4, width: u32, height: u32) -> Result<Self, RenderError> {
        if !full_rank(&p) {
            return Err(RenderError::DegenerateProjection);
        }
        Ok(Self { p, r_rect, t_velo_cam, t_ground_velo: translation(0.0, 0.0, -KITTI_VELO_HEIGHT), width, height })
    }

    pub fn with_ground(mut self, t_ground_velo: Mat4) -> Self {
        self.t_ground_velo = t_ground_velo;
        self
    }

    /// Ideal pinhole looking along the vehicle's x axis from `cam_height`
    /// above the road, with the Lidar frame placed at the camera centre.
    pub fn pinhole(
        focal: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        cam_height: f64,
    ) -> Result<Self, RenderError> {
        let p = [[focal, 0.0, cx, 0.0], [0.0, focal, cy, 0.0], [0.0, 0.0, 1.0, 0.0]];
        // x_cam = -y_velo, y_cam = -z_velo, z_cam = x_velo
        let axes = [[0.0, -1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        Ok(Self::new(p, IDENTITY4, axes, width, height)?.with_ground(translation(0.0, 0.0, -cam_height)))
    }

    /// Parses a KITTI calibration file: `P2`, `R0_rect` and `Tr_velo_to_cam`
    /// are required. An optional `Tr_road_to_velo` (12 values) overrides the
    /// default ground placement of 1.73 m below the Lidar.
    pub fn parse_kitti(text: &str, width: u32, height: u32) -> Result<Self, RenderError> {
        let mut p2 = None;
        let mut r0 = None;
        let mut tr = None;
        let mut ground = None;
        for line in text.lines() {
            let Some((key, rest)) = line.split_once(':') else { continue };
            let key = key.trim();
            let values = || -> Result<Vec<f64>, RenderError> {
                rest.split_whitespace()
                    .map(|v| v.parse::<f64>().map_err(|_| RenderError::Calib(format!("{key}: bad number `{v}`"))))
                    .collect()
            };
            match key {
                "P2" => p2 = Some(expect_len(key, values()?, 12)?),
                "R0_rect" | "R_rect" => r0 = Some(expect_len(key, values()?, 9)?),
                "Tr_velo_to_cam" | "Tr_velo_cam" => tr = Some(expect_len(key, values()?, 12)?),
                "Tr_road_to_velo" => ground = Some(expect_len(key, values()?, 12)?),
                _ => {}
            }
        }
        let missing = |k: &str| RenderError::Calib(format!("missing `{k}`"));
        let p2 = p2.ok_or_else(|| missing("P2"))?;
        let r0 = r0.ok_or_else(|| missing("R0_rect"))?;
        let tr = tr.ok_or_else(|| missing("Tr_velo_to_cam"))?;
        let mut r_rect = IDENTITY4;
        for i in 0..3 {
            for j in 0..3 {
                r_rect[i][j] = r0[i * 3 + j];
            }
        }
        let cam = Self::new(rows34(&p2), r_rect, rigid(&tr), width, height)?;
        Ok(match ground {
            Some(g) => cam.with_ground(rigid(&g)),
            None => cam,
        })
    }

    /// `P · R_rect · T_velo_cam`.
    pub fn velo_to_image(&self) -> Mat34 {
        mul34(&self.p, &mul44(&self.r_rect, &self.t_velo_cam))
    }

    pub fn ground_to_image(&self) -> Mat34 {
        mul34(&self.velo_to_image(), &self.t_ground_velo)
    }

    /// Projects a Lidar-frame point; `None` unless the depth is positive.
    pub fn project_velo(&self, x: f64, y: f64, z: f64) -> Option<(f64, f64, f64)> {
        project(&self.velo_to_image(), [x, y, z])
    }
}

/// Applies a 3x4 projection to a 3-D point; returns `(u, v, depth)` when
/// the depth is positive.
pub fn project(m: &Mat34, p: [f64; 3]) -> Option<(f64, f64, f64)> {
    let h = [0, 1, 2].map(|r| m[r][0] * p[0] + m[r][1] * p[1] + m[r][2] * p[2] + m[r][3]);
    (h[2] > 0.0).then(|| (h[0] / h[2], h[1] / h[2], h[2]))
}

fn expect_len(key: &str, v: Vec<f64>, n: usize) -> Result<Vec<f64>, RenderError> {
    if v.len() != n {
        return Err(RenderError::Calib(format!("{key}: expected {n} values, found {}", v.len())));
    }
    Ok(v)
}

fn rows34(v: &[f64]) -> Mat34 {
    [0, 1, 2].map(|r| [0, 1, 2, 3].map(|c| v[r * 4 + c]))
}

fn rigid(v: &[f64]) -> Mat4 {
    let r = rows34(v);
    [r[0], r[1], r[2], [0.0, 0.0, 0.0, 1.0]]
}
