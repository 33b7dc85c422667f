//! Pipeline configuration: a TOML file whose every field is optional, with
//! command-line overrides applied on top.

use std::path::{Path, PathBuf};

use roadprior::attributes::{AttributeConfig, SpeedDefaults};
use roadprior::fusion::{FusionWeights, GtRule};
use roadprior::lidar::GroundSegConfig;
use roadprior::refine::SlicConfig;
use roadprior::renderer::{Distribution, PoseCandidateSpec, RenderConfig};
use roadprior::vision::{GrabcutConfig, LaneMarkConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub osm: Option<PathBuf>,
    /// Root of a KITTI road style tree; fills in any directory left unset.
    pub kitti_root: Option<PathBuf>,
    pub image_dir: Option<PathBuf>,
    pub calib_dir: Option<PathBuf>,
    pub velodyne_dir: Option<PathBuf>,
    pub gt_dir: Option<PathBuf>,
    /// One OXTS record per frame (`<frame>.txt`).
    pub oxts_dir: Option<PathBuf>,
    /// Poses for the attribute export.
    pub pose_file: Option<PathBuf>,
    /// Optional vehicle dynamics, one line per pose.
    pub dynamics_file: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    /// `"auto"` (best F1 per category) or a number in [0, 1].
    pub threshold: String,
    /// Only these frames, when non-empty.
    pub frames: Vec<String>,
    /// Also write edge maps and Hough overlays.
    pub debug_images: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 0, jobs: 0, threshold: "auto".into(), frames: Vec::new(), debug_images: false }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct AttributeSection {
    pub lanes_two_way: u32,
    pub lanes_one_way: u32,
    pub at_intersection_radius: f64,
    pub search_limit: f64,
    pub turning_bend_deg: f64,
    pub signed_curvature: bool,
    pub speed_residential: f64,
    pub speed_tertiary: f64,
    pub speed_secondary: f64,
    pub speed_service: f64,
    pub speed_unclassified: f64,
    pub speed_other: f64,
}

impl Default for AttributeSection {
    fn default() -> Self {
        let a = AttributeConfig::default();
        let s = a.speed_defaults;
        Self {
            lanes_two_way: a.lanes_two_way,
            lanes_one_way: a.lanes_one_way,
            at_intersection_radius: a.at_intersection_radius,
            search_limit: a.search_limit,
            turning_bend_deg: a.turning_bend_deg,
            signed_curvature: a.signed_curvature,
            speed_residential: s.residential,
            speed_tertiary: s.tertiary,
            speed_secondary: s.secondary,
            speed_service: s.service,
            speed_unclassified: s.unclassified,
            speed_other: s.other,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSection {
    pub lane_width: f64,
    pub radius: f64,
    pub near: f64,
    pub far: f64,
    pub miter_limit: f64,
}

impl Default for RenderSection {
    fn default() -> Self {
        let r = RenderConfig::default();
        Self { lane_width: r.lane_width, radius: r.radius, near: r.near, far: r.far, miter_limit: r.miter_limit }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CandidateSection {
    pub n: usize,
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
    /// `"uniform"` or `"gaussian"`.
    pub distribution: String,
}

impl Default for CandidateSection {
    fn default() -> Self {
        let c = PoseCandidateSpec::default();
        Self { n: c.n, dx: c.dx, dy: c.dy, dtheta: c.dtheta, distribution: "uniform".into() }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SuperpixelSection {
    pub k: usize,
    pub compactness: f64,
    pub iterations: usize,
}

impl Default for SuperpixelSection {
    fn default() -> Self {
        let s = SlicConfig::default();
        Self { k: 800, compactness: s.compactness, iterations: s.iterations }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GrabcutSection {
    /// Background rectangle as fractions `[x0, y0, x1, y1]` of the image.
    pub bg_rect: [f64; 4],
    pub fg_rect: [f64; 4],
    pub gmm_components: usize,
    pub max_iters: usize,
    pub gamma: f64,
    pub convergence: f64,
    pub ridge: f64,
}

impl Default for GrabcutSection {
    fn default() -> Self {
        let g = GrabcutConfig::for_image(100, 100);
        Self {
            bg_rect: [0.0, 0.0, 1.0, 0.30],
            fg_rect: [0.35, 0.80, 0.65, 1.0],
            gmm_components: g.gmm_components,
            max_iters: g.max_iters,
            gamma: g.gamma,
            convergence: g.convergence,
            ridge: g.ridge,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LaneMarkSection {
    pub canny_low: f64,
    pub canny_high: f64,
    pub hough_rho: f64,
    pub hough_theta: f64,
    pub hough_votes: u32,
    pub min_len: f64,
    pub max_gap: f64,
    pub horizon_frac: f64,
    pub blur_sigma: f64,
    pub roi_top_width: f64,
    pub min_abs_slope: f64,
    pub degree: usize,
}

impl Default for LaneMarkSection {
    fn default() -> Self {
        let l = LaneMarkConfig::default();
        Self {
            canny_low: l.canny_low,
            canny_high: l.canny_high,
            hough_rho: l.hough_rho,
            hough_theta: l.hough_theta,
            hough_votes: l.hough_votes,
            min_len: l.min_len,
            max_gap: l.max_gap,
            horizon_frac: l.horizon_frac,
            blur_sigma: l.blur_sigma,
            roi_top_width: l.roi_top_width,
            min_abs_slope: l.min_abs_slope,
            degree: l.degree,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GroundSection {
    pub n_sectors: usize,
    pub bin_size: f64,
    pub max_slope_deg: f64,
    pub height_tol: f64,
    pub fill_radius: u32,
    pub sensor_height: f64,
}

impl Default for GroundSection {
    fn default() -> Self {
        let g = GroundSegConfig::default();
        Self {
            n_sectors: g.n_sectors,
            bin_size: g.bin_size,
            max_slope_deg: g.max_slope_deg,
            height_tol: g.height_tol,
            fill_radius: g.fill_radius,
            sensor_height: g.sensor_height,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSection {
    pub osm_refined: f64,
    pub osm_candidates: f64,
    pub grabcut: f64,
    pub lanemark: f64,
    pub lidar: f64,
}

impl Default for WeightSection {
    fn default() -> Self {
        let [osm_refined, osm_candidates, grabcut, lanemark, lidar] = FusionWeights::default().to_array();
        Self { osm_refined, osm_candidates, grabcut, lanemark, lidar }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Road colour in the annotation images.
    pub gt_color: [u8; 3],
    /// When set, road is `channel >= gt_channel_min` instead of a colour match.
    pub gt_channel: Option<usize>,
    pub gt_channel_min: u8,
    pub sweep_step: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { gt_color: [255, 0, 255], gt_channel: None, gt_channel_min: 128, sweep_step: 0.01 }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub run: RunSection,
    pub attributes: AttributeSection,
    pub render: RenderSection,
    pub candidates: CandidateSection,
    pub superpixels: SuperpixelSection,
    pub grabcut: GrabcutSection,
    pub lanemark: LaneMarkSection,
    pub ground: GroundSection,
    pub weights: WeightSection,
    pub eval: EvalSection,
}

/// Fixed or best-F1 operating point for confidence masks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Auto,
    Fixed(f64),
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(path.to_path_buf(), e))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)?;
        // relative paths are taken from the config file's directory
        if let Some(base) = path.parent() {
            cfg.paths.rebase(base);
        }
        Ok(cfg)
    }

    pub fn threshold(&self) -> Result<Threshold, ConfigError> {
        let t = self.run.threshold.trim();
        if t.eq_ignore_ascii_case("auto") {
            return Ok(Threshold::Auto);
        }
        match t.parse::<f64>() {
            Ok(v) if (0.0..=1.0).contains(&v) => Ok(Threshold::Fixed(v)),
            _ => Err(ConfigError::Invalid(format!("threshold `{t}` is neither `auto` nor a number in [0, 1]"))),
        }
    }

    pub fn attribute_config(&self) -> AttributeConfig {
        let a = &self.attributes;
        AttributeConfig {
            lanes_two_way: a.lanes_two_way,
            lanes_one_way: a.lanes_one_way,
            speed_defaults: SpeedDefaults {
                residential: a.speed_residential,
                tertiary: a.speed_tertiary,
                secondary: a.speed_secondary,
                service: a.speed_service,
                unclassified: a.speed_unclassified,
                other: a.speed_other,
            },
            at_intersection_radius: a.at_intersection_radius,
            search_limit: a.search_limit,
            turning_bend_deg: a.turning_bend_deg,
            signed_curvature: a.signed_curvature,
        }
    }

    pub fn render_config(&self) -> RenderConfig {
        let r = &self.render;
        RenderConfig {
            lane_width: r.lane_width,
            radius: r.radius,
            near: r.near,
            far: r.far,
            miter_limit: r.miter_limit,
        }
    }

    pub fn candidate_spec(&self, seed: u64) -> Result<PoseCandidateSpec, ConfigError> {
        let c = &self.candidates;
        let distribution = match c.distribution.to_ascii_lowercase().as_str() {
            "uniform" => Distribution::Uniform,
            "gaussian" => Distribution::Gaussian,
            other => return Err(ConfigError::Invalid(format!("unknown candidate distribution `{other}`"))),
        };
        Ok(PoseCandidateSpec { n: c.n, dx: c.dx, dy: c.dy, dtheta: c.dtheta, distribution, seed })
    }

    pub fn slic_config(&self) -> SlicConfig {
        SlicConfig { compactness: self.superpixels.compactness, iterations: self.superpixels.iterations }
    }

    pub fn grabcut_config(&self, width: u32, height: u32, seed: u64) -> GrabcutConfig {
        let g = &self.grabcut;
        let rect = |f: [f64; 4]| roadprior::vision::Rect::from_fractions(width, height, f[0], f[1], f[2], f[3]);
        GrabcutConfig {
            bg_rect: rect(g.bg_rect),
            fg_rect: rect(g.fg_rect),
            gmm_components: g.gmm_components,
            max_iters: g.max_iters,
            gamma: g.gamma,
            convergence: g.convergence,
            ridge: g.ridge,
            seed,
        }
    }

    pub fn lanemark_config(&self) -> LaneMarkConfig {
        let l = &self.lanemark;
        LaneMarkConfig {
            canny_low: l.canny_low,
            canny_high: l.canny_high,
            hough_rho: l.hough_rho,
            hough_theta: l.hough_theta,
            hough_votes: l.hough_votes,
            min_len: l.min_len,
            max_gap: l.max_gap,
            horizon_frac: l.horizon_frac,
            blur_sigma: l.blur_sigma,
            roi_top_width: l.roi_top_width,
            min_abs_slope: l.min_abs_slope,
            degree: l.degree,
        }
    }

    pub fn ground_config(&self) -> GroundSegConfig {
        let g = &self.ground;
        GroundSegConfig {
            n_sectors: g.n_sectors,
            bin_size: g.bin_size,
            max_slope_deg: g.max_slope_deg,
            height_tol: g.height_tol,
            fill_radius: g.fill_radius,
            sensor_height: g.sensor_height,
        }
    }

    pub fn weights(&self) -> Result<FusionWeights, ConfigError> {
        let w = &self.weights;
        FusionWeights::from_array([w.osm_refined, w.osm_candidates, w.grabcut, w.lanemark, w.lidar])
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn set_weights(&mut self, w: [f64; 5]) {
        self.weights =
            WeightSection { osm_refined: w[0], osm_candidates: w[1], grabcut: w[2], lanemark: w[3], lidar: w[4] };
    }

    pub fn gt_rule(&self) -> GtRule {
        match self.eval.gt_channel {
            Some(channel) => GtRule::Channel { channel, min: self.eval.gt_channel_min },
            None => GtRule::Color(self.eval.gt_color),
        }
    }

    /// Checks everything that does not depend on which subcommand runs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.threshold()?;
        self.weights()?;
        self.candidate_spec(0)?;
        self.lanemark_config().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.ground_config().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.superpixels.k == 0 {
            return Err(ConfigError::Invalid("superpixels.k must be positive".into()));
        }
        if self.grabcut.gmm_components == 0 {
            return Err(ConfigError::Invalid("grabcut.gmm_components must be positive".into()));
        }
        if !(self.eval.sweep_step > 0.0 && self.eval.sweep_step <= 1.0) {
            return Err(ConfigError::Invalid("eval.sweep_step must lie in (0, 1]".into()));
        }
        if matches!(self.eval.gt_channel, Some(c) if c > 2) {
            return Err(ConfigError::Invalid("eval.gt_channel must be 0, 1 or 2".into()));
        }
        Ok(())
    }

    /// Requires the listed paths to be set and to exist.
    pub fn require(&self, what: &[(&str, &Option<PathBuf>)]) -> Result<(), ConfigError> {
        for (name, p) in what {
            match p {
                None => return Err(ConfigError::Invalid(format!("paths.{name} is not set"))),
                Some(p) if !p.exists() => {
                    return Err(ConfigError::Invalid(format!("paths.{name}: {} does not exist", p.display())))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut self.osm);
        fix(&mut self.kitti_root);
        fix(&mut self.image_dir);
        fix(&mut self.calib_dir);
        fix(&mut self.velodyne_dir);
        fix(&mut self.gt_dir);
        fix(&mut self.oxts_dir);
        fix(&mut self.pose_file);
        fix(&mut self.dynamics_file);
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
    }

    /// Directory for one KITTI component, from its own setting or the root.
    pub fn dir(&self, explicit: &Option<PathBuf>, kitti_name: &str) -> Option<PathBuf> {
        explicit.clone().or_else(|| self.kitti_root.as_ref().map(|r| r.join(kitti_name)))
    }

    pub fn images(&self) -> Option<PathBuf> {
        self.dir(&self.image_dir, "image_2")
    }

    pub fn calib(&self) -> Option<PathBuf> {
        self.dir(&self.calib_dir, "calib")
    }

    pub fn velodyne(&self) -> Option<PathBuf> {
        self.dir(&self.velodyne_dir, "velodyne")
    }

    pub fn gt(&self) -> Option<PathBuf> {
        self.dir(&self.gt_dir, "gt_image_2")
    }

    pub fn oxts(&self) -> Option<PathBuf> {
        self.dir(&self.oxts_dir, "oxts")
    }
}
