//! Multiple-viewpoint confidence mask: the per-pixel mean of binary masks
//! rendered from randomly perturbed poses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};

use super::polygons::WorldRoads;
use super::{render_mask, CameraModel, RenderConfig, RenderError};
use crate::attributes::AttributeConfig;
use crate::geodesy::{PlanarPose, SpatialIndex};
use crate::mask::{MaskError, MaskKind, RoadMask};
use crate::osm::OsmGraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Distribution {
    #[default]
    Uniform,
    /// σ = half-range / 2, truncated to the half-range.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoseCandidateSpec {
    pub n: usize,
    /// Half-ranges: metres east, metres north, degrees.
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
    pub distribution: Distribution,
    pub seed: u64,
}

impl Default for PoseCandidateSpec {
    fn default() -> Self {
        Self { n: 100, dx: 1.0, dy: 1.0, dtheta: 10.0, distribution: Distribution::Uniform, seed: 0 }
    }
}

impl PoseCandidateSpec {
    fn validate(&self) -> Result<(), RenderError> {
        let ranges_ok = [self.dx, self.dy, self.dtheta].iter().all(|r| r.is_finite() && *r >= 0.0);
        if self.n == 0 || !ranges_ok {
            return Err(RenderError::BadSpec(format!("{self:?}")));
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, half: f64, dist: Distribution) -> f64 {
    if half == 0.0 {
        return 0.0;
    }
    match dist {
        Distribution::Uniform => rng.random_range(-half..=half),
        Distribution::Gaussian => {
            let normal = Normal::new(0.0, half / 2.0).expect("positive sigma");
            loop {
                let v: f64 = normal.sample(rng);
                if v.abs() <= half {
                    return v;
                }
            }
        }
    }
}

/// The `n` perturbations `(dx, dy, dθ)`, deterministic in the seed.
pub fn sample_offsets(spec: &PoseCandidateSpec) -> Result<Vec<(f64, f64, f64)>, RenderError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.n)
        .map(|_| {
            let dx = draw(&mut rng, spec.dx, spec.distribution);
            let dy = draw(&mut rng, spec.dy, spec.distribution);
            let dt = draw(&mut rng, spec.dtheta, spec.distribution);
            (dx, dy, dt)
        })
        .collect())
}

pub fn candidate_poses(pose: &PlanarPose, spec: &PoseCandidateSpec) -> Result<Vec<PlanarPose>, RenderError> {
    Ok(sample_offsets(spec)?.into_iter().map(|(dx, dy, dt)| pose.perturbed(dx, dy, dt)).collect())
}

/// Binary masks for each candidate pose, in sampling order.
pub fn candidate_masks(
    graph: &OsmGraph,
    index: &SpatialIndex,
    pose: &PlanarPose,
    cam: &CameraModel,
    spec: &PoseCandidateSpec,
    cfg: &RenderConfig,
    attr: &AttributeConfig,
) -> Result<Vec<RoadMask>, RenderError> {
    let poses = candidate_poses(pose, spec)?;
    // widen the selection so shifted viewpoints see the same roads
    let margin = spec.dx.hypot(spec.dy);
    let roads = WorldRoads::collect(graph, index, &pose.position, cfg.radius + margin, cfg, attr)?;
    poses.iter().map(|p| render_mask(&roads.polygons(p, cfg), cam, cfg)).collect()
}

/// Confidence as the fraction of candidates that render road at each
/// pixel.
pub fn candidates_mask(
    graph: &OsmGraph,
    index: &SpatialIndex,
    pose: &PlanarPose,
    cam: &CameraModel,
    spec: &PoseCandidateSpec,
    cfg: &RenderConfig,
    attr: &AttributeConfig,
) -> Result<RoadMask, RenderError> {
    let masks = candidate_masks(graph, index, pose, cam, spec, cfg, attr)?;
    Ok(average_masks(&masks)?)
}

/// Per-pixel mean over `masks`, summed in slice order. Binary inputs give
/// exact vote fractions `k / n`.
pub fn average_masks(masks: &[RoadMask]) -> Result<RoadMask, MaskError> {
    let Some(first) = masks.first() else {
        return Err(MaskError::BadLength { width: 0, height: 0, got: 0 });
    };
    for m in masks {
        first.same_shape(m)?;
    }
    let n = masks.len() as f64;
    let mut data = vec![0.0; first.len()];
    if masks.iter().all(|m| m.kind() == MaskKind::Binary) {
        let mut votes = vec![0u32; first.len()];
        for m in masks {
            for (v, &x) in votes.iter_mut().zip(m.data()) {
                *v += (x == 1.0) as u32;
            }
        }
        for (d, k) in data.iter_mut().zip(votes) {
            *d = k as f64 / n;
        }
    } else {
        for m in masks {
            for (d, &x) in data.iter_mut().zip(m.data()) {
                *d += x;
            }
        }
        for d in &mut data {
            *d = (*d / n).clamp(0.0, 1.0);
        }
    }
    RoadMask::from_vec(first.width(), first.height(), MaskKind::Confidence, data)
}
