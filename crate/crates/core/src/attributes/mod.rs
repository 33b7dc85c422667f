//! Per-pose scene attributes: tag-read road properties plus geometry
//! relative to the closest way node (N0), the intersection ahead (N1) and
//! the next node in front (N2).

mod direct;
mod export;
mod geometry;
mod intersection;

use thiserror::Error;

use crate::geodesy::{GeoError, PlanarPose, SpatialIndex, Vec2};
use crate::osm::{NodeId, OsmGraph, WayId};

pub use direct::{direct_from_tags, lane_direction_code, parse_direct, speed_limit, DirectAttributes, RoadType};
pub use export::{
    export_features, feature_row, lane_code_packed, write_attribute_csv, Dynamics, ATTRIBUTE_FIELDS, FEATURE_COLUMNS,
};
pub use geometry::{bearing_angle, distance_to_intersection, road_curvature, signed_road_curvature};
pub use intersection::{classify_intersection, IntersectionType};

use geometry::Travel;

#[derive(Debug, Error)]
pub enum AttrError {
    #[error("unknown way {0}")]
    UnknownWay(WayId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("bearing between coincident points")]
    CoincidentPoints,
    #[error("zero-length direction")]
    DegenerateSegment,
    #[error("nodes {0} and {1} share no highway way")]
    NoCommonWay(NodeId, NodeId),
    #[error("no intersection ahead within the search limit")]
    NoIntersectionAhead,
    #[error("no next node in the travel direction")]
    MissingNextNode,
    #[error("{poses} poses but {dynamics} dynamics records")]
    LengthMismatch { poses: usize, dynamics: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

/// Default speed limits (km/h) by road type when `maxspeed` is absent.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedDefaults {
    pub residential: f64,
    pub tertiary: f64,
    pub secondary: f64,
    pub service: f64,
    pub unclassified: f64,
    pub other: f64,
}

impl Default for SpeedDefaults {
    fn default() -> Self {
        Self { residential: 30.0, tertiary: 50.0, secondary: 60.0, service: 20.0, unclassified: 50.0, other: 50.0 }
    }
}

impl SpeedDefaults {
    pub fn for_road(&self, road: RoadType) -> f64 {
        match road {
            RoadType::Residential => self.residential,
            RoadType::Tertiary => self.tertiary,
            RoadType::Secondary => self.secondary,
            RoadType::Service => self.service,
            RoadType::Unclassified => self.unclassified,
            RoadType::Other => self.other,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributeConfig {
    pub lanes_two_way: u32,
    pub lanes_one_way: u32,
    pub speed_defaults: SpeedDefaults,
    /// Distance below which the vehicle counts as at the intersection (m).
    pub at_intersection_radius: f64,
    /// How far along the current way to look for an intersection (m).
    pub search_limit: f64,
    /// Minimum bend for two joined ways to count as a turning (degrees).
    pub turning_bend_deg: f64,
    /// Also report the signed curvature (positive = left).
    pub signed_curvature: bool,
}

impl Default for AttributeConfig {
    fn default() -> Self {
        Self {
            lanes_two_way: 2,
            lanes_one_way: 1,
            speed_defaults: SpeedDefaults::default(),
            at_intersection_radius: 10.0,
            search_limit: 200.0,
            turning_bend_deg: 30.0,
            signed_curvature: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndirectAttributes {
    /// km/h.
    pub speed_limit: f64,
    pub intersection_type: IntersectionType,
    pub at_intersection: bool,
    /// d1 + d2 in metres; `None` when no intersection lies ahead.
    pub dist_to_intersection: Option<f64>,
    /// α, east-based CCW degrees.
    pub bearing_to_intersection: Option<f64>,
    /// β, unsigned degrees in `[0, 180]`.
    pub road_curvature: f64,
    /// Set when β could not be computed (way end) and was reported as 0.
    pub curvature_missing: bool,
    pub signed_curvature: Option<f64>,
    /// γ, east-based CCW degrees.
    pub heading: f64,
    /// d3 in metres.
    pub dist_to_center: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneAttributes {
    pub direct: DirectAttributes,
    pub indirect: IndirectAttributes,
    pub anchor_node: NodeId,
    /// Way the vehicle is taken to be travelling on.
    pub anchor_way: WayId,
    pub intersection_node: Option<NodeId>,
    pub next_node: Option<NodeId>,
}

/// Both orientations of every highway segment touching N0.
fn travel_options(graph: &OsmGraph, index: &SpatialIndex, n0: NodeId, p: Vec2) -> Vec<Travel> {
    let mut out = Vec::new();
    for slot in graph.highway_memberships(n0) {
        let refs = &graph.ways()[&slot.way].node_refs;
        let i = slot.position;
        let starts = [i.checked_sub(1), Some(i).filter(|&i| i + 1 < refs.len())];
        for a in starts.into_iter().flatten() {
            out.extend(Travel::new(index, refs, slot.way, a, 1, p));
            out.extend(Travel::new(index, refs, slot.way, a + 1, -1, p));
        }
    }
    out
}

/// Picks the oriented segment whose direction best matches the heading.
/// Ties go to the segment nearer the pose, then the lower way id, then
/// travel along node order.
fn choose_travel(graph: &OsmGraph, index: &SpatialIndex, options: &[Travel], heading: Vec2) -> Option<Travel> {
    let mut best: Option<(f64, Travel)> = None;
    for t in options {
        let refs = &graph.ways()[&t.way].node_refs;
        let align = t.direction(index, refs).normalized().map_or(f64::NEG_INFINITY, |d| d.dot(heading));
        let better = match best {
            None => true,
            Some((ba, bt)) => {
                align > ba
                    || (align == ba
                        && (t.offset, t.way, -t.dir, t.a_idx).partial_cmp(&(bt.offset, bt.way, -bt.dir, bt.a_idx))
                            == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some((align, *t));
        }
    }
    best.map(|(_, t)| t)
}

/// Computes the full attribute record for one pose.
///
/// Only an empty index or a zone mismatch is an error; anything that cannot
/// be derived (no intersection ahead, way end) is left unset.
pub fn scene_attributes(
    graph: &OsmGraph,
    index: &SpatialIndex,
    pose: &PlanarPose,
    cfg: &AttributeConfig,
) -> Result<SceneAttributes, AttrError> {
    let nearest = index.nearest_way_node(&pose.position)?;
    let n0 = nearest.entry.node;
    let p = pose.xy();
    let options = travel_options(graph, index, n0, p);
    let travel = choose_travel(graph, index, &options, pose.heading_vec());

    let anchor_way = travel.map_or(nearest.entry.way, |t| t.way);
    let way = graph.way(anchor_way).ok_or(AttrError::UnknownWay(anchor_way))?;
    let direct = direct_from_tags(&way.tags, cfg);
    let speed = speed_limit(&way.tags, direct.road_type, cfg);

    let mut indirect = IndirectAttributes {
        speed_limit: speed,
        intersection_type: IntersectionType::None,
        at_intersection: false,
        dist_to_intersection: None,
        bearing_to_intersection: None,
        road_curvature: 0.0,
        curvature_missing: true,
        signed_curvature: None,
        heading: pose.heading_deg,
        dist_to_center: nearest.distance,
    };
    let mut intersection_node = None;
    let mut next_node = None;

    if let Some(t) = travel {
        let refs = &way.node_refs;
        indirect.dist_to_center = t.offset;

        for (i, arc) in t.ahead(index, refs) {
            if arc > cfg.search_limit {
                break;
            }
            let kind = classify_intersection(graph, index, refs[i], cfg)?;
            if kind != IntersectionType::None {
                intersection_node = Some(refs[i]);
                indirect.intersection_type = kind;
                indirect.dist_to_intersection = Some(arc);
                indirect.at_intersection = arc < cfg.at_intersection_radius;
                break;
            }
        }

        // N0 is one end of the travel segment
        let at_a = refs[t.a_idx] == n0;
        let n0_idx = if at_a { t.a_idx } else { t.b_idx };
        let step = |i: usize| i.checked_add_signed(t.dir).filter(|&j| j < refs.len());
        let back = |i: usize| i.checked_add_signed(-t.dir).filter(|&j| j < refs.len());
        next_node = step(n0_idx).map(|j| refs[j]);
        let incoming = back(n0_idx).and_then(|j| Some(index.position(n0)? - index.position(refs[j])?));
        if let (Some(n2), Some(inc)) = (next_node, incoming) {
            let (u0, u2) = (index.utm(n0), index.utm(n2));
            if let (Some(u0), Some(u2)) = (u0, u2) {
                if let Ok(signed) = signed_road_curvature(&u0, &u2, inc) {
                    indirect.road_curvature = signed.abs();
                    indirect.curvature_missing = false;
                    if cfg.signed_curvature {
                        indirect.signed_curvature = Some(signed);
                    }
                }
            }
        }
    }

    if let Some(n1) = intersection_node {
        let u1 = index.utm(n1).ok_or(AttrError::UnknownNode(n1))?;
        let from = index.utm(n0).ok_or(AttrError::UnknownNode(n0))?;
        indirect.bearing_to_intersection =
            bearing_angle(&from, &u1).or_else(|_| bearing_angle(&pose.position, &u1)).ok();
    }

    Ok(SceneAttributes { direct, indirect, anchor_node: n0, anchor_way, intersection_node, next_node })
}
