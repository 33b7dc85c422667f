//! Road-surface polygons around a pose, built from highway centrelines.

use super::{RenderConfig, RenderError};
use crate::attributes::{direct_from_tags, AttributeConfig};
use crate::geodesy::{segment_distance, PlanarPose, SpatialIndex, UtmPoint, Vec2};
use crate::osm::{OsmGraph, WayId};

/// One convex piece of road surface in the vehicle frame (x forward, y
/// left, metres).
#[derive(Clone, Debug, PartialEq)]
pub struct RoadPolygon {
    pub way: WayId,
    pub width: f64,
    pub vertices: Vec<Vec2>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoadPolygonSet {
    pub polygons: Vec<RoadPolygon>,
}

impl RoadPolygonSet {
    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn len(&self) -> usize {
        self.polygons.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Centreline {
    way: WayId,
    width: f64,
    closed: bool,
    /// Relative to `WorldRoads::origin`.
    points: Vec<Vec2>,
}

/// Highway centrelines near a location, kept in world orientation so many
/// poses can be rendered from one selection.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldRoads {
    origin: UtmPoint,
    lines: Vec<Centreline>,
}

impl WorldRoads {
    /// Every highway way with some segment within `radius` of `center`.
    pub fn collect(
        graph: &OsmGraph,
        index: &SpatialIndex,
        center: &UtmPoint,
        radius: f64,
        cfg: &RenderConfig,
        attr: &AttributeConfig,
    ) -> Result<Self, RenderError> {
        let (zone, hemi) = index.zone();
        if !index.is_empty() && center.zone_key() != (zone, hemi) {
            return Err(crate::geodesy::GeoError::ZoneMismatch(center.zone_key(), (zone, hemi)).into());
        }
        let c = center.xy();
        let mut lines = Vec::new();
        for way in graph.ways().values().filter(|w| w.is_highway()) {
            let Some(pts) = way.node_refs.iter().map(|&n| index.position(n)).collect::<Option<Vec<Vec2>>>() else {
                continue;
            };
            let near = pts.windows(2).any(|s| {
                let d = segment_distance(c, s[0], s[1]).unwrap_or_else(|_| (c - s[0]).norm());
                d <= radius
            });
            if !near {
                continue;
            }
            let lanes = direct_from_tags(&way.tags, attr).num_lanes;
            let mut points: Vec<Vec2> = Vec::with_capacity(pts.len());
            for p in pts {
                let rel = p - c;
                if points.last() != Some(&rel) {
                    points.push(rel);
                }
            }
            let closed = way.is_closed();
            if closed && points.len() > 1 && points.first() == points.last() {
                points.pop();
            }
            if points.len() < 2 {
                continue;
            }
            lines.push(Centreline { way: way.id, width: lanes as f64 * cfg.lane_width, closed, points });
        }
        Ok(Self { origin: *center, lines })
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Surface pieces in the frame of `pose`.
    pub fn polygons(&self, pose: &PlanarPose, cfg: &RenderConfig) -> RoadPolygonSet {
        let shift = Vec2::new(pose.position.x - self.origin.x, pose.position.y - self.origin.y);
        let mut polygons = Vec::new();
        for line in &self.lines {
            let pts: Vec<Vec2> = line.points.iter().map(|&p| (p - shift).rotate_deg(-pose.heading_deg)).collect();
            offset_pieces(line.way, line.width, &pts, line.closed, cfg.miter_limit, &mut polygons);
        }
        RoadPolygonSet { polygons }
    }
}

/// Square-ended rectangle per segment plus a miter (or bevel, past the
/// limit) wedge on the outside of each bend. Their union is the mitred
/// offset strip; every piece is convex.
fn offset_pieces(way: WayId, width: f64, pts: &[Vec2], closed: bool, miter_limit: f64, out: &mut Vec<RoadPolygon>) {
    let h = width / 2.0;
    let n = pts.len();
    let seg_count = if closed { n } else { n - 1 };
    let seg = |i: usize| (pts[i % n], pts[(i + 1) % n]);
    let normal = |i: usize| {
        let (a, b) = seg(i);
        (b - a).normalized().map(Vec2::perp)
    };
    let piece = |vertices: Vec<Vec2>| RoadPolygon { way, width, vertices };
    for i in 0..seg_count {
        let (a, b) = seg(i);
        let Some(nl) = normal(i) else { continue };
        let o = nl * h;
        out.push(piece(vec![a + o, b + o, b - o, a - o]));
    }
    let joins: Box<dyn Iterator<Item = usize>> = if closed { Box::new(0..n) } else { Box::new(1..n - 1) };
    for j in joins {
        // segment (j-1) arrives at pts[j], segment j leaves it
        let prev = (j + seg_count - 1) % seg_count;
        let (Some(n1), Some(n2)) = (normal(prev), normal(j % seg_count)) else { continue };
        let (d1, d2) = (n1.perp() * -1.0, n2.perp() * -1.0);
        let turn = d1.cross(d2);
        if turn == 0.0 && d1.dot(d2) > 0.0 {
            continue;
        }
        let s = if turn > 0.0 { -1.0 } else { 1.0 };
        let p = pts[j];
        let (o1, o2) = (p + n1 * (s * h), p + n2 * (s * h));
        let bisector = (n1 + n2).normalized();
        match bisector {
            Some(m) if 1.0 / m.dot(n1) <= miter_limit => {
                let tip = p + m * (s * h / m.dot(n1));
                out.push(piece(vec![p, o1, tip, o2]));
            }
            _ => out.push(piece(vec![p, o1, o2])),
        }
    }
}

/// Road polygons around `pose` within `cfg.radius`, in the vehicle frame.
pub fn build_road_polygons(
    graph: &OsmGraph,
    index: &SpatialIndex,
    pose: &PlanarPose,
    cfg: &RenderConfig,
    attr: &AttributeConfig,
) -> Result<RoadPolygonSet, RenderError> {
    Ok(WorldRoads::collect(graph, index, &pose.position, cfg.radius, cfg, attr)?.polygons(pose, cfg))
}
