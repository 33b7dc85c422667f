//! Planar geometry behind the computed ("indirect") attributes.

use super::AttrError;
use crate::geodesy::PlanarPose;
use crate::geodesy::{project_on_segment, SpatialIndex, UtmPoint, Vec2};
use crate::osm::{NodeId, OsmGraph, WayId};

/// East-based CCW direction from `from` to `to`, in `[0, 360)`.
pub fn bearing_angle(from: &UtmPoint, to: &UtmPoint) -> Result<f64, AttrError> {
    from.same_zone(to)?;
    let d = to.xy() - from.xy();
    if d.x == 0.0 && d.y == 0.0 {
        return Err(AttrError::CoincidentPoints);
    }
    Ok(d.angle_deg())
}

/// Unsigned angle in `[0, 180]` between the incoming direction at N0 and
/// the direction N0→N2.
pub fn road_curvature(n0: &UtmPoint, n2: &UtmPoint, incoming: Vec2) -> Result<f64, AttrError> {
    Ok(signed_road_curvature(n0, n2, incoming)?.abs())
}

/// Signed variant: positive for a left (CCW) turn, in `(-180, 180]`.
pub fn signed_road_curvature(n0: &UtmPoint, n2: &UtmPoint, incoming: Vec2) -> Result<f64, AttrError> {
    n0.same_zone(n2)?;
    let out = n2.xy() - n0.xy();
    if out.norm_sq() == 0.0 || incoming.norm_sq() == 0.0 {
        return Err(AttrError::DegenerateSegment);
    }
    let a = incoming.cross(out).atan2(incoming.dot(out)).to_degrees();
    Ok(if a == -180.0 { 180.0 } else { a })
}

/// Where the vehicle sits on a way: the segment `a_idx`→`b_idx` (in travel
/// order, `b_idx = a_idx + dir`) and its projection onto it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Travel {
    pub way: WayId,
    pub dir: isize,
    pub a_idx: usize,
    pub b_idx: usize,
    /// Unclamped line parameter of the pose on a→b.
    pub t: f64,
    pub foot: Vec2,
    pub offset: f64,
}

impl Travel {
    pub fn new(index: &SpatialIndex, refs: &[NodeId], way: WayId, a_idx: usize, dir: isize, p: Vec2) -> Option<Travel> {
        let b_idx = a_idx.checked_add_signed(dir)?;
        let a = index.position(*refs.get(a_idx)?)?;
        let b = index.position(*refs.get(b_idx)?)?;
        if a == b {
            return None;
        }
        let (t, foot) = project_on_segment(p, a, b);
        Some(Travel { way, dir, a_idx, b_idx, t, foot, offset: (p - foot).norm() })
    }

    pub fn direction(&self, index: &SpatialIndex, refs: &[NodeId]) -> Vec2 {
        index.position(refs[self.b_idx]).unwrap() - index.position(refs[self.a_idx]).unwrap()
    }

    /// Nodes at or ahead of the foot in travel order, each with its arc
    /// length from the foot along the polyline.
    pub fn ahead<'a>(&self, index: &'a SpatialIndex, refs: &'a [NodeId]) -> impl Iterator<Item = (usize, f64)> + 'a {
        let first = if self.t <= 0.0 { self.a_idx } else { self.b_idx };
        let dir = self.dir;
        let mut prev = self.foot;
        let mut arc = 0.0;
        let mut next = Some(first);
        std::iter::from_fn(move || {
            let i = next?;
            let p = index.position(refs[i])?;
            arc += (p - prev).norm();
            prev = p;
            next = i.checked_add_signed(dir).filter(|&j| j < refs.len());
            Some((i, arc))
        })
    }
}

/// Arc length from the pose's foot on the segment at N0 along the shared
/// way to N1 (d1 + d2), rather than the straight-line distance.
pub fn distance_to_intersection(
    graph: &OsmGraph,
    index: &SpatialIndex,
    pose: &PlanarPose,
    n0: NodeId,
    n1: NodeId,
) -> Result<f64, AttrError> {
    let p = pose.xy();
    let mut best: Option<(usize, WayId, usize, usize)> = None;
    for s0 in graph.highway_memberships(n0) {
        for s1 in graph.highway_memberships(n1).filter(|s| s.way == s0.way) {
            let gap = s0.position.abs_diff(s1.position);
            if best.is_none_or(|b| gap < b.0) {
                best = Some((gap, s0.way, s0.position, s1.position));
            }
        }
    }
    let (_, way, i0, i1) = best.ok_or(AttrError::NoCommonWay(n0, n1))?;
    let refs = &graph.ways()[&way].node_refs;
    let dir: isize = if i1 >= i0 { 1 } else { -1 };

    // segment into N0 versus segment out of N0, whichever the pose is closer to
    let incoming = i0.checked_add_signed(-dir).and_then(|a| Travel::new(index, refs, way, a, dir, p));
    let outgoing = if i0 != i1 { Travel::new(index, refs, way, i0, dir, p) } else { None };
    let travel = match (incoming, outgoing) {
        (Some(a), Some(b)) => {
            if b.offset < a.offset {
                b
            } else {
                a
            }
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => {
            // isolated single-node case: N0 == N1 at a way end
            let q = index.position(n1).ok_or(AttrError::UnknownNode(n1))?;
            return Ok((p - q).norm());
        }
    };
    travel.ahead(index, refs).find(|&(i, _)| i == i1).map(|(_, arc)| arc).ok_or(AttrError::NoIntersectionAhead)
}
