//! Intersection typing from the ways meeting at a node.

use std::fmt;

use super::direct::oneway_sign;
use super::{AttrError, AttributeConfig};
use crate::geodesy::{SpatialIndex, Vec2};
use crate::osm::{NodeId, OsmGraph, WayId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntersectionType {
    None,
    Crossing,
    TJunction,
    Turning,
    Merge,
    Exit,
}

impl IntersectionType {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IntersectionType::None => "none",
            IntersectionType::Crossing => "crossing",
            IntersectionType::TJunction => "t_junction",
            IntersectionType::Turning => "turning",
            IntersectionType::Merge => "merge",
            IntersectionType::Exit => "exit",
        }
    }
}

impl fmt::Display for IntersectionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Flow {
    Both,
    In,
    Out,
}

#[derive(Clone, Copy, Debug)]
struct Arm {
    way: WayId,
    neighbor: NodeId,
    flow: Flow,
}

/// Road branches leaving `node`: one per adjacent way node of every highway
/// way through it (a way ending at the node contributes one, a way passing
/// through contributes two).
fn arms(graph: &OsmGraph, node: NodeId) -> Vec<Arm> {
    let mut out = Vec::new();
    for slot in graph.highway_memberships(node) {
        let way = &graph.ways()[&slot.way];
        let sign = oneway_sign(&way.tags);
        let refs = &way.node_refs;
        let flow = |toward_next: bool| match (sign, toward_next) {
            (0, _) => Flow::Both,
            (1, true) | (-1, false) => Flow::Out,
            _ => Flow::In,
        };
        if slot.position > 0 {
            out.push(Arm { way: way.id, neighbor: refs[slot.position - 1], flow: flow(false) });
        }
        if slot.position + 1 < refs.len() {
            out.push(Arm { way: way.id, neighbor: refs[slot.position + 1], flow: flow(true) });
        }
    }
    out
}

pub fn classify_intersection(
    graph: &OsmGraph,
    index: &SpatialIndex,
    node: NodeId,
    cfg: &AttributeConfig,
) -> Result<IntersectionType, AttrError> {
    if graph.node(node).is_none() {
        return Err(AttrError::UnknownNode(node));
    }
    let arms = arms(graph, node);
    Ok(match arms.len() {
        0 | 1 => IntersectionType::None,
        2 if arms[0].way == arms[1].way => IntersectionType::None,
        2 => {
            let at = index.position(node);
            let a = index.position(arms[0].neighbor);
            let b = index.position(arms[1].neighbor);
            match (at, a, b) {
                (Some(at), Some(a), Some(b)) if bend_deg(at, a, b) > cfg.turning_bend_deg => IntersectionType::Turning,
                _ => IntersectionType::None,
            }
        }
        3 => {
            let count = |f: Flow| arms.iter().filter(|a| a.flow == f).count();
            match (count(Flow::In), count(Flow::Out)) {
                (2, 1) => IntersectionType::Merge,
                (1, 2) => IntersectionType::Exit,
                _ => IntersectionType::TJunction,
            }
        }
        _ => IntersectionType::Crossing,
    })
}

/// Deviation from going straight through `at` between the two arms.
fn bend_deg(at: Vec2, a: Vec2, b: Vec2) -> f64 {
    let (u, v) = (a - at, b - at);
    let between = u.cross(v).abs().atan2(u.dot(v)).to_degrees();
    180.0 - between
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    #[test]
    fn interior_node_is_none() {
        let (g, idx) =
            build(&[(1, 0.0, 0.0), (2, 10.0, 0.0), (3, 20.0, 0.0)], &[(10, &[1, 2, 3], &[("highway", "residential")])]);
        let cfg = AttributeConfig::default();
        assert_eq!(classify_intersection(&g, &idx, 2, &cfg).unwrap(), IntersectionType::None);
        assert_eq!(classify_intersection(&g, &idx, 3, &cfg).unwrap(), IntersectionType::None);
        assert!(matches!(classify_intersection(&g, &idx, 99, &cfg), Err(AttrError::UnknownNode(99))));
    }

    #[test]
    fn four_way_crossing() {
        // four ways ending at node 0
        let (g, idx) = build(
            &[(0, 0.0, 0.0), (1, 10.0, 0.0), (2, 0.0, 10.0), (3, -10.0, 0.0), (4, 0.0, -10.0)],
            &[
                (10, &[0, 1], &[("highway", "residential")]),
                (11, &[0, 2], &[("highway", "residential")]),
                (12, &[3, 0], &[("highway", "residential")]),
                (13, &[4, 0], &[("highway", "residential")]),
            ],
        );
        let cfg = AttributeConfig::default();
        assert_eq!(classify_intersection(&g, &idx, 0, &cfg).unwrap(), IntersectionType::Crossing);
    }

    #[test]
    fn t_junction_terminal_in_one_interior_to_other() {
        //     4
        //     |
        // 1---2---3
        let (g, idx) = build(
            &[(1, -10.0, 0.0), (2, 0.0, 0.0), (3, 10.0, 0.0), (4, 0.0, 10.0)],
            &[(10, &[1, 2, 3], &[("highway", "secondary")]), (11, &[4, 2], &[("highway", "residential")])],
        );
        let cfg = AttributeConfig::default();
        assert_eq!(classify_intersection(&g, &idx, 2, &cfg).unwrap(), IntersectionType::TJunction);
    }

    #[test]
    fn building_ways_do_not_count() {
        let (g, idx) = build(
            &[(1, -10.0, 0.0), (2, 0.0, 0.0), (3, 10.0, 0.0), (4, 0.0, 10.0)],
            &[(10, &[1, 2, 3], &[("highway", "secondary")]), (11, &[4, 2], &[("building", "yes")])],
        );
        let cfg = AttributeConfig::default();
        assert_eq!(classify_intersection(&g, &idx, 2, &cfg).unwrap(), IntersectionType::None);
    }

    #[test]
    fn turning_vs_straight_join() {
        let hw: &[(&str, &str)] = &[("highway", "residential")];
        let (g, idx) =
            build(&[(1, 0.0, 0.0), (2, 10.0, 0.0), (3, 10.0, 10.0)], &[(10, &[1, 2], hw), (11, &[2, 3], hw)]);
        let cfg = AttributeConfig::default();
        assert_eq!(classify_intersection(&g, &idx, 2, &cfg).unwrap(), IntersectionType::Turning);
        let (g, idx) = build(&[(1, 0.0, 0.0), (2, 10.0, 0.0), (3, 20.0, 1.0)], &[(10, &[1, 2], hw), (11, &[2, 3], hw)]);
        assert_eq!(classify_intersection(&g, &idx, 2, &cfg).unwrap(), IntersectionType::None);
    }

    #[test]
    fn merge_and_exit() {
        let main: &[(&str, &str)] = &[("highway", "motorway"), ("oneway", "yes")];
        let ramp: &[(&str, &str)] = &[("highway", "motorway_link"), ("oneway", "yes")];
        let nodes = [(1, 0.0, 0.0), (2, 50.0, 0.0), (3, 100.0, 0.0), (4, 0.0, -10.0), (5, 100.0, -10.0)];
        // on-ramp 4 -> 2 joins the main carriageway 1 -> 2 -> 3
        let (g, idx) = build(&nodes, &[(10, &[1, 2, 3], main), (11, &[4, 2], ramp)]);
        let cfg = AttributeConfig::default();
        assert_eq!(classify_intersection(&g, &idx, 2, &cfg).unwrap(), IntersectionType::Merge);
        // off-ramp 2 -> 5
        let (g, idx) = build(&nodes, &[(10, &[1, 2, 3], main), (11, &[2, 5], ramp)]);
        assert_eq!(classify_intersection(&g, &idx, 2, &cfg).unwrap(), IntersectionType::Exit);
    }

    #[test]
    fn closed_way_start_is_interior() {
        let hw: &[(&str, &str)] = &[("highway", "residential")];
        let (g, idx) = build(&[(1, 0.0, 0.0), (2, 10.0, 0.0), (3, 5.0, 8.0)], &[(10, &[1, 2, 3, 1], hw)]);
        let cfg = AttributeConfig::default();
        assert_eq!(classify_intersection(&g, &idx, 1, &cfg).unwrap(), IntersectionType::None);
    }
}
