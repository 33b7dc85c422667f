//! Tag-read ("direct") attributes of a way.

use std::fmt;

use super::{AttrError, AttributeConfig};
use crate::osm::{OsmGraph, Tags, WayId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RoadType {
    Residential,
    Tertiary,
    Secondary,
    Service,
    Unclassified,
    Other,
}

impl RoadType {
    pub fn from_highway(value: &str) -> Self {
        match value {
            "residential" => RoadType::Residential,
            "tertiary" | "tertiary_link" => RoadType::Tertiary,
            "secondary" | "secondary_link" => RoadType::Secondary,
            "service" => RoadType::Service,
            "unclassified" => RoadType::Unclassified,
            _ => RoadType::Other,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RoadType::Residential => "residential",
            RoadType::Tertiary => "tertiary",
            RoadType::Secondary => "secondary",
            RoadType::Service => "service",
            RoadType::Unclassified => "unclassified",
            RoadType::Other => "other",
        }
    }
}

impl fmt::Display for RoadType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Seven-value lane direction code.
///
/// 0 left only, 1 left+through, 2 through only, 3 through+right,
/// 4 right only, 5 left+right, 6 all directions.
pub fn lane_direction_code(lane: &str) -> u8 {
    let (mut left, mut through, mut right) = (false, false, false);
    for part in lane.split(';').map(str::trim) {
        match part {
            "left" | "slight_left" | "sharp_left" | "reverse" => left = true,
            "right" | "slight_right" | "sharp_right" => right = true,
            "through" | "merge_to_left" | "merge_to_right" => through = true,
            _ => {}
        }
    }
    match (left, through, right) {
        (true, false, false) => 0,
        (true, true, false) => 1,
        (false, _, false) => 2,
        (false, true, true) => 3,
        (false, false, true) => 4,
        (true, false, true) => 5,
        (true, true, true) => 6,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectAttributes {
    pub one_way: bool,
    pub num_lanes: u32,
    /// Per-lane direction codes; empty unless `turn:lanes` is tagged.
    pub lane_directions: Vec<u8>,
    pub road_type: RoadType,
}

pub(crate) fn is_oneway(tags: &Tags) -> bool {
    oneway_sign(tags) != 0
}

/// +1 oneway along node order, -1 against it, 0 two-way.
pub(crate) fn oneway_sign(tags: &Tags) -> i8 {
    match tags.get("oneway").map(String::as_str) {
        Some("yes" | "true" | "1") => 1,
        Some("-1" | "reverse") => -1,
        Some(_) => 0,
        None if tags.get("junction").map(String::as_str) == Some("roundabout") => 1,
        None => 0,
    }
}

pub fn parse_direct(graph: &OsmGraph, way: WayId, cfg: &AttributeConfig) -> Result<DirectAttributes, AttrError> {
    let way = graph.way(way).ok_or(AttrError::UnknownWay(way))?;
    Ok(direct_from_tags(&way.tags, cfg))
}

pub fn direct_from_tags(tags: &Tags, cfg: &AttributeConfig) -> DirectAttributes {
    let one_way = is_oneway(tags);
    let lane_directions: Vec<u8> =
        tags.get("turn:lanes").map(|v| v.split('|').map(lane_direction_code).collect()).unwrap_or_default();
    let tagged_lanes = tags.get("lanes").and_then(|v| v.trim().parse::<u32>().ok()).filter(|&n| n >= 1);
    let num_lanes = if !lane_directions.is_empty() {
        lane_directions.len() as u32
    } else if let Some(n) = tagged_lanes {
        n
    } else if one_way {
        cfg.lanes_one_way
    } else {
        cfg.lanes_two_way
    };
    let road_type = tags.get("highway").map_or(RoadType::Other, |h| RoadType::from_highway(h));
    DirectAttributes { one_way, num_lanes, lane_directions, road_type }
}

/// `maxspeed` in km/h, or the road-type default when absent or unparseable.
pub fn speed_limit(tags: &Tags, road_type: RoadType, cfg: &AttributeConfig) -> f64 {
    tags.get("maxspeed").and_then(|v| parse_maxspeed(v)).unwrap_or_else(|| cfg.speed_defaults.for_road(road_type))
}

fn parse_maxspeed(v: &str) -> Option<f64> {
    let v = v.trim();
    if let Some(mph) = v.strip_suffix("mph") {
        return mph.trim().parse::<f64>().ok().map(|s| s * 1.609_344);
    }
    let v = v.strip_suffix("km/h").unwrap_or(v).trim();
    v.parse::<f64>().ok().filter(|s| *s > 0.0)
}
