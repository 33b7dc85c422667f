//! Attribute records on disk: a human-readable CSV and the 25-column
//! numeric feature file.

use std::io::Write;

use super::{AttrError, SceneAttributes};

/// The twelve attribute columns, in table order.
pub const ATTRIBUTE_FIELDS: [&str; 12] = [
    "one_way",
    "num_lanes",
    "lane_directions",
    "road_type",
    "speed_limit",
    "intersection_type",
    "at_intersection",
    "dist_to_intersection",
    "bearing_to_intersection",
    "road_curvature",
    "heading",
    "dist_to_center",
];

const DYNAMICS_FIELDS: [&str; 13] = [
    "accel_x",
    "accel_y",
    "accel_z",
    "rot_x",
    "rot_y",
    "rot_z",
    "speed",
    "dyn_heading",
    "reserved_0",
    "reserved_1",
    "reserved_2",
    "reserved_3",
    "reserved_4",
];

pub const FEATURE_COLUMNS: usize = 25;

/// Vehicle dynamics for one frame. The five reserved slots are written as
/// given (normally zero).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dynamics {
    pub accel: [f64; 3],
    pub rotation: [f64; 3],
    pub speed: f64,
    pub heading: f64,
    pub reserved: [f64; 5],
}

impl Dynamics {
    pub fn new(accel: [f64; 3], rotation: [f64; 3], speed: f64, heading: f64) -> Self {
        Self { accel, rotation, speed, heading, reserved: [0.0; 5] }
    }

    pub fn to_array(&self) -> [f64; 13] {
        let mut out = [0.0; 13];
        out[..3].copy_from_slice(&self.accel);
        out[3..6].copy_from_slice(&self.rotation);
        out[6] = self.speed;
        out[7] = self.heading;
        out[8..].copy_from_slice(&self.reserved);
        out
    }
}

/// Lane directions as one integer: base-7 digits of `code + 1`, first lane
/// most significant, 0 when no lanes are tagged.
pub fn lane_code_packed(codes: &[u8]) -> f64 {
    codes.iter().fold(0.0, |acc, &c| acc * 7.0 + (c as f64 + 1.0))
}

fn bool01(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Dynamics followed by the attributes as numbers. Unset distance or
/// bearing is written as -1.
pub fn feature_row(dynamics: &Dynamics, s: &SceneAttributes) -> [f64; FEATURE_COLUMNS] {
    let mut row = [0.0; FEATURE_COLUMNS];
    row[..13].copy_from_slice(&dynamics.to_array());
    let d = &s.direct;
    let i = &s.indirect;
    let attrs = [
        bool01(d.one_way),
        d.num_lanes as f64,
        lane_code_packed(&d.lane_directions),
        d.road_type.code() as f64,
        i.speed_limit,
        i.intersection_type.code() as f64,
        bool01(i.at_intersection),
        i.dist_to_intersection.unwrap_or(-1.0),
        i.bearing_to_intersection.unwrap_or(-1.0),
        i.road_curvature,
        i.heading,
        i.dist_to_center,
    ];
    row[13..].copy_from_slice(&attrs);
    row
}

/// Writes one comma-separated feature row per frame after a header line.
pub fn export_features<W: Write>(
    mut out: W,
    attributes: &[SceneAttributes],
    dynamics: &[Dynamics],
) -> Result<(), AttrError> {
    if attributes.len() != dynamics.len() {
        return Err(AttrError::LengthMismatch { poses: attributes.len(), dynamics: dynamics.len() });
    }
    let header: Vec<&str> = DYNAMICS_FIELDS.iter().chain(ATTRIBUTE_FIELDS.iter()).copied().collect();
    writeln!(out, "{}", header.join(","))?;
    for (s, dy) in attributes.iter().zip(dynamics) {
        let row: Vec<String> = feature_row(dy, s).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Human-readable CSV: timestamp, then the twelve attributes with enums
/// as lowercase names and lane directions joined by `|`. Unset values are
/// left empty.
pub fn write_attribute_csv<'a, W: Write>(
    mut out: W,
    records: impl IntoIterator<Item = (f64, &'a SceneAttributes)>,
) -> Result<(), AttrError> {
    writeln!(out, "timestamp,{}", ATTRIBUTE_FIELDS.join(","))?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for (t, s) in records {
        let d = &s.direct;
        let i = &s.indirect;
        let lanes: Vec<String> = d.lane_directions.iter().map(|c| c.to_string()).collect();
        writeln!(
            out,
            "{t},{},{},{},{},{},{},{},{},{},{},{},{}",
            d.one_way,
            d.num_lanes,
            lanes.join("|"),
            d.road_type,
            i.speed_limit,
            i.intersection_type,
            i.at_intersection,
            opt(i.dist_to_intersection),
            opt(i.bearing_to_intersection),
            i.road_curvature,
            i.heading,
            i.dist_to_center,
        )?;
    }
    Ok(())
}
