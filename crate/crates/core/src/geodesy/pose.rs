use super::{normalize_deg, to_utm, to_utm_in_zone, GeoError, Hemisphere, UtmPoint, Vec2};

/// Converts a GPS heading (north-based, clockwise) to east-based CCW.
pub fn north_cw_to_east_ccw(deg: f64) -> f64 {
    normalize_deg(90.0 - deg)
}

/// Planar pose in UTM with an east-based CCW heading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarPose {
    pub position: UtmPoint,
    pub heading_deg: f64,
}

impl PlanarPose {
    pub fn new(position: UtmPoint, heading_deg: f64) -> Self {
        Self { position, heading_deg: normalize_deg(heading_deg) }
    }

    pub fn xy(&self) -> Vec2 {
        self.position.xy()
    }

    pub fn heading_vec(&self) -> Vec2 {
        Vec2::from_angle_deg(self.heading_deg)
    }

    /// Shifts the position by a world-frame offset and rotates the heading.
    pub fn perturbed(&self, dx: f64, dy: f64, dtheta_deg: f64) -> PlanarPose {
        PlanarPose::new(self.position.offset(Vec2::new(dx, dy)), self.heading_deg + dtheta_deg)
    }

    /// World (UTM) point expressed in the vehicle frame: x forward, y left.
    pub fn to_vehicle(&self, world: Vec2) -> Vec2 {
        (world - self.xy()).rotate_deg(-self.heading_deg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehiclePose {
    pub timestamp: f64,
    pub lat: f64,
    pub lon: f64,
    pub utm: UtmPoint,
    /// East-based CCW, `[0, 360)`.
    pub heading_deg: f64,
}

impl VehiclePose {
    /// From a GPS fix whose heading is north-based clockwise.
    pub fn from_gps(timestamp: f64, lat: f64, lon: f64, heading_north_cw: f64) -> Result<Self, GeoError> {
        Self::new(timestamp, lat, lon, north_cw_to_east_ccw(heading_north_cw))
    }

    /// From a fix whose heading is already east-based CCW.
    pub fn new(timestamp: f64, lat: f64, lon: f64, heading_east_ccw: f64) -> Result<Self, GeoError> {
        Ok(Self { timestamp, lat, lon, utm: to_utm(lat, lon)?, heading_deg: normalize_deg(heading_east_ccw) })
    }

    /// Re-projects into a fixed zone (for sessions indexed in that zone).
    pub fn in_zone(&self, zone: u8, hemisphere: Hemisphere) -> Result<Self, GeoError> {
        Ok(Self { utm: to_utm_in_zone(self.lat, self.lon, zone, hemisphere)?, ..*self })
    }

    pub fn planar(&self) -> PlanarPose {
        PlanarPose::new(self.utm, self.heading_deg)
    }
}

/// Parses `timestamp lat lon heading_deg` lines; heading on disk is GPS
/// convention (north-based clockwise). Blank lines and `#` comments are skipped.
pub fn parse_pose_file(text: &str) -> Result<Vec<VehiclePose>, GeoError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| GeoError::PoseFormat { line: i + 1, msg: format!("{e}") })?;
        let [t, lat, lon, heading] = fields[..] else {
            return Err(GeoError::PoseFormat {
                line: i + 1,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        };
        out.push(VehiclePose::from_gps(t, lat, lon, heading)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heading_conversion() {
        assert_eq!(north_cw_to_east_ccw(0.0), 90.0);
        assert_eq!(north_cw_to_east_ccw(90.0), 0.0);
        assert_eq!(north_cw_to_east_ccw(180.0), 270.0);
        assert_eq!(north_cw_to_east_ccw(270.0), 180.0);
    }

    #[test]
    fn pose_file() {
        let poses = parse_pose_file("# t lat lon hdg\n0.0 49.011 8.417 90\n\n0.1 49.0111 8.4171 0\n").unwrap();
        assert_eq!(poses.len(), 2);
        assert_eq!(poses[0].heading_deg, 0.0);
        assert_eq!(poses[1].heading_deg, 90.0);
        assert_eq!(poses[0].utm.zone, 32);
        assert!(parse_pose_file("1 2 3").is_err());
        assert!(parse_pose_file("1 2 x 4").is_err());
        assert!(parse_pose_file("").unwrap().is_empty());
    }

    #[test]
    fn vehicle_frame() {
        let pose = PlanarPose::new(UtmPoint::new(100.0, 200.0, 32, Hemisphere::North), 90.0);
        // heading north: a point 5 m north is straight ahead, 2 m west is left
        let v = pose.to_vehicle(Vec2::new(98.0, 205.0));
        assert!((v.x - 5.0).abs() < 1e-12 && (v.y - 2.0).abs() < 1e-12);
    }
}
