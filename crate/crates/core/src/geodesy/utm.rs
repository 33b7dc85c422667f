//! Transverse Mercator on the WGS84 ellipsoid using Krüger's series to
//! sixth order in the third flattening (sub-millimetre inside a zone).

use super::{GeoError, Vec2};

const A: f64 = 6_378_137.0;
const F: f64 = 1.0 / 298.257_223_563;
const K0: f64 = 0.9996;
const FALSE_EASTING: f64 = 500_000.0;
const FALSE_NORTHING_SOUTH: f64 = 10_000_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hemisphere {
    North,
    South,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UtmPoint {
    /// Easting, meters.
    pub x: f64,
    /// Northing, meters.
    pub y: f64,
    pub zone: u8,
    pub hemisphere: Hemisphere,
}

impl UtmPoint {
    pub fn new(x: f64, y: f64, zone: u8, hemisphere: Hemisphere) -> Self {
        Self { x, y, zone, hemisphere }
    }

    pub fn xy(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn zone_key(&self) -> (u8, Hemisphere) {
        (self.zone, self.hemisphere)
    }

    pub fn same_zone(&self, other: &UtmPoint) -> Result<(), GeoError> {
        if self.zone_key() != other.zone_key() {
            return Err(GeoError::ZoneMismatch(self.zone_key(), other.zone_key()));
        }
        Ok(())
    }

    pub fn offset(&self, d: Vec2) -> UtmPoint {
        UtmPoint { x: self.x + d.x, y: self.y + d.y, ..*self }
    }
}

/// Standard 6° zone number (no Norway/Svalbard exceptions).
pub fn utm_zone(lon: f64) -> u8 {
    let z = ((lon + 180.0) / 6.0).floor() as i32 + 1;
    z.clamp(1, 60) as u8
}

fn check(lat: f64, lon: f64) -> Result<(), GeoError> {
    if !lat.is_finite() || !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
        return Err(GeoError::InvalidCoordinate { lat, lon });
    }
    if lat.abs() > 84.0 {
        return Err(GeoError::OutOfBand(lat));
    }
    Ok(())
}

pub fn to_utm(lat: f64, lon: f64) -> Result<UtmPoint, GeoError> {
    check(lat, lon)?;
    let hemisphere = if lat < 0.0 { Hemisphere::South } else { Hemisphere::North };
    to_utm_in_zone(lat, lon, utm_zone(lon), hemisphere)
}

/// Projects into an explicit zone; used to keep a whole session in one zone.
pub fn to_utm_in_zone(lat: f64, lon: f64, zone: u8, hemisphere: Hemisphere) -> Result<UtmPoint, GeoError> {
    check(lat, lon)?;
    let n = F / (2.0 - F);
    let n2 = n * n;
    let n3 = n2 * n;
    let n4 = n3 * n;
    let n5 = n4 * n;
    let n6 = n5 * n;
    let big_a = A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
    let alpha = [
        n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 - 127.0 * n5 / 288.0 + 7891.0 * n6 / 37800.0,
        13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 + 281.0 * n5 / 630.0 - 1_983_433.0 * n6 / 1_935_360.0,
        61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0 + 167_603.0 * n6 / 181_440.0,
        49561.0 * n4 / 161_280.0 - 179.0 * n5 / 168.0 + 6_601_661.0 * n6 / 7_257_600.0,
        34729.0 * n5 / 80640.0 - 3_418_889.0 * n6 / 1_995_840.0,
        212_378_941.0 * n6 / 319_334_400.0,
    ];
    let e = 2.0 * n.sqrt() / (1.0 + n);

    let phi = lat.to_radians();
    let lon0 = (zone as f64 - 1.0) * 6.0 - 180.0 + 3.0;
    let lambda = (lon - lon0).to_radians();

    let sin_phi = phi.sin();
    let t = (sin_phi.atanh() - e * (e * sin_phi).atanh()).sinh();
    let xi = t.atan2(lambda.cos());
    let eta = (lambda.sin() / (1.0 + t * t).sqrt()).atanh();

    let mut east = eta;
    let mut north = xi;
    for (j, a) in alpha.iter().enumerate() {
        let k = 2.0 * (j as f64 + 1.0);
        east += a * (k * xi).cos() * (k * eta).sinh();
        north += a * (k * xi).sin() * (k * eta).cosh();
    }
    let x = FALSE_EASTING + K0 * big_a * east;
    let mut y = K0 * big_a * north;
    if hemisphere == Hemisphere::South {
        y += FALSE_NORTHING_SOUTH;
    }
    Ok(UtmPoint { x, y, zone, hemisphere })
}
