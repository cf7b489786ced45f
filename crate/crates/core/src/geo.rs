// SPDX-License-Identifier: Apache-2.0

//! WGS-84 latitude/longitude (EPSG:4326) to Web Mercator (EPSG:3857)
//! conversion, great-circle distances, and mapping into a local bounding box.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Half the equatorial circumference of the Earth, in metres (π · 6378137).
pub const EARTH_HALF_CIRCUMFERENCE: f64 = 20037508.342789244;
/// Mean Earth radius used for haversine distances, in metres.
pub const EARTH_RADIUS: f64 = 6371000.0;
/// Latitude beyond which the Mercator projection is not defined here.
pub const MAX_MERCATOR_LAT: f64 = 85.05113;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeoError {
    #[error("latitude {0} outside the projectable range ±{MAX_MERCATOR_LAT}")]
    LatitudeOutOfRange(f64),
    #[error("coordinate ({lat}, {lon}) outside ±90 / ±180")]
    InvalidCoordinate { lat: f64, lon: f64 },
    #[error("bounding box must have positive extent in both directions")]
    DegenerateBBox,
}

/// Degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Self {
        LatLon { lat, lon }
    }

    pub fn check(self) -> Result<Self, GeoError> {
        if self.lat.abs() <= 90.0 && self.lon.abs() <= 180.0 {
            Ok(self)
        } else {
            Err(GeoError::InvalidCoordinate {
                lat: self.lat,
                lon: self.lon,
            })
        }
    }
}

/// Metres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MercatorXY {
    pub x: f64,
    pub y: f64,
}

pub fn to_web_mercator(p: LatLon) -> Result<MercatorXY, GeoError> {
    let p = p.check()?;
    if p.lat.abs() > MAX_MERCATOR_LAT {
        return Err(GeoError::LatitudeOutOfRange(p.lat));
    }
    let eh = EARTH_HALF_CIRCUMFERENCE;
    let x = p.lon * eh / 180.0;
    let y = ((90.0 + p.lat) * PI / 360.0).tan().ln() / (PI / 180.0) * eh / 180.0;
    Ok(MercatorXY { x, y })
}

pub fn from_web_mercator(p: MercatorXY) -> LatLon {
    let eh = EARTH_HALF_CIRCUMFERENCE;
    LatLon {
        lat: (p.y * PI / eh).exp().atan() * 360.0 / PI - 90.0,
        lon: p.x * 180.0 / eh,
    }
}

/// Great-circle distance in metres on a sphere of radius [`EARTH_RADIUS`].
pub fn haversine_distance(a: LatLon, b: LatLon) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();
    let alpha = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    let alpha = alpha.clamp(0.0, 1.0);
    EARTH_RADIUS * 2.0 * alpha.sqrt().atan2((1.0 - alpha).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub sw: LatLon,
    pub ne: LatLon,
}

/// Position of a point relative to a bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalPosition {
    /// Fraction of the box width, 0 at the west edge (Mercator-linear).
    pub u: f64,
    /// Fraction of the box height, 0 at the south edge (Mercator-linear).
    pub v: f64,
    /// Signed metres east of the south-west corner, along its parallel.
    pub east: f64,
    /// Signed metres north of the south-west corner, along its meridian.
    pub north: f64,
}

pub fn map_to_local(bbox: BBox, p: LatLon) -> Result<LocalPosition, GeoError> {
    let sw = to_web_mercator(bbox.sw)?;
    let ne = to_web_mercator(bbox.ne)?;
    let width = ne.x - sw.x;
    let height = ne.y - sw.y;
    if !(width > 0.0 && height > 0.0) {
        return Err(GeoError::DegenerateBBox);
    }
    let q = to_web_mercator(p)?;
    let east = haversine_distance(bbox.sw, LatLon::new(bbox.sw.lat, p.lon));
    let north = haversine_distance(bbox.sw, LatLon::new(p.lat, bbox.sw.lon));
    Ok(LocalPosition {
        u: (q.x - sw.x) / width,
        v: (q.y - sw.y) / height,
        east: if p.lon < bbox.sw.lon { -east } else { east },
        north: if p.lat < bbox.sw.lat { -north } else { north },
    })
}
