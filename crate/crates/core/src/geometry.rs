//! Spherical and interaural coordinate systems.
//!
//! Both systems share the same head-centred cartesian frame: `x` points to
//! the front, `y` to the left ear and `z` up. Azimuth is measured from the
//! front towards the left (positive = left), elevation from the horizontal
//! plane upwards.
//!
//! The interaural system describes a direction by its *lateral* angle (angle
//! between the direction and the median plane, `+90` at the left ear) and its
//! *polar* angle (rotation around the interaural axis inside the sagittal
//! plane: `0` front, `90` above, `180` behind, `-90`/`270` below).
//!
//! Angles are exchanged in degrees; radians are only used internally.

use rand::Rng;

use crate::error::{Error, Result};

/// Below this distance a jittered source is considered collapsed onto the
/// listener.
pub const MIN_JITTERED_DISTANCE_M: f64 = 1e-3;

const POLE_EPS: f64 = 1e-12;

/// Direction in the spherical (azimuth, elevation) system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionSpherical {
    azimuth_deg: f64,
    elevation_deg: f64,
}

impl DirectionSpherical {
    /// Builds a direction, wrapping the azimuth into `[-180, 180)`.
    /// Elevation outside `[-90, 90]` is rejected rather than folded.
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if !azimuth_deg.is_finite() || !elevation_deg.is_finite() {
            return Err(Error::invalid("direction angles must be finite"));
        }
        if !(-90.0..=90.0).contains(&elevation_deg) {
            return Err(Error::invalid(format!(
                "elevation {elevation_deg} deg outside [-90, 90]"
            )));
        }
        Ok(Self {
            azimuth_deg: wrap_azimuth(azimuth_deg),
            elevation_deg,
        })
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    /// Unit vector `(x, y, z)` of this direction.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (sin_az, cos_az) = sin_cos_deg(self.azimuth_deg);
        let (sin_el, cos_el) = sin_cos_deg(self.elevation_deg);
        [cos_el * cos_az, cos_el * sin_az, sin_el]
    }

    /// Direction of an arbitrary non-zero vector.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let [x, y, z] = v;
        let horizontal = x.hypot(y);
        if horizontal == 0.0 && z == 0.0 {
            return Err(Error::invalid("zero vector has no direction"));
        }
        let azimuth = if horizontal == 0.0 {
            0.0
        } else {
            y.atan2(x).to_degrees()
        };
        let elevation = z.atan2(horizontal).to_degrees().clamp(-90.0, 90.0);
        Self::new(azimuth, elevation)
    }
}

/// Direction in the interaural (lateral, polar) system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionInteraural {
    lateral_deg: f64,
    polar_deg: f64,
}

impl DirectionInteraural {
    /// Builds a direction, wrapping the polar angle into `[-90, 270)`.
    pub fn new(lateral_deg: f64, polar_deg: f64) -> Result<Self> {
        if !lateral_deg.is_finite() || !polar_deg.is_finite() {
            return Err(Error::invalid("direction angles must be finite"));
        }
        if !(-90.0..=90.0).contains(&lateral_deg) {
            return Err(Error::invalid(format!(
                "lateral angle {lateral_deg} deg outside [-90, 90]"
            )));
        }
        Ok(Self {
            lateral_deg,
            polar_deg: wrap_polar(polar_deg),
        })
    }

    pub fn lateral_deg(&self) -> f64 {
        self.lateral_deg
    }

    pub fn polar_deg(&self) -> f64 {
        self.polar_deg
    }
}

/// A point source relative to the centre of the listener's head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourcePosition {
    direction: DirectionSpherical,
    distance_m: f64,
}

impl SourcePosition {
    pub fn new(direction: DirectionSpherical, distance_m: f64) -> Result<Self> {
        if !(distance_m.is_finite() && distance_m > 0.0) {
            return Err(Error::invalid(format!(
                "source distance must be positive, got {distance_m}"
            )));
        }
        Ok(Self {
            direction,
            distance_m,
        })
    }

    /// Convenience constructor from raw angles in degrees.
    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64, distance_m: f64) -> Result<Self> {
        Self::new(
            DirectionSpherical::new(azimuth_deg, elevation_deg)?,
            distance_m,
        )
    }

    pub fn direction(&self) -> DirectionSpherical {
        self.direction
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }

    pub fn to_cartesian(&self) -> [f64; 3] {
        self.direction.unit_vector().map(|c| c * self.distance_m)
    }

    pub fn from_cartesian(p: [f64; 3]) -> Result<Self> {
        let distance = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        Self::new(DirectionSpherical::from_vector(p)?, distance)
    }
}

/// Maps a spherical direction to interaural coordinates.
///
/// At the interaural poles (`lateral = ±90`) the polar angle is undefined and
/// is reported as `0`.
///
/// ```
/// use bincue::geometry::{spherical_to_interaural, DirectionSpherical};
///
/// let p = DirectionSpherical::new(90.0, 45.0).unwrap();
/// let i = spherical_to_interaural(p);
/// assert_eq!((i.lateral_deg(), i.polar_deg()), (45.0, 90.0));
/// ```
pub fn spherical_to_interaural(d: DirectionSpherical) -> DirectionInteraural {
    let [x, y, z] = d.unit_vector();
    let sagittal = x.hypot(z);
    let lateral = y.atan2(sagittal).to_degrees().clamp(-90.0, 90.0);
    let polar = if sagittal < POLE_EPS {
        0.0
    } else {
        z.atan2(x).to_degrees()
    };
    DirectionInteraural {
        lateral_deg: lateral,
        polar_deg: wrap_polar(polar),
    }
}

/// Inverse of [`spherical_to_interaural`] away from the interaural poles.
pub fn interaural_to_spherical(d: DirectionInteraural) -> DirectionSpherical {
    let (sin_lat, cos_lat) = sin_cos_deg(d.lateral_deg);
    let (sin_pol, cos_pol) = sin_cos_deg(d.polar_deg);
    let (x, y, z) = (cos_lat * cos_pol, sin_lat, cos_lat * sin_pol);
    let horizontal = x.hypot(y);
    let azimuth = if horizontal < POLE_EPS {
        0.0
    } else {
        y.atan2(x).to_degrees()
    };
    DirectionSpherical {
        azimuth_deg: wrap_azimuth(azimuth),
        elevation_deg: z.atan2(horizontal).to_degrees().clamp(-90.0, 90.0),
    }
}

/// Signed minimal difference `a - b` on the circle, in `(-180, 180]`.
pub fn wrap_polar_difference(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Adds an independent uniform offset in `[-max_offset_m, max_offset_m]` to
/// each cartesian coordinate of `p`.
pub fn jitter_position<R: Rng + ?Sized>(
    p: SourcePosition,
    max_offset_m: f64,
    rng: &mut R,
) -> Result<SourcePosition> {
    if !(max_offset_m.is_finite() && max_offset_m >= 0.0) {
        return Err(Error::invalid(format!(
            "jitter offset must be non-negative, got {max_offset_m}"
        )));
    }
    if max_offset_m == 0.0 {
        return Ok(p);
    }
    let mut c = p.to_cartesian();
    for coord in &mut c {
        *coord += rng.random_range(-max_offset_m..=max_offset_m);
    }
    let distance = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    if distance < MIN_JITTERED_DISTANCE_M {
        return Err(Error::DegeneratePosition {
            distance_m: distance,
        });
    }
    SourcePosition::from_cartesian(c)
}

/// Wraps an azimuth into `[-180, 180)`.
pub fn wrap_azimuth(deg: f64) -> f64 {
    if (-180.0..180.0).contains(&deg) {
        return deg;
    }
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Wraps a polar angle into `[-90, 270)`.
pub fn wrap_polar(deg: f64) -> f64 {
    if (-90.0..270.0).contains(&deg) {
        return deg;
    }
    let w = (deg + 90.0).rem_euclid(360.0) - 90.0;
    if w >= 270.0 {
        w - 360.0
    } else {
        w
    }
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 45.
pub(crate) fn sin_cos_deg(deg: f64) -> (f64, f64) {
    use std::f64::consts::FRAC_1_SQRT_2 as H;
    let r = deg.rem_euclid(360.0);
    if r % 45.0 == 0.0 {
        match (r / 45.0) as u8 {
            0 => (0.0, 1.0),
            1 => (H, H),
            2 => (1.0, 0.0),
            3 => (H, -H),
            4 => (0.0, -1.0),
            5 => (-H, -H),
            6 => (-1.0, 0.0),
            _ => (-H, H),
        }
    } else {
        deg.to_radians().sin_cos()
    }
}
