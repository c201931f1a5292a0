//! Planar positions, power levels and node identities.
//!
//! Distances are meters, powers are dBm. Conversions to other units happen
//! at I/O boundaries only.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance_to(&self, other: &Point2D) -> f64 {
        euclidean_distance(*self, *other)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Point2D {
        Point2D::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Euclidean distance between two points.
pub fn euclidean_distance(a: Point2D, b: Point2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Power level in decibel-milliwatts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dbm(pub f64);

impl Dbm {
    pub const fn new(value: f64) -> Self {
        Dbm(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_milliwatts(self) -> f64 {
        dbm_to_milliwatts(self)
    }

    /// Fails when `mw` is not strictly positive.
    pub fn from_milliwatts(mw: f64) -> Result<Self> {
        milliwatts_to_dbm(mw)
    }
}

impl fmt::Display for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dBm", self.0)
    }
}

pub fn dbm_to_milliwatts(p: Dbm) -> f64 {
    10f64.powf(p.0 / 10.0)
}

pub fn milliwatts_to_dbm(mw: f64) -> Result<Dbm> {
    if mw > 0.0 && mw.is_finite() {
        Ok(Dbm(10.0 * mw.log10()))
    } else {
        Err(Error::NonPositivePower(mw))
    }
}

/// Node identifier, unique within a scenario.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A fixed beacon of known position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorNode {
    pub id: NodeId,
    pub position: Point2D,
}

impl AnchorNode {
    pub const fn new(id: u32, x: f64, y: f64) -> Self {
        Self {
            id: NodeId(id),
            position: Point2D::new(x, y),
        }
    }
}
