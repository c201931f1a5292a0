//! RSSI aggregation, strongest-anchor selection and linearized least-squares
//! trilateration.
//!
//! Subtracting the first anchor's circle equation from the others gives the
//! linear system `A p = B` with rows
//!
//! ```text
//! A_i = [2(x_i - x_1), 2(y_i - y_1)]
//! B_i = d_1^2 - d_i^2 + (x_i^2 + y_i^2 - x_1^2 - y_1^2)
//! ```
//!
//! which is solved through the normal equations `p = (A^T A)^-1 A^T B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AnchorNode, Dbm, Point2D};

/// Readings from one anchor over one aggregation window.
#[derive(Debug, Clone, PartialEq)]
pub struct RssiObservation {
    pub anchor: AnchorNode,
    pub samples: Vec<Dbm>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeObservation {
    pub anchor: AnchorNode,
    pub range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrilaterationProblem {
    pub anchors: Vec<AnchorNode>,
    pub ranges: Vec<f64>,
}

impl TrilaterationProblem {
    pub fn new(anchors: Vec<AnchorNode>, ranges: Vec<f64>) -> Self {
        Self { anchors, ranges }
    }

    pub fn from_observations(obs: &[RangeObservation]) -> Self {
        Self {
            anchors: obs.iter().map(|o| o.anchor).collect(),
            ranges: obs.iter().map(|o| o.range).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionEstimate {
    pub position: Point2D,
}

/// Mean of the samples in dBm.
pub fn aggregate_rssi(obs: &RssiObservation) -> Result<Dbm> {
    mean_dbm(&obs.samples)
}

pub fn mean_dbm(samples: &[Dbm]) -> Result<Dbm> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(Dbm(
        samples.iter().map(|s| s.0).sum::<f64>() / samples.len() as f64
    ))
}

/// The `k` strongest observations, strongest first. Equal readings are
/// ordered by ascending node id.
pub fn select_anchors(
    observations: &[(AnchorNode, Dbm)],
    k: usize,
) -> Result<Vec<(AnchorNode, Dbm)>> {
    if observations.len() < k {
        return Err(Error::InsufficientAnchors {
            needed: k,
            got: observations.len(),
        });
    }
    let mut sorted = observations.to_vec();
    sorted.sort_by(|(a, ra), (b, rb)| rb.0.total_cmp(&ra.0).then(a.id.cmp(&b.id)));
    sorted.truncate(k);
    Ok(sorted)
}

/// Position from three (or more) anchors and ranges.
pub fn trilaterate(problem: &TrilaterationProblem) -> Result<PositionEstimate> {
    least_squares_multilaterate(&problem.anchors, &problem.ranges)
}

/// Least-squares position from `k >= 3` anchors. The first anchor is the
/// reference row.
pub fn least_squares_multilaterate(
    anchors: &[AnchorNode],
    ranges: &[f64],
) -> Result<PositionEstimate> {
    if anchors.len() != ranges.len() {
        return Err(Error::MismatchedLengths {
            anchors: anchors.len(),
            ranges: ranges.len(),
        });
    }
    if anchors.len() < 3 {
        return Err(Error::InsufficientAnchors {
            needed: 3,
            got: anchors.len(),
        });
    }
    if let Some(&r) = ranges.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::NonPositiveDistance(r));
    }

    let p1 = anchors[0].position;
    let d1 = ranges[0];
    let k1 = p1.x * p1.x + p1.y * p1.y;

    // accumulate A^T A and A^T B directly
    let (mut s_xx, mut s_xy, mut s_yy) = (0.0, 0.0, 0.0);
    let (mut t_x, mut t_y) = (0.0, 0.0);
    for (anchor, &d) in anchors.iter().zip(ranges).skip(1) {
        let p = anchor.position;
        let ax = 2.0 * (p.x - p1.x);
        let ay = 2.0 * (p.y - p1.y);
        let b = d1 * d1 - d * d + (p.x * p.x + p.y * p.y - k1);
        s_xx += ax * ax;
        s_xy += ax * ay;
        s_yy += ay * ay;
        t_x += ax * b;
        t_y += ay * b;
    }

    // det / (s_xx s_yy) is the squared sine of the angle between A's columns
    let det = s_xx * s_yy - s_xy * s_xy;
    if !(det > 1e-12 * s_xx * s_yy) {
        return Err(Error::DegenerateGeometry);
    }
    let x = (s_yy * t_x - s_xy * t_y) / det;
    let y = (s_xx * t_y - s_xy * t_x) / det;
    Ok(PositionEstimate {
        position: Point2D::new(x, y),
    })
}
