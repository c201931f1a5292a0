//! Square-lattice beacon placement and a brute-force three-coverage check.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{AnchorNode, Point2D};

pub const MAX_BEACONS: u64 = 1_000_000;

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2D,
    pub max: Point2D,
}

impl Rect {
    /// Fails unless both sides are positive and finite.
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        let r = Self {
            min: Point2D::new(min_x, min_y),
            max: Point2D::new(max_x, max_y),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn from_size(width: f64, height: f64) -> Result<Self> {
        Self::new(0.0, 0.0, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(invalid("roi", "corners must be finite"));
        }
        if !(self.width() > 0.0 && self.height() > 0.0) {
            return Err(invalid("roi", "must have positive width and height"));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point2D) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y)
    }

    /// Smallest rectangle holding every point. `None` for fewer than two
    /// distinct coordinates on either axis.
    pub fn bounding(points: impl IntoIterator<Item = Point2D>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let (lo, hi) = it.fold((first, first), |(lo, hi), p| {
            (
                Point2D::new(lo.x.min(p.x), lo.y.min(p.y)),
                Point2D::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        });
        Self::new(lo.x, lo.y, hi.x, hi.y).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub beacons: Vec<AnchorNode>,
    /// Lattice spacing along x and y after snapping to the ROI.
    pub spacing_x: f64,
    pub spacing_y: f64,
}

impl DeploymentPlan {
    pub fn positions(&self) -> impl Iterator<Item = Point2D> + '_ {
        self.beacons.iter().map(|b| b.position)
    }
}

/// Lattice points per axis so that consecutive points are at most `spacing`
/// apart, boundaries included.
fn points_per_axis(len: f64, spacing: f64) -> u64 {
    ((len / spacing).ceil() as u64).max(1) + 1
}

/// Places beacons on a square lattice over `roi` with spacing at most
/// `safety * radio_range / sqrt(2)`. Each cell diagonal is then shorter than
/// `radio_range`, so every point sees all four corners of its cell.
pub fn plan_square_grid_deployment(
    roi: &Rect,
    radio_range: f64,
    safety: f64,
) -> Result<DeploymentPlan> {
    roi.validate()?;
    if !(radio_range > 0.0 && radio_range.is_finite()) {
        return Err(invalid("radio_range", "must be positive"));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(invalid("safety", "must lie in (0, 1]"));
    }
    let spacing = safety * radio_range / std::f64::consts::SQRT_2;
    let nx = points_per_axis(roi.width(), spacing);
    let ny = points_per_axis(roi.height(), spacing);
    let required = nx.saturating_mul(ny);
    if required > MAX_BEACONS {
        return Err(Error::Capacity {
            required,
            limit: MAX_BEACONS,
        });
    }
    let sx = roi.width() / (nx - 1) as f64;
    let sy = roi.height() / (ny - 1) as f64;
    let mut beacons = Vec::with_capacity(required as usize);
    for j in 0..ny {
        // pin the last row/column to the boundary exactly
        let y = if j == ny - 1 {
            roi.max.y
        } else {
            roi.min.y + j as f64 * sy
        };
        for i in 0..nx {
            let x = if i == nx - 1 {
                roi.max.x
            } else {
                roi.min.x + i as f64 * sx
            };
            beacons.push(AnchorNode::new((j * nx + i + 1) as u32, x, y));
        }
    }
    Ok(DeploymentPlan {
        beacons,
        spacing_x: sx,
        spacing_y: sy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub covered: bool,
    pub samples: usize,
    pub uncovered: Vec<Point2D>,
}

fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
    if v.last().is_some_and(|&last| hi - last > 1e-9 * step) {
        v.push(hi);
    }
    v
}

/// Samples `roi` every `grid_step` meters (boundary included) and counts the
/// beacons within `radio_range` of each sample, inclusive.
pub fn verify_three_coverage(
    beacons: &[Point2D],
    roi: &Rect,
    radio_range: f64,
    grid_step: f64,
) -> Result<CoverageReport> {
    roi.validate()?;
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(invalid("grid_step", "must be positive"));
    }
    let mut sorted = beacons.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
    let xs = lattice(roi.min.x, roi.max.x, grid_step);
    let ys = lattice(roi.min.y, roi.max.y, grid_step);

    let mut uncovered = Vec::new();
    for &x in &xs {
        let start = sorted.partition_point(|b| b.x < x - radio_range);
        let end = sorted.partition_point(|b| b.x <= x + radio_range);
        let band = &sorted[start..end];
        for &y in &ys {
            let p = Point2D::new(x, y);
            let seen = band
                .iter()
                .filter(|b| b.distance_to(&p) <= radio_range)
                .take(3)
                .count();
            if seen < 3 {
                uncovered.push(p);
            }
        }
    }
    Ok(CoverageReport {
        covered: uncovered.is_empty(),
        samples: xs.len() * ys.len(),
        uncovered,
    })
}
