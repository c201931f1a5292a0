//! Kalman tracking of a planar position from range measurements.
//!
//! The state is the position `P` with error covariance `E`. Prediction is
//! `P' = S P + u`, `E' = S E S^T + Q`. Correction linearizes the range map
//! `h(P) = (|P - a_i|)_i` at the predicted position:
//!
//! ```text
//! K  = E' H^T (H E' H^T + R)^-1
//! P  = P' + K (z - h(P'))
//! E  = (I - K H) E'
//! ```
//!
//! where `z` holds the ranges inferred from measured RSSI.

use nalgebra::{Matrix2, Matrix3, Matrix3x2, SMatrix, Vector2, Vector3};

use crate::error::{invalid, Error, Result};
use crate::geometry::{AnchorNode, Point2D};

const SINGULAR_RADIUS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanConfig {
    pub state_transition: Matrix2<f64>,
    pub control: Vector2<f64>,
    pub process_noise: Matrix2<f64>,
    pub measurement_noise: Matrix3<f64>,
}

impl Default for KalmanConfig {
    fn default() -> Self {
        Self::with_noise(0.01, 1.0)
    }
}

impl KalmanConfig {
    /// Identity transition, no control input, `Q = q I` and `R = sigma_r^2 I`.
    pub fn with_noise(q: f64, sigma_r: f64) -> Self {
        Self {
            state_transition: Matrix2::identity(),
            control: Vector2::zeros(),
            process_noise: Matrix2::identity() * q,
            measurement_noise: Matrix3::identity() * (sigma_r * sigma_r),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_symmetric(&self.process_noise) || min_eigenvalue2(&self.process_noise) < -1e-12 {
            return Err(invalid(
                "process_noise",
                "must be symmetric positive semidefinite",
            ));
        }
        let r = &self.measurement_noise;
        if (r - r.transpose()).abs().max() > 1e-12 || r.cholesky().is_none() {
            return Err(invalid(
                "measurement_noise",
                "must be symmetric positive definite",
            ));
        }
        if self
            .state_transition
            .iter()
            .chain(self.control.iter())
            .any(|v| !v.is_finite())
        {
            return Err(invalid("state_transition", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub position: Vector2<f64>,
    pub covariance: Matrix2<f64>,
}

impl KalmanState {
    /// State at `p` with zero initial covariance.
    pub fn at(p: Point2D) -> Self {
        Self {
            position: Vector2::new(p.x, p.y),
            covariance: Matrix2::zeros(),
        }
    }

    pub fn point(&self) -> Point2D {
        Point2D::new(self.position.x, self.position.y)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        is_symmetric(&self.covariance) && min_eigenvalue2(&self.covariance) >= -tol
    }
}

/// Three ranges, one per anchor, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeMeasurement {
    pub anchors: [AnchorNode; 3],
    pub ranges: [f64; 3],
}

impl RangeMeasurement {
    pub fn new(anchors: [AnchorNode; 3], ranges: [f64; 3]) -> Result<Self> {
        if let Some(&r) = ranges.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::NonPositiveDistance(r));
        }
        Ok(Self { anchors, ranges })
    }

    /// Exact ranges from `p` to each anchor.
    pub fn from_truth(anchors: [AnchorNode; 3], p: Point2D) -> Result<Self> {
        Self::new(anchors, anchors.map(|a| a.position.distance_to(&p)))
    }

    fn z(&self) -> Vector3<f64> {
        Vector3::from(self.ranges)
    }
}

fn is_symmetric(m: &Matrix2<f64>) -> bool {
    m[(0, 1)] == m[(1, 0)]
}

fn min_eigenvalue2(m: &Matrix2<f64>) -> f64 {
    let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    mean - half_gap
}

pub fn predict(state: &KalmanState, cfg: &KalmanConfig) -> KalmanState {
    let s = &cfg.state_transition;
    KalmanState {
        position: s * state.position + cfg.control,
        covariance: s * state.covariance * s.transpose() + cfg.process_noise,
    }
}

/// Jacobian of the range map at `predicted`; row `i` is the unit vector from
/// anchor `i` towards the position.
pub fn observation_jacobian(
    predicted: &Vector2<f64>,
    anchors: &[AnchorNode; 3],
) -> Result<Matrix3x2<f64>> {
    linearize(predicted, anchors).map(|(h, _)| h)
}

/// Jacobian and predicted ranges in one pass.
fn linearize(
    p: &Vector2<f64>,
    anchors: &[AnchorNode; 3],
) -> Result<(Matrix3x2<f64>, Vector3<f64>)> {
    let mut h = Matrix3x2::zeros();
    let mut expected = Vector3::zeros();
    for (i, a) in anchors.iter().enumerate() {
        let dx = p.x - a.position.x;
        let dy = p.y - a.position.y;
        let r = dx.hypot(dy);
        if r < SINGULAR_RADIUS {
            return Err(Error::SingularGeometry(a.id.0));
        }
        h[(i, 0)] = dx / r;
        h[(i, 1)] = dy / r;
        expected[i] = r;
    }
    Ok((h, expected))
}

/// Kalman gain `E H^T (H E H^T + R)^-1` for any number of measurement rows.
pub fn gain<const M: usize>(
    covariance: &Matrix2<f64>,
    h: &SMatrix<f64, M, 2>,
    r: &SMatrix<f64, M, M>,
) -> Result<SMatrix<f64, 2, M>> {
    let innovation_cov = h * covariance * h.transpose() + r;
    let inv = innovation_cov.try_inverse().ok_or(Error::SingularMatrix)?;
    Ok(covariance * h.transpose() * inv)
}

pub fn update(
    predicted: &KalmanState,
    meas: &RangeMeasurement,
    cfg: &KalmanConfig,
) -> Result<KalmanState> {
    let (h, expected) = linearize(&predicted.position, &meas.anchors)?;
    let k = gain(&predicted.covariance, &h, &cfg.measurement_noise)?;
    let innovation = meas.z() - expected;
    let covariance = (Matrix2::identity() - k * h) * predicted.covariance;
    Ok(KalmanState {
        position: predicted.position + k * innovation,
        covariance: (covariance + covariance.transpose()) * 0.5,
    })
}

/// Predict followed by update.
pub fn filter_step(
    state: &KalmanState,
    meas: &RangeMeasurement,
    cfg: &KalmanConfig,
) -> Result<KalmanState> {
    update(&predict(state, cfg), meas, cfg)
}

/// Stateful convenience wrapper around [`filter_step`].
#[derive(Debug, Clone)]
pub struct Tracker {
    config: KalmanConfig,
    state: Option<KalmanState>,
}

impl Tracker {
    pub fn new(config: KalmanConfig) -> Self {
        Self {
            config,
            state: None,
        }
    }

    pub fn state(&self) -> Option<&KalmanState> {
        self.state.as_ref()
    }

    /// The first call seeds the state at `fix` with zero covariance; every
    /// call then runs one filter step with `meas`.
    pub fn step(&mut self, fix: Point2D, meas: &RangeMeasurement) -> Result<Point2D> {
        let current = *self.state.get_or_insert_with(|| KalmanState::at(fix));
        let next = filter_step(&current, meas, &self.config)?;
        self.state = Some(next);
        Ok(next.point())
    }
}
