use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::scenario::{RunResult, StepRecord};
use crate::error::{Error, Result};
use crate::geometry::{euclidean_distance, Point2D};

/// Which estimate of a step to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// Trilateration on the first reading of each window.
    Raw,
    /// Trilateration on window-averaged readings.
    Averaged,
    /// Averaged fixes smoothed by the Kalman filter.
    Kalman,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::Raw, Flavor::Averaged, Flavor::Kalman];

    pub fn estimate(self, step: &StepRecord) -> Option<Point2D> {
        match self {
            Flavor::Raw => step.raw,
            Flavor::Averaged => step.averaged,
            Flavor::Kalman => step.kalman,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mean_error: f64,
    pub max_error: f64,
    /// Per-step errors in ascending order.
    pub error_cdf: Vec<f64>,
    pub resolved_steps: usize,
    pub unresolved_steps: usize,
}

impl Metrics {
    /// Metrics over a list of per-step errors, `None` marking steps without
    /// an estimate.
    pub fn from_errors(errors: impl IntoIterator<Item = Option<f64>>) -> Result<Self> {
        let mut unresolved = 0;
        let mut sorted = Vec::new();
        for e in errors {
            match e {
                Some(e) => sorted.push(e),
                None => unresolved += 1,
            }
        }
        if sorted.is_empty() {
            return Err(Error::EmptyResult);
        }
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean_error = sorted.iter().sum::<f64>() / n;
        let rmse = (sorted.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
        Ok(Self {
            rmse,
            mean_error,
            max_error: *sorted.last().expect("non-empty"),
            error_cdf: sorted,
            resolved_steps: n as usize,
            unresolved_steps: unresolved,
        })
    }
}

/// Position error of one flavor at one step.
pub fn step_error(step: &StepRecord, flavor: Flavor) -> Option<f64> {
    flavor
        .estimate(step)
        .map(|p| euclidean_distance(p, step.truth))
}

pub fn compute_metrics(result: &RunResult, flavor: Flavor) -> Result<Metrics> {
    compute_metrics_window(result, flavor, 0..result.steps.len())
}

/// Metrics restricted to the step indices in `window`.
pub fn compute_metrics_window(
    result: &RunResult,
    flavor: Flavor,
    window: Range<usize>,
) -> Result<Metrics> {
    let end = window.end.min(result.steps.len());
    let start = window.start.min(end);
    Metrics::from_errors(
        result.steps[start..end]
            .iter()
            .map(|s| step_error(s, flavor)),
    )
}

/// Scores of the three pipelines on the same run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineMetrics {
    pub raw: Metrics,
    pub averaged: Metrics,
    pub kalman: Metrics,
}

impl PipelineMetrics {
    pub fn from_run(result: &RunResult) -> Result<Self> {
        Self::from_window(result, 0..result.steps.len())
    }

    pub fn from_window(result: &RunResult, window: Range<usize>) -> Result<Self> {
        Ok(Self {
            raw: compute_metrics_window(result, Flavor::Raw, window.clone())?,
            averaged: compute_metrics_window(result, Flavor::Averaged, window.clone())?,
            kalman: compute_metrics_window(result, Flavor::Kalman, window)?,
        })
    }

    pub fn get(&self, flavor: Flavor) -> &Metrics {
        match flavor {
            Flavor::Raw => &self.raw,
            Flavor::Averaged => &self.averaged,
            Flavor::Kalman => &self.kalman,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_error() {
        let m = Metrics::from_errors([Some(3.0)]).unwrap();
        assert_eq!((m.rmse, m.max_error, m.mean_error), (3.0, 3.0, 3.0));
    }

    #[test]
    fn two_errors() {
        let m = Metrics::from_errors([Some(4.0), None, Some(3.0)]).unwrap();
        assert!((m.rmse - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((m.rmse - 3.53553).abs() < 1e-5);
        assert_eq!(m.mean_error, 3.5);
        assert_eq!(m.error_cdf, vec![3.0, 4.0]);
        assert_eq!((m.resolved_steps, m.unresolved_steps), (2, 1));
    }

    #[test]
    fn perfect_and_empty() {
        let m = Metrics::from_errors([Some(0.0); 4]).unwrap();
        assert_eq!((m.rmse, m.mean_error, m.max_error), (0.0, 0.0, 0.0));
        assert_eq!(Metrics::from_errors([None, None]), Err(Error::EmptyResult));
    }
}
