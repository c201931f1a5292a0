//! Log-distance path loss, its inversion for ranging, and noisy RSSI draws.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Dbm;

/// Parameters of the log-distance model
/// `RSSI(d) = RSSI(d0) - 10 n log10(d / d0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub rssi_at_ref: Dbm,
    /// Reference distance `d0` in meters.
    pub ref_distance: f64,
    /// Path-loss exponent `n`.
    pub exponent: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self {
            rssi_at_ref: Dbm(-45.0),
            ref_distance: 1.0,
            exponent: 2.0,
        }
    }
}

impl PathLossParams {
    pub fn new(rssi_at_ref: Dbm, ref_distance: f64, exponent: f64) -> Result<Self> {
        let p = Self {
            rssi_at_ref,
            ref_distance,
            exponent,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_exponent(exponent: f64) -> Result<Self> {
        Self::new(Dbm(-45.0), 1.0, exponent)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rssi_at_ref.0.is_finite() {
            return Err(invalid("rssi_at_ref", "must be finite"));
        }
        if !(self.ref_distance > 0.0 && self.ref_distance.is_finite()) {
            return Err(invalid("ref_distance", "must be positive"));
        }
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(invalid("exponent", "must be positive"));
        }
        Ok(())
    }
}

/// Transceiver limits. Defaults follow a 2.4 GHz 802.15.4 module with
/// 20 dBm output, -107 dBm sensitivity and 200 ft indoor range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioSpec {
    pub tx_power: Dbm,
    pub sensitivity: Dbm,
    /// Nominal link range in meters.
    pub max_range: f64,
}

pub const FEET_TO_METERS: f64 = 0.3048;

impl Default for RadioSpec {
    fn default() -> Self {
        Self {
            tx_power: Dbm(20.0),
            sensitivity: Dbm(-107.0),
            max_range: 200.0 * FEET_TO_METERS,
        }
    }
}

impl RadioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sensitivity.0 < self.tx_power.0) {
            return Err(invalid("sensitivity", "must be below transmit power"));
        }
        if !(self.max_range > 0.0) {
            return Err(invalid("max_range", "must be positive"));
        }
        Ok(())
    }
}

/// Zero-mean Gaussian shadowing in the dB domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowingModel {
    /// Standard deviation in dB.
    pub sigma: f64,
}

impl Default for ShadowingModel {
    fn default() -> Self {
        Self { sigma: 2.0 }
    }
}

impl ShadowingModel {
    pub const NONE: ShadowingModel = ShadowingModel { sigma: 0.0 };

    pub fn new(sigma: f64) -> Result<Self> {
        if sigma >= 0.0 && sigma.is_finite() {
            Ok(Self { sigma })
        } else {
            Err(invalid("sigma", "must be a finite value >= 0"))
        }
    }

    /// Draws one shadowing offset in dB. A zero sigma consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        // sigma is validated finite and positive here
        Normal::new(0.0, self.sigma)
            .expect("finite non-negative sigma")
            .sample(rng)
    }
}

pub fn rssi_at_distance(params: &PathLossParams, d: f64) -> Result<Dbm> {
    if !(d > 0.0) {
        return Err(Error::NonPositiveDistance(d));
    }
    Ok(Dbm(params.rssi_at_ref.0
        - 10.0
            * params.exponent
            * (d / params.ref_distance).log10()))
}

/// Inverts the path-loss model. Readings above the reference RSSI yield
/// distances shorter than `ref_distance`.
pub fn distance_from_rssi(params: &PathLossParams, rssi: Dbm) -> f64 {
    params.ref_distance * 10f64.powf((params.rssi_at_ref.0 - rssi.0) / (10.0 * params.exponent))
}

/// One noisy RSSI reading at distance `d`, or `None` when the reading falls
/// below receiver sensitivity.
pub fn sample_measured_rssi<R: Rng + ?Sized>(
    params: &PathLossParams,
    spec: &RadioSpec,
    d: f64,
    shadow: &ShadowingModel,
    rng: &mut R,
) -> Result<Option<Dbm>> {
    let mean = rssi_at_distance(params, d)?;
    let value = mean.0 + shadow.sample(rng);
    Ok((value >= spec.sensitivity.0).then_some(Dbm(value)))
}
