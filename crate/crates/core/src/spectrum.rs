//! 2.4 GHz channel plan for 802.15.4 and 802.11, spectral overlap, and the
//! interference model used by energy scans and packet reception.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{dbm_to_milliwatts, milliwatts_to_dbm, Dbm};

pub const ZIGBEE_BANDWIDTH_MHZ: f64 = 2.0;
pub const WIFI_BANDWIDTH_MHZ: f64 = 22.0;

/// An 802.15.4 channel in the 2.4 GHz band (11..=26).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ZigbeeChannel(u8);

impl ZigbeeChannel {
    pub const FIRST: u8 = 11;
    pub const LAST: u8 = 26;
    pub const COUNT: usize = 16;

    pub fn new(index: u8) -> Result<Self> {
        if (Self::FIRST..=Self::LAST).contains(&index) {
            Ok(Self(index))
        } else {
            Err(Error::InvalidChannel {
                kind: "ZigBee",
                index,
            })
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn center_mhz(self) -> f64 {
        zigbee_center_mhz(self)
    }

    /// All 16 channels in ascending order.
    pub fn all() -> impl Iterator<Item = ZigbeeChannel> {
        (Self::FIRST..=Self::LAST).map(ZigbeeChannel)
    }
}

impl TryFrom<u8> for ZigbeeChannel {
    type Error = Error;
    fn try_from(index: u8) -> Result<Self> {
        Self::new(index)
    }
}

impl From<ZigbeeChannel> for u8 {
    fn from(c: ZigbeeChannel) -> u8 {
        c.0
    }
}

impl fmt::Display for ZigbeeChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An 802.11b/g channel in the 2.4 GHz band (1..=13).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct WifiChannel(u8);

impl WifiChannel {
    pub const FIRST: u8 = 1;
    pub const LAST: u8 = 13;
    /// The customary non-overlapping set.
    pub const NON_OVERLAPPING: [u8; 3] = [1, 6, 11];

    pub fn new(index: u8) -> Result<Self> {
        if (Self::FIRST..=Self::LAST).contains(&index) {
            Ok(Self(index))
        } else {
            Err(Error::InvalidChannel {
                kind: "WiFi",
                index,
            })
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn center_mhz(self) -> f64 {
        wifi_center_mhz(self)
    }
}

impl TryFrom<u8> for WifiChannel {
    type Error = Error;
    fn try_from(index: u8) -> Result<Self> {
        Self::new(index)
    }
}

impl From<WifiChannel> for u8 {
    fn from(c: WifiChannel) -> u8 {
        c.0
    }
}

impl fmt::Display for WifiChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn zigbee_center_mhz(c: ZigbeeChannel) -> f64 {
    2405.0 + 5.0 * f64::from(c.0 - ZigbeeChannel::FIRST)
}

pub fn wifi_center_mhz(w: WifiChannel) -> f64 {
    2412.0 + 5.0 * f64::from(w.0 - WifiChannel::FIRST)
}

/// Bands intersect when the center separation is strictly below the sum of
/// half-bandwidths. Touching edges do not count.
pub fn channels_overlap(z: ZigbeeChannel, w: WifiChannel) -> bool {
    (z.center_mhz() - w.center_mhz()).abs() < (ZIGBEE_BANDWIDTH_MHZ + WIFI_BANDWIDTH_MHZ) / 2.0
}

/// A WiFi transmitter as seen from the sensing node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfererProfile {
    pub wifi_channel: WifiChannel,
    pub rx_power: Dbm,
    /// Fraction of time the interferer is on air.
    pub duty_cycle: f64,
}

impl InterfererProfile {
    pub fn new(wifi_channel: WifiChannel, rx_power: Dbm, duty_cycle: f64) -> Result<Self> {
        let p = Self {
            wifi_channel,
            rx_power,
            duty_cycle,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.duty_cycle) {
            return Err(invalid("duty_cycle", "must lie in [0, 1]"));
        }
        if !self.rx_power.0.is_finite() {
            return Err(invalid("rx_power", "must be finite"));
        }
        Ok(())
    }

    fn draw_active<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.random_bool(self.duty_cycle)
    }
}

/// Interference seen on the band at the sensing node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEnvironment {
    pub interferers: Vec<InterfererProfile>,
    pub noise_floor: Dbm,
}

impl Default for ChannelEnvironment {
    fn default() -> Self {
        Self {
            interferers: Vec::new(),
            noise_floor: Dbm(-100.0),
        }
    }
}

impl ChannelEnvironment {
    pub fn quiet(noise_floor: Dbm) -> Self {
        Self {
            interferers: Vec::new(),
            noise_floor,
        }
    }

    /// Interferers on each of `channels`, all with the same power and duty.
    pub fn with_wifi(
        channels: &[u8],
        rx_power: Dbm,
        duty_cycle: f64,
        noise_floor: Dbm,
    ) -> Result<Self> {
        let interferers = channels
            .iter()
            .map(|&c| InterfererProfile::new(WifiChannel::new(c)?, rx_power, duty_cycle))
            .collect::<Result<_>>()?;
        Ok(Self {
            interferers,
            noise_floor,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.noise_floor.0.is_finite() {
            return Err(invalid("noise_floor", "must be finite"));
        }
        self.interferers
            .iter()
            .try_for_each(InterfererProfile::validate)
    }

    pub fn overlapping(&self, z: ZigbeeChannel) -> impl Iterator<Item = &InterfererProfile> {
        self.interferers
            .iter()
            .filter(move |i| channels_overlap(z, i.wifi_channel))
    }

    pub fn is_clean(&self, z: ZigbeeChannel) -> bool {
        self.overlapping(z).next().is_none()
    }
}

/// One energy-detect reading on `z`: noise floor plus every overlapping
/// interferer that happens to be active, summed in linear power.
pub fn channel_energy_sample<R: Rng + ?Sized>(
    env: &ChannelEnvironment,
    z: ZigbeeChannel,
    rng: &mut R,
) -> Dbm {
    let mut active_mw = 0.0;
    for i in env.overlapping(z) {
        if i.draw_active(rng) {
            active_mw += dbm_to_milliwatts(i.rx_power);
        }
    }
    if active_mw == 0.0 {
        return env.noise_floor;
    }
    milliwatts_to_dbm(dbm_to_milliwatts(env.noise_floor) + active_mw)
        .expect("sum of positive powers is positive")
}

/// A packet on `z` survives only if no overlapping interferer is on air.
#[allow(clippy::unnecessary_fold)]
pub fn packet_success<R: Rng + ?Sized>(
    env: &ChannelEnvironment,
    z: ZigbeeChannel,
    rng: &mut R,
) -> bool {
    // every interferer is drawn so the stream does not depend on early exit
    env.overlapping(z)
        .fold(true, |ok, i| !i.draw_active(rng) && ok)
}
