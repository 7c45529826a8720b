use serde::{Deserialize, Serialize};

use super::PhyError;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

/// Frame structure. The scheduled protocol needs five OFDM symbols per frame
/// (poll, guard, uplink, guard, ACK); grant-free access skips the poll.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    #[default]
    #[serde(rename = "scheduled_5slot")]
    Scheduled5Slot,
    #[serde(rename = "grantfree_4slot")]
    Grantfree4Slot,
}

impl Protocol {
    pub fn slots_per_frame(self) -> u32 {
        match self {
            Protocol::Scheduled5Slot => 5,
            Protocol::Grantfree4Slot => 4,
        }
    }
}

/// Radio and geometry parameters. All quantities are linear SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhyConfig {
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    pub subcarrier_spacing: f64,
    pub delay_spread: f64,
    pub symbol_info_duration: f64,
    pub cyclic_prefix_duration: f64,
    pub num_antennas: usize,
    pub sic_limit: usize,
    pub packet_bits: u32,
    /// W/Hz
    pub noise_psd: f64,
    pub noise_figure: f64,
    /// W
    pub tx_power: f64,
    pub bs_antenna_gain: f64,
    pub device_antenna_gain: f64,
    pub bs_height: f64,
    pub device_height: f64,
    /// Rectangle side lengths in metres; the BS sits at the centre.
    pub layout: [f64; 2],
    /// m/s
    pub device_speed: f64,
    /// Log-normal shadowing drawn once per device per placement.
    pub shadowing: bool,
    pub shadowing_std_db: f64,
    /// When set, devices sit on a circle of this horizontal radius around the
    /// BS instead of being uniform over the layout.
    pub device_distance: Option<f64>,
    /// Keep the first placement for every later episode.
    pub fixed_topology: bool,
}

impl Default for PhyConfig {
    fn default() -> Self {
        Self {
            carrier_frequency: 4e9,
            bandwidth: 38.16e6,
            subcarrier_spacing: 30e3,
            delay_spread: 100e-9,
            symbol_info_duration: 33.33e-6,
            cyclic_prefix_duration: 2.34e-6,
            num_antennas: 4,
            sic_limit: 3,
            // 32 B payload + 46 B headers + 14 B buffer report
            packet_bits: (32 + 46 + 14) * 8,
            noise_psd: dbm_to_watts(-174.0),
            noise_figure: db_to_linear(5.0),
            tx_power: dbm_to_watts(23.0),
            bs_antenna_gain: db_to_linear(5.0),
            device_antenna_gain: db_to_linear(0.0),
            bs_height: 3.0,
            device_height: 1.5,
            layout: [50.0, 120.0],
            device_speed: 3.0 / 3.6,
            shadowing: false,
            shadowing_std_db: super::INH_NLOS_SHADOWING_STD_DB,
            device_distance: None,
            fixed_topology: false,
        }
    }
}

impl PhyConfig {
    pub fn symbol_duration(&self) -> f64 {
        self.symbol_info_duration + self.cyclic_prefix_duration
    }

    pub fn frame_duration(&self, protocol: Protocol) -> f64 {
        f64::from(protocol.slots_per_frame()) * self.symbol_duration()
    }

    /// σ² = N0 · W · NF
    pub fn noise_power(&self) -> f64 {
        self.noise_psd * self.bandwidth * self.noise_figure
    }

    pub fn validate(&self) -> Result<(), PhyError> {
        let positive = [
            ("carrier_frequency", self.carrier_frequency),
            ("bandwidth", self.bandwidth),
            ("subcarrier_spacing", self.subcarrier_spacing),
            ("delay_spread", self.delay_spread),
            ("symbol_info_duration", self.symbol_info_duration),
            ("cyclic_prefix_duration", self.cyclic_prefix_duration),
            ("noise_psd", self.noise_psd),
            ("noise_figure", self.noise_figure),
            ("tx_power", self.tx_power),
            ("bs_antenna_gain", self.bs_antenna_gain),
            ("device_antenna_gain", self.device_antenna_gain),
            ("bs_height", self.bs_height),
            ("device_height", self.device_height),
            ("layout[0]", self.layout[0]),
            ("layout[1]", self.layout[1]),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(PhyError::InvalidConfig(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        if !(self.device_speed.is_finite() && self.device_speed >= 0.0) {
            return Err(PhyError::InvalidConfig(format!(
                "device_speed must be nonnegative, got {}",
                self.device_speed
            )));
        }
        if self.num_antennas == 0 {
            return Err(PhyError::InvalidConfig("num_antennas must be at least 1".into()));
        }
        if self.sic_limit == 0 {
            return Err(PhyError::InvalidConfig("sic_limit must be at least 1".into()));
        }
        if self.packet_bits == 0 {
            return Err(PhyError::InvalidConfig("packet_bits must be at least 1".into()));
        }
        if self.shadowing_std_db < 0.0 {
            return Err(PhyError::InvalidConfig("shadowing_std_db must be nonnegative".into()));
        }
        if let Some(r) = self.device_distance {
            if !(r.is_finite() && r >= 0.0) {
                return Err(PhyError::InvalidConfig(format!(
                    "device_distance must be nonnegative, got {r}"
                )));
            }
        }
        Ok(())
    }
}
