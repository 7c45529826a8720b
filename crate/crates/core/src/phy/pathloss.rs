//! Indoor-hotspot (office) path loss and per-device large-scale gains.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{db_to_linear, PhyConfig, PhyError};

/// Log-normal shadowing deviation of the InH-Office NLOS model.
pub const INH_NLOS_SHADOWING_STD_DB: f64 = 8.03;

/// InH-Office LOS path loss in dB; `d3d` in metres, `fc_ghz` in GHz.
pub fn inh_office_los_db(d3d: f64, fc_ghz: f64) -> f64 {
    32.4 + 17.3 * d3d.log10() + 20.0 * fc_ghz.log10()
}

/// InH-Office NLOS path loss in dB: the larger of the LOS loss and
/// 38.3 log10(d) + 17.30 + 24.9 log10(f_c).
pub fn inh_office_nlos_db(d3d: f64, fc_ghz: f64) -> f64 {
    let nlos = 38.3 * d3d.log10() + 17.30 + 24.9 * fc_ghz.log10();
    nlos.max(inh_office_los_db(d3d, fc_ghz))
}

/// BS antenna position: centre of the layout at the BS height.
pub fn bs_position(config: &PhyConfig) -> [f64; 3] {
    [config.layout[0] / 2.0, config.layout[1] / 2.0, config.bs_height]
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Large-scale gain G_b G_d 10^{-(PL + shadowing)/10} for an explicit shadowing draw.
pub fn path_gain_with_shadowing(
    position: [f64; 3],
    config: &PhyConfig,
    shadowing_db: f64,
) -> Result<f64, PhyError> {
    let d = distance(position, bs_position(config));
    if d <= 0.0 {
        return Err(PhyError::DegenerateGeometry);
    }
    let pl = inh_office_nlos_db(d, config.carrier_frequency / 1e9) + shadowing_db;
    Ok(config.bs_antenna_gain * config.device_antenna_gain * db_to_linear(-pl))
}

/// Large-scale gain of a device; draws shadowing only when the config enables it.
pub fn path_gain<R: Rng + ?Sized>(
    position: [f64; 3],
    config: &PhyConfig,
    rng: &mut R,
) -> Result<f64, PhyError> {
    let shadowing = if config.shadowing && config.shadowing_std_db > 0.0 {
        Normal::new(0.0, config.shadowing_std_db)
            .expect("finite deviation")
            .sample(rng)
    } else {
        0.0
    };
    path_gain_with_shadowing(position, config, shadowing)
}

/// Device positions and their large-scale gains, fixed for an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub positions: Vec<[f64; 3]>,
    pub gains: Vec<f64>,
}

impl LinkBudget {
    /// Places `num_devices` devices per the config (uniform over the layout,
    /// or evenly spaced on a ring of `device_distance`) and computes gains.
    pub fn place<R: Rng + ?Sized>(
        config: &PhyConfig,
        num_devices: usize,
        rng: &mut R,
    ) -> Result<Self, PhyError> {
        let positions: Vec<[f64; 3]> = match config.device_distance {
            Some(radius) => {
                let [cx, cy, _] = bs_position(config);
                (0..num_devices)
                    .map(|k| {
                        let theta =
                            2.0 * std::f64::consts::PI * k as f64 / num_devices.max(1) as f64;
                        [cx + radius * theta.cos(), cy + radius * theta.sin(), config.device_height]
                    })
                    .collect()
            }
            None => (0..num_devices)
                .map(|_| {
                    [
                        rng.random::<f64>() * config.layout[0],
                        rng.random::<f64>() * config.layout[1],
                        config.device_height,
                    ]
                })
                .collect(),
        };
        Self::from_positions(config, positions, rng)
    }

    pub fn from_positions<R: Rng + ?Sized>(
        config: &PhyConfig,
        positions: Vec<[f64; 3]>,
        rng: &mut R,
    ) -> Result<Self, PhyError> {
        let gains = positions
            .iter()
            .map(|&p| path_gain(p, config, rng))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { positions, gains })
    }

    pub fn num_devices(&self) -> usize {
        self.gains.len()
    }
}
