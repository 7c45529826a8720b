//! Physical layer: fading evolution, path loss, received power, SIC decoding
//! order and SINR, finite-blocklength error probability and per-frame decoding.

mod config;
mod decode;
mod fading;
mod fbl;
mod pathloss;
mod resources;
mod sinr;

pub use config::{db_to_linear, dbm_to_watts, PhyConfig, Protocol, SPEED_OF_LIGHT};
pub use decode::{decode_frame, DecodeOutcome};
pub use fading::{coherence_time, jakes_coefficient, FadingMatrix};
pub use fbl::{
    capacity, dispersion, fbl_error_probability, invert_error_for_power, q_function,
};
pub use pathloss::{
    bs_position, inh_office_los_db, inh_office_nlos_db, path_gain, path_gain_with_shadowing,
    LinkBudget, INH_NLOS_SHADOWING_STD_DB,
};
pub use resources::{channel_uses, pilot_count};
pub use sinr::{
    cross_interference, decoding_order, no_sic_sinr, received_power, sic_sinr, CrossTerms,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhyError {
    #[error("coherence time is undefined for a device at zero speed")]
    UndefinedCoherence,
    #[error("device position coincides with the base-station antenna")]
    DegenerateGeometry,
    #[error("zero channel vector cannot serve as a combiner")]
    DegenerateCombiner,
    #[error("decoding order requested for an empty active set")]
    EmptyInput,
    #[error("pilot overhead of {polled} polled devices leaves no channel uses")]
    PilotOverload { polled: usize },
    #[error("no received power reaches error target {target}")]
    NoSolution { target: f64 },
    #[error("invalid physical-layer configuration: {0}")]
    InvalidConfig(String),
}
