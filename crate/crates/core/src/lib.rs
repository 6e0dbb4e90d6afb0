//! Link-level simulation of wideband millimeter-wave MIMO with a lens
//! antenna array at the base station, against fully digital and hybrid
//! analog/digital UPA MIMO-OFDM, plus RF-chain power models.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod power;
pub mod transceivers;
pub mod waterfill;

pub use array::{build_lens_geometry, lens_response, power_response_map, upa_response, ArrayGeometry, Direction, LensArrayGeometry, LensElement, PowerMap, UpaGeometry};
pub use channel::{
    effective_flat_channel, freq_response, leakage_ratio, sample_channel, AngleRange, ChannelSamplingParams, DelayCompensation, MultipathChannel, PathComponent, PowerProfile,
};
pub use error::{Error, Result};
pub use harness::{emit_results, run_experiment, AggregateResult, ExperimentConfig, OutputFormat};
pub use power::{power_digital, power_hybrid, power_lens, PowerModel, PowerTable};
pub use transceivers::{
    build_codebook, hybrid_rate, lens_sc_pdm_rate, ofdm_digital_rate, select_antennas, Codebook, SchemeConfig, SchemeKind, SchemeResult,
};
pub use waterfill::{waterfill, Allocation};
