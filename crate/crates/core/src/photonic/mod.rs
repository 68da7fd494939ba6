//! Simulated chip: amplitude modulator, one-symbol delay taps, star
//! coupler and square-law photodiodes.

mod chip;
mod forward;
mod modulator;
mod noise;

pub use chip::{
    build_chip, coupler_matrix, coupler_rank, ChipModel, CouplerKind, ALIGNMENT_TOL, DEFAULT_BAUD_GBD,
    DEFAULT_DELTA_T_PS, MAX_RETRIES,
};
pub use forward::{monomial_map, simulate_forward, NORMALIZATION_TOL};
pub use modulator::{ModulatorModel, ModulatorRegime};
pub use noise::NoiseModel;
