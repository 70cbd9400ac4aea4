//! Master-equation ground truth for cavity-mediated hops.
//!
//! The composite is (ancilla, sender, cavity, receiver) with the ancilla
//! optional, leftmost factor slowest. Times are in µs and rates in rad/µs.

mod chain;
mod gain;
mod hop;
mod integrate;
mod optimize;
mod params;
mod pulse;
pub mod reduced;
mod rhs;
mod system;

pub use chain::{composed_node_processes, simulate_chain, ChainResult, NodeRecord};
pub use gain::{stirap_gain, StirapGain};
pub use hop::{
    default_peak_window, hop_process, simulate_hop, simulate_hop_towards, Frame, FrameMode, HopOptions, HopResult,
    DT_FACTOR, MIN_STEPS,
};
pub use integrate::{evolve, Trajectory, DRIFT_LIMIT, RENORMALIZE_TOL};
pub use optimize::{optimize_stirap, StirapOptimum};
pub use params::{hz_to_rad_per_us, rad_per_us_to_hz, PhysicalParams, RateUnit};
pub use pulse::{ConstantPulse, Cutoff, PulseSchedule, StirapPulse, STIRAP_TAIL_WIDTHS};
pub use rhs::lindblad_rhs;
pub use system::{build_hamiltonian, HopSystem, QubitModel};
