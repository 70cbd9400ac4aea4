//! Simulation of cavity-mediated state transfer between modular quantum chips.
//!
//! * [`quantum`]: density matrices, Kraus channels and fidelity measures.
//! * [`lindblad`]: master-equation engine for single hops and chains.
//! * [`channels`]: closed-form cavity, memory and latency models.
//! * [`netsim`]: discrete-event network simulation using those models.
//! * [`fitting`]: calibration of the closed-form models against the engine.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod fitting;
pub mod lindblad;
pub mod netsim;
pub mod par;
pub mod quantum;

pub use error::{Error, Result};
