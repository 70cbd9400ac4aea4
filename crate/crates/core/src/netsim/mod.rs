//! Discrete-event network layer.
//!
//! Nodes hold one qubit memory each (optionally entangled with an untouched
//! reference ancilla) and links are amplitude-damping channels with a latency.
//! All times on the event clock are in nanoseconds.

mod clock;
mod link;
mod node;
mod protocol;
mod record;

pub use clock::EventQueue;
pub use link::CavityLink;
pub use node::{memory_noise_channel, Memory, NetworkNode};
pub use protocol::{
    exact_node_processes, exact_records, per_hop_loss, run_chain_protocol, run_chain_samples, ChainTopology,
    InitialState, Pacing, TransferProtocol,
};
pub use record::{average_by_node, read_records, write_records, SimRecord};
