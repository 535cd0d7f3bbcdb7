//! IO, simulation and command-line tooling around `eventack-core`.

pub mod pipeline;
pub mod plot;
pub mod sim;
pub mod synth;

pub use eventack_core as core;
