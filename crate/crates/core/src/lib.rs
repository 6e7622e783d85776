//! Dynamic networks: causal influence metrics, worst-case schedule
//! constructions, and distributed counting protocols run in a synchronous
//! simulator.

pub mod cli;
pub mod dynamic_graph;
pub mod explorer;
pub mod generators;
pub mod influence;
pub mod local_windows;
pub mod protocols;
