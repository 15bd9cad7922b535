//! Simulation and causal diagnostics for Bell tests built on entanglement
//! swapping.
//!
//! - [`qcore`]: state vectors, spin and Bell measurements, exact branch enumeration.
//! - [`geometry`]: light-cone classification, experiment layouts, boosted time order.
//! - [`engine`]: trial generation, post-selection, exact joint distributions, ensemble files.
//! - [`toys`]: classical collider models and rock-paper-scissors.
//! - [`analysis`]: CHSH, independence tests, C-absent comparison, fragility, teleport channel.
//! - [`cli`]: the `swapsim` command line.

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod geometry;
pub mod qcore;
pub mod rng;
pub mod toys;
