//! Simulation and verification toolkit for random environments on the
//! integer lattice whose per-site arrow sets may be degenerate.

pub mod barrier;
pub mod cluster;
pub mod config;
pub mod env;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod fixed;
pub mod grid;
pub mod lattice;
pub mod model;
pub mod render;
pub mod stats;

pub use error::{DreError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
