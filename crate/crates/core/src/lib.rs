//! Joint optimization of aerial base-station placement, edge-content caching
//! and user association over an air-to-ground channel.
//!
//! The crate is organized around an immutable [`Instance`] (scenario geometry,
//! content library, per-user requests and frozen link realizations) and a
//! mutable [`SolutionState`] (placement, caches, association). Three block
//! solvers operate on that pair:
//!
//! * [`deployment`]: swap matching of UAVs to candidate locations,
//! * [`caching`]: per-UAV greedy content placement (with an exact oracle),
//! * [`association`]: Lagrange-dual user association (with a brute-force oracle),
//!
//! and [`joint`] alternates them until the total score converges. Baselines
//! and a reduced-scale exhaustive oracle live in [`joint`] as well.

pub mod association;
pub mod caching;
pub mod channel;
pub mod config;
pub mod content;
pub mod deployment;
pub mod error;
pub mod instance;
pub mod joint;
pub mod qoe;
pub mod rng;
pub mod scenario;
pub mod solution;

pub use config::SimConfig;
pub use error::{Error, Result};
pub use instance::Instance;
pub use solution::SolutionState;
