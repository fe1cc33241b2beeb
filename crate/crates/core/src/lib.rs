//! Equilibrium and archive dynamics of an open knowledge platform.
//!
//! A public archive of solved problems depreciates each period and is
//! replenished by knowledge-enhancing questions that get posted and answered.
//! Agents choose between volunteering on the platform and an outside option
//! that improves with the archive itself; posted queries compete for scarce
//! contributor attention under a short-side matching rule. The library solves
//! the resulting nested fixed point at any archive stock, simulates archive
//! accumulation, locates and classifies steady states, and runs the
//! comparative statics that contrast a human-only environment with an
//! AI-augmented one (private diversion, contributor-pool thinning, and the
//! public-logging conversion lever).
//!
//! Entry points:
//! - [`equilibrium::solve_period`] for one (stock, environment) solve,
//! - [`dynamics`] for creation curves, trajectories, and steady states,
//! - [`analysis`] for decompositions, the resolution race, crowd-out, the
//!   critical conversion rate, and sensitivity sweeps,
//! - [`config::RunConfig`] for JSON-configured runs (the `commons` binary
//!   wraps all of the above).
//!
//! Everything is deterministic: identical inputs produce bit-identical
//! outputs, including under internal parallelism.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod output;
pub mod params;
pub mod primitives;
pub mod solver;
pub mod validate;

pub use config::{RunConfig, Tolerances};
pub use equilibrium::{PeriodEquilibrium, SolverOptions};
pub use error::{Error, Result};
pub use params::{EnvParams, Environment, ModelParams, QueryType, SharedParams};
