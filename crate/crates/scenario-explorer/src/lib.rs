//! Directed exploration of urban intersection scenarios.
//!
//! The crate searches the discretized parameter space of a logical traffic
//! scenario for critical concrete scenarios. Each candidate parameter set is
//! turned into a concrete scenario, run through a deterministic fixed-step
//! simulation in which the ego vehicle is driven by a curvature-aware
//! Intelligent Driver Model, and scored with a criticality metric (smaller =
//! more critical). A Bayesian optimizer — a Gaussian-process surrogate on
//! random cosine features with Thompson-sampling acquisition — picks the next
//! candidate, so that critical regions of a grid with hundreds of thousands
//! of cells surface after a few hundred simulations.
//!
//! Entry points:
//! - [`scenario::load_scenario_library`] for the bundled intersection
//!   scenarios and their parameter grids,
//! - [`sim::simulate`] for a single deterministic rollout,
//! - [`metrics::evaluate`] for the five criticality metrics,
//! - [`bo::run`] for the optimization loop over any grid objective,
//! - [`explore`] for the file-driven workflow behind the CLI.
//!
//! The `examples/` directory walks through each capability in isolation.

pub mod bo;
pub mod conflict;
pub mod error;
pub mod explore;
pub mod geom;
pub mod gp;
pub mod metrics;
pub mod scenario;
pub mod sim;

pub mod cli;

pub use error::{Error, Result};
