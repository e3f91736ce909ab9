//! Kinetic simulation of a market whose agents carry a rationality `x` and an
//! estimated asset value `w`.
//!
//! Agents update their valuation by consulting a public background value
//! `W(t)` or by herding with other agents, and drift in rationality depending
//! on how far their valuation is from `W(t)`. The crate provides
//!
//! * [`collision`]: a stochastic, mass-conserving interaction step on the
//!   gridded density,
//! * [`transport`]: a flux-limited finite-volume step for the rationality drift,
//! * [`fokker_planck`]: an explicit solver for the diffusive limit equation,
//!   used to cross-check moment asymptotics,
//! * [`analytics`]: bubble/crash statistics and Bollinger bands,
//! * [`experiments`]: configuration, presets, ensembles and CSV/JSON output.

pub mod analytics;
pub mod collision;
pub mod error;
pub mod experiments;
pub mod fokker_planck;
pub mod grid;
pub mod model;
pub mod scenario;
pub mod series;
pub mod transport;

pub use error::{Error, Result};
pub use grid::{DistributionGrid, Moments};
pub use model::ModelParams;
pub use scenario::{Background, Scenario};
pub use series::{Record, State, TimeSeries};
