//! Multiple orthogonal polynomials for a Nikishin system on a three-ray star.

pub mod asymptotics;
pub mod cli_report;
pub mod config_weights;
pub mod equilibrium;
pub mod error;
pub mod hp;
pub mod mop_core;
pub mod quad;
pub mod riemann_surface;
pub mod second_kind;

pub use config_weights::{MomentCache, MomentKind, StarConfig, WeightId};
pub use error::{Error, Result};
