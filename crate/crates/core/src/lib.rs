//! Mean-field and exact ground states of the extended Dicke model for a
//! two-component Bose-Einstein condensate in an optical cavity.
//!
//! - [`model`]: parameter records and the trap-based coupling estimator
//! - [`meanfield`]: thermodynamic-limit energy landscape and its global minimum
//! - [`exact`]: finite-N exact diagonalization in a truncated Fock basis
//! - [`phases`]: phase labels, analytic critical lines, transition detection
//! - [`sweep`]: deterministic parameter grids serialized to CSV/JSON
//! - [`cli`]: the `cavity-dicke` command-line frontend

pub mod cli;
pub mod error;
pub mod exact;
pub mod meanfield;
pub mod model;
pub mod phases;
pub mod poly;
pub mod sweep;

pub use error::{DickeError, Result};
pub use meanfield::{ground_state, BlochPoint, MeanFieldSolution};
pub use model::{ModelParams, TrapSpec};
