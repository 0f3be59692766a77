//! Epsilon-revised dynamics of the rigid body with three linear controls.
//!
//! The conservative system `ẋ = x × m(x)` (with `m = ∇H`) is extended by the
//! metric drift `ε (x × m) × m`, which keeps the energy `H` as a first
//! integral while dissipating (ε > 0) or pumping (ε < 0) the Casimir
//! `C = ½|x|²`. The crate evaluates the model, integrates both flows,
//! enumerates equilibria on energy levels, estimates limit points and
//! classifies the stability of equilibria.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod model;
pub mod output;
pub mod presets;
pub mod roots;
pub mod stability;
pub mod vec3;
pub mod verify;

pub use error::{Error, IntegrationError, Result};
pub use model::{State, SystemConfig};
