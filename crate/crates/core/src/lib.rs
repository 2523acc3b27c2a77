//! Co-simulation of resonant electromagnetic vibration generators driving
//! switched-capacitor voltage multipliers.
//!
//! - [`genmodel`]: closed-form linear generator model and matched-load optimum.
//! - [`vmcalc`]: equivalent-circuit multiplier model and overhead accounting.
//! - [`vmsim`]: time-domain simulation of the multiplier ladder.
//! - [`coupled`]: generator + multiplier operating points, load sweeps, optima.
//! - [`cli`]: JSON run configuration and the command implementations behind
//!   the `emharvest` binary.

pub mod cli;
pub mod coupled;
mod error;
pub mod genmodel;
pub mod optimize;
pub mod presets;
pub mod vmcalc;
pub mod vmsim;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/generator.md")]
    mod generator {}
    #[doc = include_str!("../../../book/src/multiplier.md")]
    mod multiplier {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    mod coupling {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
