//! Simulation of a Leggett-Garg test carried out with exact weak measurement
//! in a polarization/path interference network.
//!
//! The crate is layered bottom-up:
//!
//! - [`algebra`]: dense complex states and operators over labeled bases,
//!   tensor products and the closed-form exponential of involutions.
//! - [`optics`]: Jones matrices of the bench elements, arm-conditional
//!   placement on the path⊗polarization space, bench layouts and their text
//!   format.
//! - [`weakmeas`]: weak values, post-selection probabilities, the exact pointer
//!   relations and their inversion.
//! - [`lgi`]: n-time and two-time Leggett-Garg quantities, bounds and a
//!   sequential Lüders-rule oracle.
//! - [`expsim`]: end-to-end bench simulation with detector noise, error
//!   propagation and the θ/γ sweeps.
//! - [`cli`]: the `lgisim` command-line front end and its file formats.
//!
//! Runnable walkthroughs for each layer live in the crate's `examples/`
//! directory (`cargo run --example <name>`).

pub mod algebra;
pub mod cli;
mod error;
pub mod expsim;
pub mod lgi;
pub mod optics;
pub mod weakmeas;

pub use error::{Error, Result};

/// Numerical tolerances shared across the crate.
pub mod tol {
    /// Operator identities (unitarity, involution, Hermiticity).
    pub const OPERATOR: f64 = 1e-10;
    /// State normalization.
    pub const NORM: f64 = 1e-12;
    /// Smallest |⟨post|pre⟩| accepted before a weak value is declared undefined.
    pub const OVERLAP: f64 = 1e-9;
    /// Slack on the pointer-readout radius before inversion reports no real root.
    pub const READOUT: f64 = 1e-9;
}

/// Degrees to radians.
#[inline]
pub fn deg(angle: f64) -> f64 {
    angle.to_radians()
}
