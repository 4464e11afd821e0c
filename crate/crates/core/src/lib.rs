//! Simulation of an actuator-mediated cross-node coupling channel between two
//! electron/nuclear spin nodes.
//!
//! Layout follows the physics pipeline: [`numerics`] is the dense complex
//! substrate, [`spin_system`] builds Hamiltonians, [`effective_coupling`]
//! analyses the induced four-body interaction, [`sequences`] compiles pulse
//! sequences, [`liouville`] assembles noisy channels and [`analysis`] turns
//! them into fidelities and sweeps.

// `!(x > 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod effective_coupling;
pub mod error;
pub mod liouville;
pub mod numerics;
pub mod sequences;
pub mod spin_system;
pub mod verification;

pub use error::{Error, Result};
