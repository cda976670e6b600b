//! Eigenvalue location and verification for semiclassical Schrödinger
//! operators `P_h = −h²∂² + x^γ W(x)` on the half-line `[0, ∞)`.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod harness;
pub mod ode;
pub mod potential;
pub mod quad;
pub mod scaling;
pub mod shooting;
pub mod spectral;
pub mod stats;
pub mod wkb;

pub use error::{Error, Result};
pub use potential::{EnergyWindow, HalfLinePotential, PotentialSpec, Tail, UniformConstants};
