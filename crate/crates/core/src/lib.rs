//! Hartmann-Hahn double resonance (HHDR) between a continuously driven NV
//! electron spin and weakly coupled spin-1/2 nuclei.
//!
//! The crate is split along the physics:
//!
//! * [`spin_model`]: constants, point-dipole geometry and the closed-form
//!   resonance model (effective field, detuning, flip-flop rate, transfer
//!   probability) together with its inversion.
//! * [`engine`]: exact dense state-vector simulation of spin-locking, Ramsey
//!   and alternating sequences on the electron ⊗ nuclei Hilbert space.
//! * [`bath`]: random ¹³C baths on the diamond lattice, the per-sweep kinetic
//!   polarization model and FID synthesis.
//! * [`analysis`]: DFT, Fourier maps and the least-squares profile fits.
//!
//! Every frequency is a linear frequency in Hz. Angular factors of 2π are
//! applied only where phases are evaluated.

pub mod analysis;
pub mod bath;
pub mod engine;
mod error;
pub mod spin_model;

pub use error::{Error, Result};

/// Cartesian 3-vector. Tesla for fields, metres for positions.
pub type Vec3 = nalgebra::Vector3<f64>;
