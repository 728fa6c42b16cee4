//! Numerical core for adhesive contact between two visco-elastodynamic
//! half-slabs and for the Kirchhoff-Love plate models obtained as the slab
//! thickness vanishes.
//!
//! The crate is `no_std` and only needs an allocator. File formats, run
//! configuration and the command line live in the companion `adhesive-plate`
//! crate.
//!
//! Layout:
//! - [`tensor`]: fourth-order elasticity/viscosity tensors, the out-of-plane
//!   reduction operator and its visco-elastic counterpart.
//! - [`energetics`]: energies, dissipation potentials and the power of loads.
//! - [`mesh`], [`assembly`], [`kl`], [`korn`]: meshes, finite-element forms,
//!   Kirchhoff-Love lifts and projections, and the sampled Korn check.
//! - [`mincut`]: exact binary labelling of the interface by max-flow.
//! - [`stepper`]: the staggered time scheme and trajectory certification.
#![no_std]

extern crate alloc;

pub mod assembly;
pub mod dense;
pub mod energetics;
mod error;
pub mod kl;
pub mod korn;
pub mod mesh;
pub mod mincut;
pub mod quadrature;
pub mod sparse;
pub mod stepper;
pub mod tensor;

pub use error::{Error, Result};
