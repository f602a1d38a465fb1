//! Transport and entanglement generation for bosons on a 1D Bose-Hubbard chain.

pub mod ctqw;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod fock;
mod linalg;
pub mod operators;
pub mod sdq;
pub mod solve;
pub mod table;
pub mod validate;

pub use error::{BhError, Result};
