//! Plane-wave spectral solver for the nonlinear Schrödinger eigenproblem at
//! the Dirac point of a honeycomb lattice.
//!
//! The pipeline: build the linear Bloch Hamiltonian at the K point, extract
//! the symmetry-adapted degenerate pair, evaluate the quartic perturbation
//! integrals, then run a fixed-point bootstrap that constructs nonlinear
//! (pseudo-)eigenpairs and locates the eight-mode bifurcation of the
//! degenerate ground state.

pub mod bootstrap;
pub mod cli;
pub mod error;
pub mod fields;
pub mod lattice;
pub mod linear_spectrum;
pub mod nonlinearity;
pub mod perturbation;
pub mod system;

pub use error::{Error, Result};
