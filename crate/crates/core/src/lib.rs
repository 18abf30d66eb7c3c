//! Numerical laboratory for weighted Strichartz estimates and small-data
//! scattering of the radial nonlinear Schrödinger equation
//! `i u_t + Δu = λ |u|^{p-1} u` in `R^n`.

pub mod cli;
pub mod error;
pub mod estimates_lab;
pub mod exponents;
pub mod norms;
pub(crate) mod par;
pub mod radial_transform;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
