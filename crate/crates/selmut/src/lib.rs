//! Equilibria of phenotypically structured populations with small mutations,
//! local and nonlocal dispersal, and competition on fragmented 1-D habitats,
//! together with the spectral and Hamilton-Jacobi diagnostics that describe
//! the small-mutation limit.

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod domain;
pub mod equilibrium;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod presets;
pub mod spectral;

pub use error::{Result, SelmutError};
