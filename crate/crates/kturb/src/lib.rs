//! A desk-scale numerical laboratory for Kolmogorov's two-equation (b-omega)
//! turbulence model.
//!
//! The model couples an incompressible velocity field v with two scalar
//! fields: b (proportional to the turbulent kinetic energy) and omega (the
//! turbulent frequency). The effective viscosity is the degenerate quotient
//! mu = b/omega. This crate implements:
//!
//! * the regularization cascade (truncated viscosity, floored diffusivity,
//!   floored frequency) that makes the degenerate system computable,
//! * a generalized stick-slip wall-law family (no-slip limit, Navier slip,
//!   threshold stick-slip) solved implicitly at the walls,
//! * a positivity-preserving IMEX time stepper with discrete maximum/minimum
//!   principles for omega and a discrete floor for b,
//! * dual formulations (direct b-equation vs total-energy equation) and the
//!   machinery to cross-check them,
//! * 2D pressure: discrete projection and the three-part decomposition into
//!   viscous, convective, and boundary-generated (harmonic) parts,
//! * diagnostics: energy-identity residuals, bound monitors, a two-parameter
//!   scaling-invariance harness (bit-exact for power-of-two factors),
//!   convergence studies, and a-priori budget accounting,
//! * the Prandtl one-equation reduction under a prescribed mixing length.
//!
//! Entry points: [`scenario`] files drive [`stepper::run`]; the `kturb`
//! binary wraps the same calls behind `run` / `verify` / `study`
//! subcommands. Each major capability also has a runnable example under
//! `examples/`.

pub mod core;
pub mod cutoffs;
pub mod slipbc;
pub mod error;

pub use error::{Error, Result};



pub mod cli;
pub mod operators;
pub mod diagnostics;
pub mod energy;
pub mod prandtl;
pub mod pressure;
pub mod stepper;
pub(crate) mod linalg;
