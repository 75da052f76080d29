//! Spectral solver and boundary-control synthesizer for the wave equation
//! with memory.
//!
//! The crate turns a first-order-in-time evolution whose right side
//! convolves the Laplacian of past states with a kernel `N(t)` into a
//! second-order wave-like system, solves it mode by mode over the Dirichlet
//! spectrum of an interval or rectangle, and synthesizes boundary controls
//! that steer the state to a target by solving a finite moment problem.
//!
//! Modules:
//! - [`grid`]: uniform time grids and sampled kernels (CSV in/out).
//! - [`conv`]: convolution algebra, Volterra resolvent kernels, closed-form
//!   trigonometric convolution identities.
//! - [`maccamy`]: reduction of the memory equation to a second-order system
//!   and the numerical equivalence check that pins the derivation.
//! - [`spectral`]: Dirichlet eigenpairs, boundary traces, lift coefficients
//!   and spectral Sobolev norms for built-in geometries.
//! - [`modal`]: the scalar memory oscillator per mode, solved by two
//!   independent routes, with its resolvent kernel and decay bound.
//! - [`field`]: space-time assembly, boundary traces, the reconstruction
//!   kernel, adjoint runs and direct-inequality diagnostics.
//! - [`control`]: control-to-state map, minimum-norm steering, moment-
//!   problem Gram bounds, the perp probe and eigenvalue deflation.
//! - [`config`] / [`experiment`] / [`report`]: the reproducible experiment
//!   runner behind the `memwave` binary.
//!
//! Each major capability also has a runnable demonstration under
//! `examples/`; see the README for the list.

pub mod config;
pub mod conv;
pub mod control;
pub mod error;
pub mod experiment;
pub mod field;
pub mod grid;
pub mod maccamy;
pub mod modal;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{ClosedForm, SampledKernel, TimeGrid};
