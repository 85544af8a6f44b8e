//! Near-field target localization with a moving uniform linear array.
//!
//! A ULA of `N` elements rides a platform along the y-axis at constant speed.
//! Over `L` symbols its elements sweep a virtual aperture of length
//! `L * T_s * v`, which puts a target at a few meters' range inside the
//! near field even though the physical array is small. This crate provides:
//!
//! - [`geometry`]: element trajectories, target distances, Rayleigh distances;
//! - [`channel`]: spherical-wavefront steering vectors and their exact
//!   derivatives with respect to the target coordinate;
//! - [`waveform`]: strongest-eigenmode (SEM) and isotropic transmission;
//! - [`crb`]: Fisher information and Cramér-Rao bounds for the moving,
//!   conventional fixed and extended fixed arrays, plus closed-form
//!   approximations;
//! - [`simulate`]: noisy received signals;
//! - [`estimate`]: concentrated maximum-likelihood grid search;
//! - [`experiments`]: sweeps and maps behind the `moving-array` CLI.
//!
//! # Conventions
//!
//! All quantities are SI (meters, seconds, watts). Symbol and element indices
//! are **0-based**: symbol `l` ranges over `0..L` and element `n` over `0..N`,
//! so element `n = 0` sits at the origin during symbol `l = 0`.
//! The unknown parameter vector is ordered `(x, y, Re b, Im b)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod crb;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod geometry;
pub mod rng;
pub mod simulate;
pub mod waveform;

pub use error::{Error, Result};
pub use geometry::{Architecture, ArrayConfig, Layout, Scene};

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;
