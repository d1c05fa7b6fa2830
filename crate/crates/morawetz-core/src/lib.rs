//! Multiplier currents, certification checks, and a 1+1 wave solver on the
//! Schwarzschild exterior.
//!
//! The pipeline runs in five stages. [`geometry`] fixes the background: the
//! mass function, the tortoise coordinate and its inversion, and the shifted
//! coordinate entering the arctangent multiplier. [`multipliers`] evaluates
//! the two radial profiles with three derivatives each and the bookkeeping
//! function whose photon-sphere behavior the certification rests on.
//! [`currents`] assembles sphere-integrated divergence kernels, boundary
//! fluxes, the pointwise lower bound, and the controlled-quantity density
//! from those profiles. [`verifier`] scans the inequalities behind the
//! kernel's nonnegativity with explicit margins and computes best constants
//! for the controlled-quantity estimates as generalized eigenvalue problems.
//! [`solver`] evolves a single spherical-harmonic mode in the tortoise
//! coordinate and [`accounting`] integrates kernels and fluxes over
//! spacetime regions to validate the integrated estimate against actual
//! waves.
//!
//! The crate is `no_std` (with `alloc`); everything needing files, threads,
//! or a clock lives in the companion command-line crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod accounting;
pub mod currents;
pub mod fmath;
pub mod geometry;
pub mod multipliers;
pub mod rng;
pub mod solver;
pub mod verifier;
