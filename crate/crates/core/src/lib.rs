//! Information measures on finite discrete joint distributions, and the
//! machinery to compute them on reduced alphabets.
//!
//! Every measure here (mutual information, f-information, Wyner and
//! Gács–Körner common information, the information bottleneck Lagrangian
//! and its relevance curve) takes the same value on `(X, Y)` and on any
//! pair of sufficient statistics `(s(X), t(Y))`. The crate provides:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`dist`] | joints, kernels, maps, entropy, (conditional) mutual information |
//! | [`modal`] | canonical dependence kernel, modal decomposition, minimal statistics |
//! | [`finfo`] | f-information with built-in and user generators |
//! | [`common`] | Gács–Körner (spectral + graph oracle) and Wyner common information |
//! | [`ib`] | information bottleneck fixed point and relevance curve |
//! | [`harness`] | random joints, refinements, separability reports, plug-in pipeline |
//!
//! The crate is `no_std` (with `alloc`). All routines are pure functions of
//! their inputs; seeded solvers are deterministic given their seed.
//!
//! ```
//! use infosep_core::dist::{JointDistribution, Unit};
//!
//! let dsbs = JointDistribution::validate_and_trim(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap();
//! let mi = dsbs.mutual_information(Unit::Bits);
//! assert!((mi.value - 0.531004).abs() < 1e-6);
//! ```
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod common;
pub mod dist;
mod error;
pub mod finfo;
pub mod harness;
pub mod ib;
pub mod linalg;
mod math;
mod optim;
pub mod modal;
pub mod partition;
mod rng;

pub use error::{Error, Result};
