//! Multi-frequency Gaussian group synchronization.
//!
//! The crate covers the full pipeline at desk scale:
//!
//! * [`group`]: finite groups, unitary irreducible representations, the
//!   Frobenius–Schur classification and the Peter–Weyl block decomposition of
//!   the regular representation.
//! * [`ensembles`]: GOE / GUE / GSE noise matrices.
//! * [`models`]: samplers for the circle, cyclic and finite-group
//!   synchronization models and the noisy-indicator transform.
//! * [`ldlr`]: the second moment of the low-degree likelihood ratio by four
//!   independent routes, plus numerical checks of the moment bounds used to
//!   control it.
//! * [`detect`]: the spectral (top eigenvalue) detector with null-calibrated
//!   thresholds.
//!
//! Everything is `no_std` + `alloc`; all randomness is driven by explicit
//! 64-bit seeds (see [`rng`]).

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod detect;
pub mod ensembles;
pub mod error;
pub mod group;
pub mod ldlr;
pub mod linalg;
pub mod models;
pub mod numeric;
pub mod rng;

pub use nalgebra;

pub use error::{Error, Result};
pub use linalg::{Matrix, C64};
