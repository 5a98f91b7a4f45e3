//! Talbot self-imaging in PT-symmetric complex crystals.
//!
//! The crate covers the whole pipeline: gapless complex potentials and their
//! Fourier data ([`potential`]), supersymmetric synthesis of crystals with
//! prescribed spectral singularities ([`susy`]), Bloch bands and
//! singularity classification ([`bands`]), exact mode-space propagation with
//! Talbot diagnostics ([`propagation`]) and the mapping onto a fiber-loop
//! emulator ([`fiber`]).
//!
//! Validity checks are written as `!(x > 0.0)` so that NaN is rejected too.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod error;
pub mod fiber;
pub mod grid;
pub mod linalg;
pub mod potential;
pub mod propagation;
pub mod susy;

pub use error::{Error, Result};
pub use grid::{Grid, SampledFunction, Tilt, Wavefield, C64};
pub use potential::{ComplexPotential, PotentialForm};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/crystals.md")]
    mod crystals {}
    #[doc = include_str!("../../../book/src/bands.md")]
    mod bands {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/fiber.md")]
    mod fiber {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
}
