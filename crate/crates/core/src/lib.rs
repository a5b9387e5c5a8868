//! Equivariant BV calculus on low-dimensional manifolds and numerical
//! verification of localization formulas.
//!
//! Fields are described by Taylor jets ([`jet::Jet`]) on coordinate charts,
//! so every differential operator is exact up to floating point. Integrals
//! are computed with tensor Gauss–Legendre quadrature and compared with
//! fixed-point and fixed-locus formulas in [`localization`].

pub mod bv;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod exterior;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod localization;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
