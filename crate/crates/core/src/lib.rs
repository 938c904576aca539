//! Lie–Hamilton systems on the nine two-dimensional Cayley–Klein spaces.
//!
//! The crate is organized bottom-up: [`ktrig`] is the κ-trigonometry kernel,
//! [`geometry`] and [`conformal`] model the spaces and their conformal
//! algebras, [`symplectic`] carries the generic Hamiltonian machinery, and
//! [`class_i4`], [`class_p2`] and [`applications`] implement the concrete
//! systems. [`dynamics`] integrates them and [`verify`] drives the checks.

pub mod applications;
pub mod class_i4;
pub mod class_p2;
pub mod cli;
pub mod conformal;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod ktrig;
pub mod symplectic;
pub mod tables;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{Point, TangentVector};
pub use ktrig::KappaSignature;
