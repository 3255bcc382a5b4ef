//! Numerical toolkit for continuous one-parameter semigroups of holomorphic
//! self-maps of the unit disc.
//!
//! The library works with a semigroup through its canonical model: a planar
//! domain (starlike at infinity or spirallike), a group action on it
//! (`w + it` or `e^{-mu t} w`), and a Koenigs map conjugating the semigroup
//! to that action. On top of this it provides
//!
//! * hyperbolic distances in the disc and in canonical domains ([`hypgeo`]),
//! * comb/spirallike domain geometry: maximal strips, half-planes and
//!   spirallike sectors, vertical-line and spiral status ([`domains`]),
//! * evaluatable conformal maps, both a closed-form catalog and a numeric
//!   Riemann-map fitter for comb domains ([`confmap`], [`zipper`]),
//! * orbit evolution, backward-invariant sets, petals and pre-models
//!   ([`semigroup`]),
//! * divergence/repelling rate estimators and boundary fixed-point
//!   classification ([`analysis`]),
//! * the comb-domain sequence whose pre-model is not regular at its
//!   repelling point ([`nonregular`]).
//!
//! Sampling-heavy operations run in parallel through rayon when the
//! `parallel` feature (default) is enabled; disabling it falls back to
//! sequential loops with identical results.

pub mod analysis;
pub mod confmap;
pub mod domains;
pub mod error;
pub mod hypgeo;
pub mod nonregular;
pub mod par;
pub mod schema;
pub mod semigroup;
pub mod zipper;

pub use error::{Error, Result};
pub use num_complex::Complex64;
