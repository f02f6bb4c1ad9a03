//! Visible parts of planar fractal curves.
//!
//! Generates segment approximations of self-similar and random curves,
//! computes the part of a curve visible from a viewpoint by an exact
//! angular sweep, and estimates dimensions of curves and visible parts.

// Input checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fractals;
pub mod geom;
pub mod harness;
pub mod measurelab;
pub mod visibility;

pub use error::{Error, Result};
