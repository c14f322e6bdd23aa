//! Machinery for Favard-length experiments on the four-corner Cantor sets.
//!
//! The library builds the finite iterates of the middle-half four-corner
//! Cantor construction, projects them onto lines, bends them with noodle
//! shears, and measures how much shadow survives: Favard averages, Buffon
//! needle probabilities for circles and noodles, scale-indexed pair
//! statistics, and angular overlap integrals between squares.  The
//! `harness` module ties the pieces into an end-to-end report and a CLI.
//!
//! Everything downstream of a seed is deterministic: random streams are
//! counter-based (one generator per sample index) and parallel reductions
//! run in a fixed tree order, so reports are bit-for-bit reproducible no
//! matter how many worker threads are active.

// validation guards use `!(x > bound)` so NaN is rejected, not accepted
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cantor;
pub mod cli;
pub mod error;
pub mod favard;
pub mod harness;
pub mod noodle;
pub mod numeric;
pub mod pairs;
pub mod projection;
pub mod rho;
pub mod rng;

pub use error::{Error, Result};

/// A point in the plane.  Plain tuples keep call sites light.
pub type Point = (f64, f64);
