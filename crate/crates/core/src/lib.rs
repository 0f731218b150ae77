//! Numerical spinor, tractor and twistor calculus on Lorentzian metric
//! families: twistor-equation verification, Dirac currents, 2-form tractors,
//! orbit types and zero sets of conformal Killing spinors.

#![allow(clippy::needless_range_loop)]

pub mod campaign;
pub mod clifford;
pub mod curvature;
pub mod error;
pub mod geodesic;
pub mod jet;
pub mod metric;
pub mod par;
pub mod sampling;
pub mod spinor;
pub mod squares;
pub mod tractor;
pub mod zero_set;

pub use error::{Error, Result};
