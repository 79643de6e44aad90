//! Gradient-corrected Lieb-Oxford bounds: screened-kernel constants, the
//! screened maximal function, density functionals and bound evaluation, and
//! classical Jellium lattice energies.

// `!(x > 0.0)` guards reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod density;
pub mod error;
pub mod functionals;
pub mod jellium;
pub mod kernel;
pub mod maximal;
pub mod optimize;
pub mod quadrature;
pub mod reduce;
pub mod special;

pub use error::{Error, Result};
