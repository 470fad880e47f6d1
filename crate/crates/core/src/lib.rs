#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collisions;
pub mod config;
pub mod dark_state;
pub mod ellipse;
pub mod error;
pub mod fit;
mod linalg;
pub mod params;
pub mod phase;
pub mod retrieval;
pub mod sequence;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
