#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN on purpose

pub mod ccd;
pub mod cli;
pub mod cluster1d;
pub mod density;
pub mod error;
pub mod geom;
pub mod harness;
pub mod huber;
pub mod io;
pub mod linalg;
pub mod loss;
pub mod model;
pub mod plot;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use error::{DesignError, Result};
