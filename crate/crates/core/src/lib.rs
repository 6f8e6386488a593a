#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod connection;
pub mod cs_confluence;
pub mod dd;
pub mod domain;
pub mod dual_ops;
pub mod error;
pub mod gamma;
pub mod hc_series;
pub mod scalar;
pub mod summation;
pub mod univariate;

pub use dd::Dd;
pub use error::{Error, Result};
pub use scalar::{Cx, Real};
