// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baseline;
pub mod ddc;
pub mod edgefind;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod sigmodel;

pub use error::{Error, Result};
