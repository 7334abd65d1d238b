#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod kyp;
pub mod normalization;
pub mod passify;
pub mod radius;
pub mod riccati;
pub mod system;
pub mod xi;

pub use error::{Error, Result};
