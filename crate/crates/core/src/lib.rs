//! Information and reliability measures of past lifetimes.
//!
//! The crate computes past entropy and past varentropy, reversed hazard
//! rates, inactivity-time moments and their residual counterparts for
//! parametric lifetime laws and for distributions derived from them by
//! affine maps, strictly monotonic maps and proportional reversed hazards
//! powers. [`properties`] turns the known identities and bounds between these
//! quantities into executable checks, and [`mc`] provides an independent
//! Monte Carlo oracle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dist;
pub mod error;
pub mod mc;
pub mod measures;
pub mod par;
pub mod properties;
pub mod quadrature;

pub use dist::{Distribution, DistRef, Support, Upper};
pub use error::{Error, Result};
pub use measures::{MeasureConfig, MeasureValue, Method, PastContext};
pub use par::Execution;
pub use quadrature::{QuadratureConfig, QuadratureResult};
