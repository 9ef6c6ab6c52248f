//! Coupled epidemic-economy co-simulation engine.
//!
//! Three submodels exchange information daily: a spatial, age-stratified
//! SEIQRD transmission model ([`epi`]), a production-network economy driven
//! by input-output tables ([`econ`]), and a collective-memory behavioral
//! feedback turning the history of hospital loads into contact and
//! consumption reductions ([`memory`]). The [`coupler`] orchestrates a
//! simulated day across the three, [`datahub`] ingests and validates the
//! static country data, and [`calibrate`] fits the free parameters with a
//! simplex optimizer and an affine-invariant ensemble sampler.

// Index loops mirror the subscript conventions of the model equations.
#![allow(clippy::needless_range_loop)]

pub mod calibrate;
pub mod coupler;
pub mod datahub;
pub mod date;
pub mod econ;
pub mod epi;
pub mod error;
pub mod math;
pub mod memory;
pub mod output;
pub mod testkit;

pub use error::{Error, Result};
