//! Models and optimal dispatch for a hybrid wind/solar plant with battery,
//! sensible thermal and hydrogen storage.
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function of
//! its inputs; file formats, configuration and the command line live in the
//! `hybrid-plant` companion crate.
//!
//! * [`weather`]: wind speed and cloud cover stochastic differential equations.
//! * [`solar`]: sun position, direct/diffuse/global radiation and PV power.
//! * [`turbine`]: power coefficient surface and stationary turbine optimum.
//! * [`storage`]: battery and thermal storage energy balances.
//! * [`hydrogen`]: electrolysis, hydrogen tank and fuel cell.
//! * [`nlp`]: sparse interior-point solver for equality and bound constrained programs.
//! * [`ocp`]: economic dispatch problem, its transcription and open-loop replay.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod hydrogen;
pub mod nlp;
pub mod ocp;
pub mod rng;
pub mod solar;
pub mod storage;
pub mod turbine;
pub mod weather;

pub use error::{Error, Result};

/// Seconds per hour.
pub const SECONDS_PER_HOUR: f64 = 3600.0;
/// Joules per megawatt-hour.
pub const J_PER_MWH: f64 = 3.6e9;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(name))
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<f64> {
    ensure_finite(name, value)?;
    if value < 0.0 {
        return Err(Error::OutOfDomain {
            name,
            value,
            domain: "[0, inf)",
        });
    }
    Ok(value)
}
