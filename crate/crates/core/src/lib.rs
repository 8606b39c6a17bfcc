//! Simulation, estimation, and control stack for modular multirotor
//! vehicles built from flight modules attached to a rigid payload.
//!
//! - [`geom`]: vectors, rotations, small least-squares solves
//! - [`vehicle`]: module/payload descriptions, ground-truth assembly, presets
//! - [`plant`]: full rigid-body dynamics with saturation and disturbances
//! - [`imu`]: synthetic multi-IMU measurements, excitation motions, filtering
//! - [`estimation`]: IMU-based configuration estimation pipeline
//! - [`controller`]: adaptive geometric flight controller and trimming
//! - [`trajectory`]: setpoint generation with consistent derivatives
//! - [`harness`]: scenario orchestration, metrics, and reports

// negated float comparisons are deliberate: they reject NaN inputs
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops over parallel per-module arrays read better than zip chains here
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod geom;
pub mod vehicle;
pub mod plant;
pub mod imu;
pub mod estimation;
pub mod controller;
pub mod trajectory;
pub mod harness;
pub mod cli;

pub use cli::run_cli;
pub use error::{Error, Result};

/// Standard gravity, m/s^2.
pub const GRAVITY: f64 = 9.81;
