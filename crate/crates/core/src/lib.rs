//! Strapdown INS static and tumbling alignment workbench.
//!
//! Simulates IMU streams for static and rotating alignment scenarios, runs the
//! constructive ideal observers and an error-state Kalman filter, and checks
//! the resulting bias and attitude solutions against ground truth.

pub mod attitude;
pub mod config;
pub mod earth;
pub mod ekf;
pub mod imu;
pub mod observers;
pub mod runner;
pub mod scenario;
pub mod shipped;
pub mod strapdown;
