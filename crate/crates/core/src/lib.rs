//! Deterministic agent-based macroeconomic simulator.
//!
//! Households, firms, a central bank and a government interact through a
//! message-passing quarterly kernel. The crate also ships the environment
//! server for remote learners, a stylized-facts toolkit and calibration
//! helpers.

pub mod calibration;
pub mod cli;
pub mod config;
pub mod grid;
pub mod model;
pub mod policy;
pub mod rng;
pub mod kernel;
pub mod env;
pub mod facts;
