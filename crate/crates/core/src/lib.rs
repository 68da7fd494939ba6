//! Numerical simulator and benchmark harness for next-generation reservoir
//! computing on a passive star-coupler photonic chip.
//!
//! The pipeline is: lag-embed a series ([`ngrc`]), drive the simulated chip
//! ([`photonic`]), train a linear or logistic readout on the photodiode
//! outputs ([`readout`]), and score it on the forecasting and image
//! benchmarks ([`tasks`]).

pub mod config;
pub mod density;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod ngrc;
pub mod rankcheck;
pub mod photonic;
pub mod readout;
pub mod series;
pub mod tasks;
pub mod textfmt;

pub use error::{Error, ErrorKind, Result};
