//! Command-line front end for the cheesemap index: timing sweeps, oracle
//! verification and dataset reports.

pub mod bench;
pub mod error;
pub mod input;
pub mod report;
pub mod structure;
pub mod verify;
