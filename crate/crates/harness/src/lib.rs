//! Workload generation, replay, verification and reporting for the
//! `cfcolor` structures.

pub mod bench;
pub mod cli;
pub mod error;
pub mod report;
pub mod run;
pub mod structure;
pub mod workload;

pub use error::{HarnessError, Result};
pub use run::{run, run_with, VerifyMode};
pub use structure::{Structure, StructureKind, StructureParams};
