//! Manifest-driven front end for the geoquant engine.
//!
//! A manifest is a JSON document describing one chart, its metric (and
//! optionally an explicit connection), named fields and a list of tasks.
//! Running it yields a JSON report; see the README for the schema.

pub mod manifest;
pub mod report;
pub mod tasks;

pub use manifest::{load, validate, Diagnostic, Manifest};
pub use tasks::{run, strip_timings, RunOutput, Status};

/// Exit code for a manifest that fails to parse or validate.
pub const EXIT_VALIDATION: i32 = 2;
