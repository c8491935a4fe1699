//! Benchmark drivers and their post-processing.

pub mod diagnostics;
pub mod reference;
pub mod settling;
pub mod stokes;
