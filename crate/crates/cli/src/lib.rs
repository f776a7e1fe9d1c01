//! Spec files, the metric catalog, reports and the `confein` command line.

pub mod analyze;
pub mod catalog;
pub mod commands;
pub mod json;
pub mod spec;
