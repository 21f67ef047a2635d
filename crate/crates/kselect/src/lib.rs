//! File formats, report tables and the command-line front end for
//! [`kselect_core`].

pub mod cli;
pub mod documents;
pub mod records;
pub mod reference;
pub mod report;

pub use kselect_core as core;
