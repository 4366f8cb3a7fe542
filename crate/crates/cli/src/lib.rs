//! Command-line front end for `cantor-dioph-core`: value parsing, deterministic
//! reports, and the acceptance suites.

pub mod cli;
pub mod input;
pub mod report;
pub mod suites;
