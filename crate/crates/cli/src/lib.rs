//! Report formats for the `rank3` command-line tool, exposed as a library so
//! integration tests can parse what the binary emits.

pub mod report;
