//! File formats, JSON reports and the lemma verification harness for
//! `km-core`. The `km` binary is a thin layer over this library.

pub mod envelope;
pub mod io;
pub mod report;
pub mod verify;
