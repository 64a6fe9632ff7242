//! Command implementations behind the `wugaug` binary.

pub mod commands;
pub mod io;
pub mod pipeline;
pub mod report;
