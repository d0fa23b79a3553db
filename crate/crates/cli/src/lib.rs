//! File formats, HTTP inference, and corpus synthesis around
//! `speechcue-core`. The `speechcue` binary wires these into subcommands.

pub mod formats;
pub mod gencorpus;
pub mod inference;
pub mod stages;
pub mod wavio;
