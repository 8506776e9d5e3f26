//! File formats, a seeded synthetic-corpus generator and the `actseg`
//! command line on top of `actseg-core`.

pub mod commands;
pub mod formats;
pub mod model_dir;
pub mod parallel;
pub mod synth;

pub use commands::{run, Cli};
pub use parallel::Threads;
