//! IO, run logging, checkpointing, the worker pool, and the command-line
//! surface for the body-plan evolution engine. The algorithmic core lives
//! in `morphevo-core`; this crate owns everything that touches the
//! filesystem, clock, or threads.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod runlog;
pub mod runner;
