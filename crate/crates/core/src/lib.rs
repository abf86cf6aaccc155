#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analytics;
pub mod digest;
pub mod evolution;
pub mod geometry;
pub mod metrics;
pub mod morphology;
pub mod mutation;
pub mod rng;
pub mod stats;
pub mod terrain;
