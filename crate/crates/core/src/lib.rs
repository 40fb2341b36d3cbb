//! Spherical-harmonics room simulation and binaural rendering with
//! independent orders for the direct and reverberant sound-field parts.

pub mod audio;
mod container;
pub mod eq;
pub mod error;
mod fft;
pub mod hrtf;
pub mod render;
pub mod rng;
pub mod room;
pub mod sh;

pub use error::{Error, Result};

/// Default sample rate in Hz.
pub const DEFAULT_SAMPLE_RATE: u32 = 48_000;
