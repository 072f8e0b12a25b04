//! Quadrant-based rearrangement (QRM) of neutral-atom tweezer arrays.
//!
//! A stochastically loaded `W x W` trap array is split into four
//! quadrants, each flipped so that the array center sits at its local
//! origin. A shift kernel compresses every quadrant row-wise and then
//! column-wise toward that corner; the per-quadrant commands are mapped
//! back to global coordinates, merged across quadrants that share a
//! direction and lowered to crossed-AOD tweezer moves.
//!
//! Module map:
//! - [`grid`]: occupancy bitmaps, loading, target region, quadrant algebra
//! - [`shift_kernel`]: line scan, command execution, transpose buffers
//! - [`scheduler`]: QRM and baseline schedules, merging, atom traces
//! - [`aod`]: tweezer moves, validation, lowering, simulation
//! - [`latency`]: cycle-count model of the hardware pipeline
//! - [`cli`]: packet codec, schedule files, bench harness, commands

pub mod aod;
pub mod cli;
pub mod error;
pub mod grid;
pub mod latency;
pub mod rng;
pub mod scheduler;
pub mod shift_kernel;

pub use error::{Error, Result};
