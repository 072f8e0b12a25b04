//! Indicative cycle counts for the load / shift / output pipeline.
//!
//! The compute part follows the kernel timing: `2 * Q_w + D` cycles per
//! row+column iteration. Input is streamed in 1024-bit packets, one per
//! cycle, and every schedule record costs a fixed number of output cycles.
//! Measured hardware numbers (about 1 µs for a 50x50 array) sit below the
//! formula's 300 cycles at 250 MHz; nothing here is tuned to close that gap.

use crate::error::{Error, Result};
use crate::shift_kernel::PipelineTiming;

pub const PACKET_BITS: u64 = 1024;
pub const DEFAULT_CLOCK_HZ: f64 = 250.0e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyModel {
    pub clock_hz: f64,
    /// Per-line pipeline depth; `None` means `Q_w`.
    pub depth: Option<u64>,
    pub include_io: bool,
    pub cycles_per_record: u64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self {
            clock_hz: DEFAULT_CLOCK_HZ,
            depth: None,
            include_io: false,
            cycles_per_record: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleEstimate {
    pub input_packets: u64,
    pub input_cycles: u64,
    pub compute_cycles: u64,
    pub output_cycles: u64,
    pub total_cycles: u64,
    pub wall_time_s: f64,
}

impl CycleEstimate {
    pub fn wall_time_us(&self) -> f64 {
        self.wall_time_s * 1e6
    }
}

pub fn packet_count(width: usize) -> u64 {
    let bits = (width * width) as u64;
    bits.div_ceil(PACKET_BITS)
}

/// Upper bound on merged-move records: two sides per axis, two axes, one
/// slot per scan index.
pub fn record_estimate(width: usize, iterations: usize) -> u64 {
    (iterations as u64) * 2 * 2 * (width as u64 / 2)
}

pub fn estimate(width: usize, iterations: usize, model: &LatencyModel) -> Result<CycleEstimate> {
    estimate_with_records(width, iterations, record_estimate(width, iterations), model)
}

/// Same as [`estimate`] with an actual record count, e.g. the merged move
/// count of a computed schedule.
pub fn estimate_with_records(
    width: usize,
    iterations: usize,
    records: u64,
    model: &LatencyModel,
) -> Result<CycleEstimate> {
    if width == 0 || !width.is_multiple_of(2) {
        return Err(Error::InvalidDimension(width));
    }
    if iterations == 0 {
        return Err(Error::InvalidConfig("latency estimate needs at least one iteration".into()));
    }
    if !(model.clock_hz.is_finite() && model.clock_hz > 0.0) {
        return Err(Error::InvalidConfig(format!("clock {} Hz must be positive", model.clock_hz)));
    }
    let q_w = (width / 2) as u64;
    let timing = PipelineTiming::new(q_w, model.depth.unwrap_or(q_w))?;
    let input_packets = packet_count(width);
    let compute_cycles = iterations as u64 * timing.iteration_latency();
    let (input_cycles, output_cycles) = if model.include_io {
        (input_packets, input_packets + records * model.cycles_per_record)
    } else {
        (0, 0)
    };
    let total_cycles = input_cycles + compute_cycles + output_cycles;
    Ok(CycleEstimate {
        input_packets,
        input_cycles,
        compute_cycles,
        output_cycles,
        total_cycles,
        wall_time_s: total_cycles as f64 / model.clock_hz,
    })
}
