//! Software model of the pipelined shift kernel.
//!
//! A line (row or column of a flipped quadrant) is a bit vector whose index
//! 0 sits next to the array center. The kernel scans the line from index 0
//! outward, copies every bit into the column buffers (the row-to-column
//! transpose) and records a shift command wherever it sees a hole.
//!
//! Executing a command removes the hole: every site beyond it moves one
//! step toward index 0. Commands are applied in ascending scan order, so
//! the command scanned at index `i` acts at position `i - k`, where `k` is
//! the number of lower-index commands already executed on that line.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::LocalQuadrant;

/// Fixed-length bit vector, index 0 nearest the array center.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitLine(Vec<bool>);

pub type RowBits = BitLine;
pub type ShiftCommandVector = BitLine;
pub type ShiftEnableMask = BitLine;

impl BitLine {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![true; len])
    }

    /// Builds a line from the low `len` bits of `word`, bit 0 first.
    pub fn from_word(word: u64, len: usize) -> Self {
        Self((0..len).map(|i| (word >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.0.iter().any(|&b| b)
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    fn check_len(&self, other: &BitLine) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for BitLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

impl From<Vec<bool>> for BitLine {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl<const N: usize> From<[u8; N]> for BitLine {
    fn from(bits: [u8; N]) -> Self {
        Self(bits.iter().map(|&b| b != 0).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Columns,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Rows => "rows",
            Axis::Columns => "columns",
        })
    }
}

/// How the `s_en` mask is set for every line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftEnablePolicy {
    /// Every index may emit a command; lines pack fully toward the center.
    #[default]
    Full,
    /// Indices `>= k` never emit commands.
    ColumnLimit(usize),
}

impl ShiftEnablePolicy {
    pub fn mask(self, len: usize) -> ShiftEnableMask {
        match self {
            ShiftEnablePolicy::Full => BitLine::ones(len),
            ShiftEnablePolicy::ColumnLimit(k) => BitLine((0..len).map(|i| i < k).collect()),
        }
    }
}

impl fmt::Display for ShiftEnablePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftEnablePolicy::Full => f.write_str("full"),
            ShiftEnablePolicy::ColumnLimit(k) => write!(f, "limit:{k}"),
        }
    }
}

impl std::str::FromStr for ShiftEnablePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(ShiftEnablePolicy::Full);
        }
        s.strip_prefix("limit:")
            .and_then(|k| k.parse().ok())
            .map(ShiftEnablePolicy::ColumnLimit)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown s_en policy {s:?}")))
    }
}

/// One pass of the scan stage over a line.
///
/// Returns the command vector (`!line & s_en`) and the emitted bits that go
/// to the column buffers, which are the line's original values.
pub fn scan_line(line: &RowBits, s_en: &ShiftEnableMask) -> Result<(ShiftCommandVector, RowBits)> {
    line.check_len(s_en)?;
    let cmds = line
        .0
        .iter()
        .zip(&s_en.0)
        .map(|(&bit, &en)| !bit && en)
        .collect();
    Ok((BitLine(cmds), line.clone()))
}

/// Applies a command vector to a line in ascending scan order.
pub fn execute_commands(line: &RowBits, cmds: &ShiftCommandVector) -> Result<RowBits> {
    line.check_len(cmds)?;
    let mut out = line.0.clone();
    for (executed, scan) in cmds.ones_iter().enumerate() {
        out.remove(scan - executed);
        out.push(false);
    }
    Ok(BitLine(out))
}

/// How one command plays out when its line is executed in scan order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedShift {
    /// Index at which the hole was scanned.
    pub scan_index: usize,
    /// Position of that hole when the command runs.
    pub position: usize,
    /// Atoms in `position + 1 ..` at that moment; zero marks an empty shift.
    pub atoms_moved: usize,
}

impl ResolvedShift {
    pub fn is_empty_shift(&self) -> bool {
        self.atoms_moved == 0
    }
}

/// Resolves every command of `cmds` against `line` without mutating it.
pub fn resolve_commands(line: &RowBits, cmds: &ShiftCommandVector) -> Result<Vec<ResolvedShift>> {
    line.check_len(cmds)?;
    // atoms strictly beyond each original index
    let mut beyond = vec![0usize; line.len()];
    let mut acc = 0;
    for i in (0..line.len()).rev() {
        beyond[i] = acc;
        acc += usize::from(line.get(i));
    }
    Ok(cmds
        .ones_iter()
        .enumerate()
        .map(|(executed, scan)| ResolvedShift {
            scan_index: scan,
            position: scan - executed,
            atoms_moved: beyond[scan],
        })
        .collect())
}

/// Column buffers filled one bit per processed line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransposeBuffer {
    columns: Vec<BitLine>,
}

impl TransposeBuffer {
    pub fn new(width: usize) -> Self {
        Self {
            columns: vec![BitLine::default(); width],
        }
    }

    pub fn push_line(&mut self, emitted: &RowBits) -> Result<()> {
        if emitted.len() != self.columns.len() {
            return Err(Error::LengthMismatch {
                expected: self.columns.len(),
                actual: emitted.len(),
            });
        }
        for (column, &bit) in self.columns.iter_mut().zip(&emitted.0) {
            column.0.push(bit);
        }
        Ok(())
    }

    /// Buffer `j`; slot `r` holds bit `j` of line `r`.
    pub fn column(&self, j: usize) -> &BitLine {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[BitLine] {
        &self.columns
    }

    pub fn lines_seen(&self) -> usize {
        self.columns.first().map_or(0, BitLine::len)
    }
}

/// Output of [`compress_pass`].
#[derive(Debug, Clone)]
pub struct PassOutput {
    /// Raw command vector per line, empty shifts included.
    pub commands: Vec<ShiftCommandVector>,
    /// Lines as they were scanned, before execution.
    pub scanned: Vec<RowBits>,
    pub quadrant: LocalQuadrant,
    pub transpose: TransposeBuffer,
}

/// Line `index` of a quadrant along `axis`: local row `index` for rows,
/// local column `index` for columns.
pub fn quadrant_line(quadrant: &LocalQuadrant, axis: Axis, index: usize) -> RowBits {
    let side = quadrant.side();
    BitLine(
        (0..side)
            .map(|k| match axis {
                Axis::Rows => quadrant.get(index, k),
                Axis::Columns => quadrant.get(k, index),
            })
            .collect(),
    )
}

/// Scans and executes every line of a quadrant along one axis.
pub fn compress_pass(
    quadrant: &LocalQuadrant,
    axis: Axis,
    s_en: &ShiftEnableMask,
) -> Result<PassOutput> {
    let side = quadrant.side();
    if s_en.len() != side {
        return Err(Error::LengthMismatch {
            expected: side,
            actual: s_en.len(),
        });
    }
    let mut out = quadrant.clone();
    let mut transpose = TransposeBuffer::new(side);
    let mut commands = Vec::with_capacity(side);
    let mut scanned = Vec::with_capacity(side);
    for index in 0..side {
        let line = quadrant_line(quadrant, axis, index);
        let (cmds, emitted) = scan_line(&line, s_en)?;
        transpose.push_line(&emitted)?;
        let packed = execute_commands(&line, &cmds)?;
        for (k, &bit) in packed.0.iter().enumerate() {
            match axis {
                Axis::Rows => out.set(index, k, bit),
                Axis::Columns => out.set(k, index, bit),
            }
        }
        commands.push(cmds);
        scanned.push(line);
    }
    Ok(PassOutput {
        commands,
        scanned,
        quadrant: out,
        transpose,
    })
}

/// Cycle counts of the kernel pipeline: one new line per cycle, `depth`
/// cycles for a single line to drain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineTiming {
    pub quadrant_width: u64,
    pub depth: u64,
}

impl PipelineTiming {
    pub fn new(quadrant_width: u64, depth: u64) -> Result<Self> {
        if quadrant_width == 0 || depth == 0 {
            return Err(Error::InvalidConfig(format!(
                "pipeline timing needs positive inputs, got Q_w={quadrant_width}, D={depth}"
            )));
        }
        Ok(Self {
            quadrant_width,
            depth,
        })
    }

    /// Depth equal to the line length: the scan inspects one bit per cycle.
    pub fn with_default_depth(quadrant_width: u64) -> Result<Self> {
        Self::new(quadrant_width, quadrant_width)
    }

    pub fn pass_latency(&self) -> u64 {
        self.quadrant_width + self.depth
    }

    /// Row pass then column pass, overlapped in the pipeline.
    pub fn iteration_latency(&self) -> u64 {
        2 * self.quadrant_width + self.depth
    }
}

pub fn pass_latency(quadrant_width: u64, depth: u64) -> Result<u64> {
    Ok(PipelineTiming::new(quadrant_width, depth)?.pass_latency())
}

pub fn iteration_latency(quadrant_width: u64, depth: u64) -> Result<u64> {
    Ok(PipelineTiming::new(quadrant_width, depth)?.iteration_latency())
}
