//! Multi-tweezer moves under the crossed-AOD constraint.
//!
//! An AOD pair selects a set of rows and a set of columns; a trap appears
//! at every selected (row, column) pair and all trapped atoms shift in
//! lockstep. Moves that would grab atoms the schedule does not intend to
//! move have to be split into several moves.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{OccupancyGrid, SiteCoord, TargetRegion};
use crate::scheduler::{LineSegment, MergedMove};
use crate::shift_kernel::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    N,
    S,
    E,
    W,
}

impl Direction {
    /// `(d_row, d_col)` of one step.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::N => (-1, 0),
            Direction::S => (1, 0),
            Direction::E => (0, 1),
            Direction::W => (0, -1),
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            Direction::E | Direction::W => Axis::Rows,
            Direction::N | Direction::S => Axis::Columns,
        }
    }

    /// Site reached after `steps` steps, or `None` when it leaves a
    /// `width x width` grid.
    pub fn step(self, site: SiteCoord, steps: usize, width: usize) -> Option<SiteCoord> {
        let (dr, dc) = self.delta();
        let row = site.row as isize + dr * steps as isize;
        let col = site.col as isize + dc * steps as isize;
        if row < 0 || col < 0 || row >= width as isize || col >= width as isize {
            return None;
        }
        Some(SiteCoord::new(row as usize, col as usize))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Row set x column set shifted together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TweezerMove {
    pub rows: BTreeSet<usize>,
    pub cols: BTreeSet<usize>,
    pub direction: Direction,
    pub steps: usize,
}

impl TweezerMove {
    pub fn new(
        rows: impl IntoIterator<Item = usize>,
        cols: impl IntoIterator<Item = usize>,
        direction: Direction,
        steps: usize,
    ) -> Result<Self> {
        let rows: BTreeSet<usize> = rows.into_iter().collect();
        let cols: BTreeSet<usize> = cols.into_iter().collect();
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::InvalidConfig("tweezer move needs at least one row and one column".into()));
        }
        if steps == 0 {
            return Err(Error::InvalidConfig("tweezer move needs a positive step count".into()));
        }
        Ok(Self {
            rows,
            cols,
            direction,
            steps,
        })
    }

    pub fn trap_count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }
}

/// Every trap generated by a move: the full Cartesian product `R x C`.
pub fn trap_set(mv: &TweezerMove) -> Vec<SiteCoord> {
    mv.rows
        .iter()
        .flat_map(|&r| mv.cols.iter().map(move |&c| SiteCoord::new(r, c)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Collision,
    OutOfBounds,
    UnintendedCapture,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveViolation {
    pub kind: ViolationKind,
    /// Collision: `[source, destination]`; out-of-bounds: the trap;
    /// unintended capture: the captured atom.
    pub sites: Vec<SiteCoord>,
}

impl fmt::Display for MoveViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sites: Vec<String> = self.sites.iter().map(ToString::to_string).collect();
        let kind = match self.kind {
            ViolationKind::Collision => "collision",
            ViolationKind::OutOfBounds => "out-of-bounds",
            ViolationKind::UnintendedCapture => "unintended capture",
        };
        write!(f, "{kind} at {}", sites.join(" -> "))
    }
}

/// Checks that every trapped atom lands on a free (or simultaneously
/// vacated) site inside the grid.
pub fn validate_move(grid: &OccupancyGrid, mv: &TweezerMove) -> Result<(), Vec<MoveViolation>> {
    let width = grid.width();
    let mut violations = Vec::new();
    let trapped = |s: SiteCoord| mv.rows.contains(&s.row) && mv.cols.contains(&s.col);
    for &row in &mv.rows {
        for &col in &mv.cols {
            let trap = SiteCoord::new(row, col);
            let Some(dst) = mv.direction.step(trap, mv.steps, width).filter(|_| grid.contains(trap)) else {
                violations.push(MoveViolation {
                    kind: ViolationKind::OutOfBounds,
                    sites: vec![trap],
                });
                continue;
            };
            if grid.occupied(row, col) && grid.occupied(dst.row, dst.col) && !trapped(dst) {
                violations.push(MoveViolation {
                    kind: ViolationKind::Collision,
                    sites: vec![trap, dst],
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Lifts every trapped atom, then sets them down displaced.
pub fn apply_move(grid: &OccupancyGrid, mv: &TweezerMove) -> Result<OccupancyGrid> {
    let mut out = grid.clone();
    apply_move_in_place(&mut out, mv)?;
    Ok(out)
}

/// [`apply_move`] without the copy; the grid is untouched on error.
pub fn apply_move_in_place(grid: &mut OccupancyGrid, mv: &TweezerMove) -> Result<()> {
    validate_move(grid, mv).map_err(Error::InvalidMove)?;
    apply_validated(grid, mv)
}

fn apply_validated(grid: &mut OccupancyGrid, mv: &TweezerMove) -> Result<()> {
    let width = grid.width();
    let moving: Vec<SiteCoord> = trap_set(mv)
        .into_iter()
        .filter(|s| grid.occupied(s.row, s.col))
        .collect();
    for &s in &moving {
        grid.set(s, false)?;
    }
    for &s in &moving {
        let dst = mv.direction.step(s, mv.steps, width).expect("validated destination");
        grid.set(dst, true)?;
    }
    Ok(())
}

/// A lowered move with the schedule position it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledMove {
    pub iteration: usize,
    pub axis: Axis,
    pub scan_index: usize,
    pub tweezer: TweezerMove,
}

fn sites_of(axis: Axis, seg: &LineSegment) -> impl Iterator<Item = SiteCoord> + '_ {
    (seg.start..=seg.end).map(move |k| match axis {
        Axis::Rows => SiteCoord::new(seg.line, k),
        Axis::Columns => SiteCoord::new(k, seg.line),
    })
}

/// Tweezer move covering exactly the lines of `segments` and the union of
/// their ranges.
fn covering_move(axis: Axis, direction: Direction, segments: &[&LineSegment]) -> Result<TweezerMove> {
    let lines = segments.iter().map(|s| s.line);
    let hi = segments.iter().map(|s| s.end).max().unwrap_or(0);
    let mut covered = vec![false; hi + 1];
    for s in segments {
        covered[s.start..=s.end].fill(true);
    }
    let span = (0..=hi).filter(|&k| covered[k]);
    match axis {
        Axis::Rows => TweezerMove::new(lines, span, direction, 1),
        Axis::Columns => TweezerMove::new(span, lines, direction, 1),
    }
}

fn site_on(axis: Axis, line: usize, k: usize) -> SiteCoord {
    match axis {
        Axis::Rows => SiteCoord::new(line, k),
        Axis::Columns => SiteCoord::new(k, line),
    }
}

fn unintended_atoms(grid: &OccupancyGrid, axis: Axis, segments: &[&LineSegment]) -> Vec<SiteCoord> {
    let lo = segments.iter().map(|s| s.start).min().unwrap_or(0);
    let hi = segments.iter().map(|s| s.end).max().unwrap_or(0);
    let mut out = Vec::new();
    for seg in segments {
        for k in (lo..=hi).filter(|k| !(seg.start..=seg.end).contains(k)) {
            let site = site_on(axis, seg.line, k);
            if grid.occupied(site.row, site.col) {
                out.push(site);
            }
        }
    }
    out
}

/// True when joining `group` to `bin` would put a trap on some atom
/// outside its own segment.
fn captures_unintended(grid: &OccupancyGrid, axis: Axis, bin: &[&LineSegment], group: &[&LineSegment]) -> bool {
    let all = || bin.iter().chain(group);
    let lo = all().map(|s| s.start).min().unwrap_or(0);
    let hi = all().map(|s| s.end).max().unwrap_or(0);
    all().any(|seg| {
        (lo..seg.start).chain(seg.end + 1..=hi).any(|k| {
            let site = site_on(axis, seg.line, k);
            grid.occupied(site.row, site.col)
        })
    })
}

fn group_segments<'a>(grid: &OccupancyGrid, mm: &'a MergedMove) -> Vec<Vec<&'a LineSegment>> {
    let mut by_range: BTreeMap<(usize, usize), Vec<&LineSegment>> = BTreeMap::new();
    for seg in &mm.lines {
        by_range.entry((seg.start, seg.end)).or_default().push(seg);
    }
    let mut bins: Vec<Vec<&LineSegment>> = Vec::new();
    for group in by_range.into_values() {
        match bins
            .iter_mut()
            .find(|bin| !captures_unintended(grid, mm.axis, bin, &group))
        {
            Some(bin) => bin.extend(group),
            None => bins.push(group),
        }
    }
    bins
}

pub fn lower(merged: &[MergedMove], grid: &OccupancyGrid) -> Result<Vec<ScheduledMove>> {
    let mut state = grid.clone();
    let mut out = Vec::new();
    for (index, mm) in merged.iter().enumerate() {
        if mm.direction.axis() != mm.axis {
            return Err(Error::Contract(format!(
                "merged move {index} has direction {} on axis {}",
                mm.direction, mm.axis
            )));
        }
        for bin in group_segments(&state, mm) {
            let mv = covering_move(mm.axis, mm.direction, &bin)?;
            let (checked, parts) = match validate_move(&state, &mv) {
                Ok(()) => (true, vec![mv]),
                Err(_) => (false, bin
                    .iter()
                    .map(|seg| covering_move(mm.axis, mm.direction, &[seg]))
                    .collect::<Result<Vec<_>>>()?),
            };
            for part in parts {
                if !checked {
                    if let Err(violations) = validate_move(&state, &part) {
                        return Err(Error::Lowering { index, violations });
                    }
                }
                apply_validated(&mut state, &part)?;
                out.push(ScheduledMove {
                    iteration: mm.iteration,
                    axis: mm.axis,
                    scan_index: mm.scan_index,
                    tweezer: part,
                });
            }
        }
    }
    Ok(out)
}

/// Reports unintended captures for a candidate grouping of a merged move.
/// Used for diagnostics; [`lower`] never emits such a move.
pub fn capture_report(grid: &OccupancyGrid, mm: &MergedMove) -> Vec<MoveViolation> {
    let all: Vec<&LineSegment> = mm.lines.iter().collect();
    unintended_atoms(grid, mm.axis, &all)
        .into_iter()
        .map(|site| MoveViolation {
            kind: ViolationKind::UnintendedCapture,
            sites: vec![site],
        })
        .collect()
}

/// Sites of a merged move, for callers that need the intended atom set.
pub fn merged_sites(mm: &MergedMove) -> Vec<SiteCoord> {
    mm.lines.iter().flat_map(|s| sites_of(mm.axis, s)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimReport {
    pub final_grid: OccupancyGrid,
    pub moves_executed: usize,
    /// Target popcount before the first move and after each move; empty
    /// when no target was given.
    pub target_history: Vec<usize>,
}

impl SimReport {
    /// Always empty; a violating move aborts with [`SimAbort`] instead.
    pub fn violations(&self) -> &[MoveViolation] {
        &[]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("simulation aborted at move {move_index}: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct SimAbort {
    pub move_index: usize,
    pub violations: Vec<MoveViolation>,
    /// Grid just before the offending move.
    pub grid: OccupancyGrid,
}

/// Executes moves in order, validating each one first.
pub fn simulate(
    grid: &OccupancyGrid,
    moves: &[TweezerMove],
    target: Option<&TargetRegion>,
) -> Result<SimReport, Box<SimAbort>> {
    let mut state = grid.clone();
    let mut history = Vec::new();
    if let Some(t) = target {
        history.push(state.target_popcount(t));
    }
    for (move_index, mv) in moves.iter().enumerate() {
        if let Err(violations) = validate_move(&state, mv) {
            return Err(Box::new(SimAbort {
                move_index,
                violations,
                grid: state,
            }));
        }
        apply_move_in_place(&mut state, mv).expect("validated move");
        if let Some(t) = target {
            history.push(state.target_popcount(t));
        }
    }
    Ok(SimReport {
        final_grid: state,
        moves_executed: moves.len(),
        target_history: history,
    })
}
