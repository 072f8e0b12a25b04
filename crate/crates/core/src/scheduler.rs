//! Rearrangement schedules.
//!
//! [`qrm_schedule`] runs the shift kernel on the four flipped quadrants,
//! rows first and then columns, and turns the per-quadrant commands back
//! into global moves. Commands from quadrants on the same side of the
//! array share a direction and are merged: NW+SW shift east, NE+SE shift
//! west, NW+NE shift south and SW+SE shift north.
//!
//! [`baseline_schedule`] is the classic center-column-first procedure on
//! the whole array, kept for comparison.

use std::collections::BTreeMap;

use crate::aod::{apply_move_in_place, Direction, TweezerMove};
use crate::error::{Error, Result};
use crate::grid::{merge_quadrants, split_quadrants, LocalQuadrant, OccupancyGrid, QuadrantId, SiteCoord, TargetRegion};
use crate::shift_kernel::{compress_pass, resolve_commands, Axis, ShiftEnablePolicy};

/// One shift command of one quadrant line, in local coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadrantCommand {
    pub quadrant: QuadrantId,
    pub iteration: usize,
    pub axis: Axis,
    pub line: usize,
    pub scan_index: usize,
    /// Local range `start..=end` that moves one step toward index 0.
    pub segment: (usize, usize),
    /// Atoms inside the segment when the command runs.
    pub atoms: usize,
}

/// Global range `start..=end` along one line (a row for horizontal moves,
/// a column for vertical ones).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineSegment {
    pub line: usize,
    pub start: usize,
    pub end: usize,
}

/// Commands of one side of the array that run together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedMove {
    pub iteration: usize,
    pub axis: Axis,
    pub scan_index: usize,
    pub direction: Direction,
    pub lines: Vec<LineSegment>,
}

impl MergedMove {
    /// One single-line tweezer move per participating line.
    pub fn line_moves(&self) -> Result<Vec<TweezerMove>> {
        self.lines
            .iter()
            .map(|seg| match self.axis {
                Axis::Rows => TweezerMove::new([seg.line], seg.start..=seg.end, self.direction, 1),
                Axis::Columns => TweezerMove::new(seg.start..=seg.end, [seg.line], self.direction, 1),
            })
            .collect()
    }

    /// True when every segment sits on the side its direction points away
    /// from, i.e. the move heads toward the array center.
    pub fn points_to_center(&self, width: usize) -> bool {
        let half = width / 2;
        self.lines.iter().all(|seg| match self.direction {
            Direction::E => seg.end < half,
            Direction::W => seg.start >= half,
            Direction::S => seg.end < half,
            Direction::N => seg.start >= half,
        })
    }
}

/// Executes every line of a merged move; lines are disjoint, so order does
/// not matter.
pub fn apply_merged(grid: &OccupancyGrid, mm: &MergedMove) -> Result<OccupancyGrid> {
    let mut state = grid.clone();
    for mv in mm.line_moves()? {
        apply_move_in_place(&mut state, &mv)?;
    }
    Ok(state)
}

/// Direction in which a quadrant compresses along an axis.
pub fn inward_direction(quadrant: QuadrantId, axis: Axis) -> Direction {
    match (axis, quadrant.is_west(), quadrant.is_north()) {
        (Axis::Rows, true, _) => Direction::E,
        (Axis::Rows, false, _) => Direction::W,
        (Axis::Columns, _, true) => Direction::S,
        (Axis::Columns, _, false) => Direction::N,
    }
}

fn to_global_segment(cmd: &QuadrantCommand, q_w: usize) -> LineSegment {
    let q = cmd.quadrant;
    let (a, b) = cmd.segment;
    match cmd.axis {
        Axis::Rows => {
            let (x, y) = (q.global_col(a, q_w), q.global_col(b, q_w));
            LineSegment {
                line: q.global_row(cmd.line, q_w),
                start: x.min(y),
                end: x.max(y),
            }
        }
        Axis::Columns => {
            let (x, y) = (q.global_row(a, q_w), q.global_row(b, q_w));
            LineSegment {
                line: q.global_col(cmd.line, q_w),
                start: x.min(y),
                end: x.max(y),
            }
        }
    }
}

/// Merges the commands of one `(iteration, axis, scan index)` slot into at
/// most two moves, dropping empty shifts.
pub fn merge_commands(commands: &[QuadrantCommand], quadrant_width: usize) -> Result<Vec<MergedMove>> {
    let Some(first) = commands.first() else {
        return Ok(Vec::new());
    };
    let key = (first.iteration, first.axis, first.scan_index);
    if let Some(bad) = commands
        .iter()
        .find(|c| (c.iteration, c.axis, c.scan_index) != key)
    {
        return Err(Error::Contract(format!(
            "cannot merge commands from (iteration {}, {}, scan {}) with (iteration {}, {}, scan {})",
            key.0, key.1, key.2, bad.iteration, bad.axis, bad.scan_index
        )));
    }
    let (iteration, axis, scan_index) = key;
    let order = match axis {
        Axis::Rows => [Direction::E, Direction::W],
        Axis::Columns => [Direction::S, Direction::N],
    };
    let mut out = Vec::new();
    for direction in order {
        let mut lines: Vec<LineSegment> = commands
            .iter()
            .filter(|c| c.atoms > 0 && inward_direction(c.quadrant, axis) == direction)
            .map(|c| to_global_segment(c, quadrant_width))
            .collect();
        if lines.is_empty() {
            continue;
        }
        lines.sort();
        if lines.windows(2).any(|w| w[0].line == w[1].line) {
            return Err(Error::Contract(format!(
                "two commands on the same line at scan index {scan_index}"
            )));
        }
        out.push(MergedMove {
            iteration,
            axis,
            scan_index,
            direction,
            lines,
        });
    }
    Ok(out)
}

/// Runs one pass on one quadrant; returns the updated quadrant and all its
/// commands (empty shifts included).
pub fn quadrant_pass(
    quadrant: &LocalQuadrant,
    axis: Axis,
    iteration: usize,
    policy: ShiftEnablePolicy,
) -> Result<(LocalQuadrant, Vec<QuadrantCommand>)> {
    let side = quadrant.side();
    let pass = compress_pass(quadrant, axis, &policy.mask(side))?;
    let mut commands = Vec::new();
    for (line, (scanned, cmds)) in pass.scanned.iter().zip(&pass.commands).enumerate() {
        for shift in resolve_commands(scanned, cmds)? {
            commands.push(QuadrantCommand {
                quadrant: quadrant.quadrant(),
                iteration,
                axis,
                line,
                scan_index: shift.scan_index,
                segment: (shift.position + 1, side - 1),
                atoms: shift.atoms_moved,
            });
        }
    }
    Ok((pass.quadrant, commands))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchedulerConfig {
    /// `None` means `Q_w` iterations.
    pub max_iterations: Option<usize>,
    pub s_en: ShiftEnablePolicy,
    /// Stop as soon as an iteration produces no move.
    pub early_stop: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            max_iterations: None,
            s_en: ShiftEnablePolicy::Full,
            early_stop: true,
        }
    }
}

impl SchedulerConfig {
    fn iteration_limit(&self, quadrant_width: usize) -> Result<usize> {
        match self.max_iterations {
            Some(0) => Err(Error::InvalidConfig("max iterations must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(quadrant_width.max(1)),
        }
    }
}

/// One atom's path: consecutive same-direction hops are coalesced.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AtomTrace {
    pub origin: SiteCoord,
    pub hops: Vec<(Direction, usize)>,
    #[serde(rename = "final")]
    pub final_site: SiteCoord,
}

impl AtomTrace {
    /// Follows the hops from the origin, failing if any step leaves the
    /// grid.
    pub fn replay(&self, width: usize) -> Result<SiteCoord> {
        let mut site = self.origin;
        for &(dir, steps) in &self.hops {
            for _ in 0..steps {
                site = dir.step(site, 1, width).ok_or_else(|| {
                    Error::Contract(format!("trace from {} leaves the grid", self.origin))
                })?;
            }
        }
        Ok(site)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleResult {
    pub moves: Vec<MergedMove>,
    pub traces: Vec<AtomTrace>,
    /// Iterations that produced at least one move.
    pub iterations: usize,
    /// Iterations started, including a final one that found a fixpoint.
    pub iterations_run: usize,
    pub final_grid: OccupancyGrid,
    pub success: bool,
    pub residual_holes: Vec<SiteCoord>,
    /// Target popcount before the first iteration and after each one.
    pub target_history: Vec<usize>,
}

fn check_target(grid: &OccupancyGrid, target: &TargetRegion) -> Result<()> {
    if grid.width() != target.width() {
        return Err(Error::InvalidTarget {
            side: target.side(),
            width: grid.width(),
        });
    }
    Ok(())
}

fn finish(
    grid: &OccupancyGrid,
    target: &TargetRegion,
    moves: Vec<MergedMove>,
    final_grid: OccupancyGrid,
    iterations: usize,
    iterations_run: usize,
    target_history: Vec<usize>,
) -> Result<ScheduleResult> {
    let traces = trace_atoms(&moves, grid)?;
    let residual_holes = final_grid.holes(target);
    Ok(ScheduleResult {
        moves,
        traces,
        iterations,
        iterations_run,
        success: residual_holes.is_empty(),
        residual_holes,
        final_grid,
        target_history,
    })
}

/// Quadrant-based rearrangement.
pub fn qrm_schedule(grid: &OccupancyGrid, target: &TargetRegion, cfg: &SchedulerConfig) -> Result<ScheduleResult> {
    check_target(grid, target)?;
    let q_w = grid.quadrant_width();
    let limit = cfg.iteration_limit(q_w)?;

    let mut quads = split_quadrants(grid);
    let mut state = grid.clone();
    let mut history = vec![state.target_popcount(target)];
    let mut moves = Vec::new();
    let mut iterations = 0;
    let mut iterations_run = 0;

    for iteration in 1..=limit {
        if state.is_defect_free(target) {
            break;
        }
        iterations_run += 1;
        let before = moves.len();
        for axis in [Axis::Rows, Axis::Columns] {
            let mut by_scan: BTreeMap<usize, Vec<QuadrantCommand>> = BTreeMap::new();
            for quad in quads.iter_mut() {
                let (next, commands) = quadrant_pass(quad, axis, iteration, cfg.s_en)?;
                *quad = next;
                for cmd in commands {
                    by_scan.entry(cmd.scan_index).or_default().push(cmd);
                }
            }
            for slot in by_scan.values() {
                moves.extend(merge_commands(slot, q_w)?);
            }
        }
        state = merge_quadrants(&quads)?;
        if moves.len() == before {
            if cfg.early_stop {
                break;
            }
        } else {
            iterations += 1;
            history.push(state.target_popcount(target));
        }
    }
    finish(grid, target, moves, state, iterations, iterations_run, history)
}

/// Runs the same per-quadrant passes without any merging and maps the
/// result back. Reference for the merged schedule.
pub fn run_quadrants_independently(
    grid: &OccupancyGrid,
    iterations: usize,
    policy: ShiftEnablePolicy,
) -> Result<OccupancyGrid> {
    let mut quads = split_quadrants(grid);
    for quad in quads.iter_mut() {
        for iteration in 1..=iterations {
            for axis in [Axis::Rows, Axis::Columns] {
                let (next, _) = quadrant_pass(quad, axis, iteration, policy)?;
                *quad = next;
            }
        }
    }
    merge_quadrants(&quads)
}

/// Center-column-first rearrangement on the whole array.
///
/// Target columns are handled from the center outward: every row with a
/// hole in the current column shifts everything beyond the hole one step
/// toward it, repeatedly, until the hole fills or nothing is left outside.
/// Target rows follow the same way with vertical moves. Both phases repeat
/// until the target is full, nothing moves or the limit is reached.
pub fn baseline_schedule(grid: &OccupancyGrid, target: &TargetRegion, cfg: &SchedulerConfig) -> Result<ScheduleResult> {
    check_target(grid, target)?;
    let width = grid.width();
    let half = width / 2;
    let limit = cfg.iteration_limit(half)?;

    let mut state = grid.clone();
    let mut history = vec![state.target_popcount(target)];
    let mut moves = Vec::new();
    let mut iterations = 0;
    let mut iterations_run = 0;

    for iteration in 1..=limit {
        if state.is_defect_free(target) {
            break;
        }
        iterations_run += 1;
        let before = moves.len();
        for axis in [Axis::Rows, Axis::Columns] {
            for offset in 0..target.quadrant_side() {
                let near = half - 1 - offset;
                let far = half + offset;
                loop {
                    let mut emitted = false;
                    for (direction, fill) in inward_pair(axis) {
                        let target_line = if fill { near } else { far };
                        let lines = outer_segments(&state, axis, target_line, fill);
                        if lines.is_empty() {
                            continue;
                        }
                        let mm = MergedMove {
                            iteration,
                            axis,
                            scan_index: offset,
                            direction,
                            lines,
                        };
                        for mv in mm.line_moves()? {
                            apply_move_in_place(&mut state, &mv)?;
                        }
                        moves.push(mm);
                        emitted = true;
                    }
                    if !emitted {
                        break;
                    }
                }
            }
        }
        if moves.len() == before {
            if cfg.early_stop {
                break;
            }
        } else {
            iterations += 1;
            history.push(state.target_popcount(target));
        }
    }
    finish(grid, target, moves, state, iterations, iterations_run, history)
}

/// `(direction, low side)` pairs of an axis: the low side (west or north)
/// moves toward higher indices.
fn inward_pair(axis: Axis) -> [(Direction, bool); 2] {
    match axis {
        Axis::Rows => [(Direction::E, true), (Direction::W, false)],
        Axis::Columns => [(Direction::S, true), (Direction::N, false)],
    }
}

/// Lines that have a hole at `target_line` and at least one atom on the
/// outer side of it, with that outer side as the segment.
fn outer_segments(state: &OccupancyGrid, axis: Axis, target_line: usize, low_side: bool) -> Vec<LineSegment> {
    let width = state.width();
    let at = |line: usize, k: usize| match axis {
        Axis::Rows => state.occupied(line, k),
        Axis::Columns => state.occupied(k, line),
    };
    let (start, end) = if low_side {
        if target_line == 0 {
            return Vec::new();
        }
        (0, target_line - 1)
    } else {
        if target_line + 1 >= width {
            return Vec::new();
        }
        (target_line + 1, width - 1)
    };
    (0..width)
        .filter(|&line| !at(line, target_line) && (start..=end).any(|k| at(line, k)))
        .map(|line| LineSegment { line, start, end })
        .collect()
}

/// Follows every atom of `grid` through the merged moves.
pub fn trace_atoms(moves: &[MergedMove], grid: &OccupancyGrid) -> Result<Vec<AtomTrace>> {
    let mut tracer = Tracer::new(grid);
    for (index, mm) in moves.iter().enumerate() {
        if mm.direction.axis() != mm.axis {
            return Err(Error::Contract(format!(
                "merged move {index} has direction {} on axis {}",
                mm.direction, mm.axis
            )));
        }
        for seg in &mm.lines {
            tracer
                .apply_segment(mm.axis, seg, mm.direction)
                .map_err(|e| Error::Contract(format!("merged move {index}: {e}")))?;
        }
    }
    Ok(tracer.finish())
}

/// Follows every atom of `grid` through lowered tweezer moves.
pub fn trace_tweezer_moves(moves: &[TweezerMove], grid: &OccupancyGrid) -> Result<Vec<AtomTrace>> {
    let mut tracer = Tracer::new(grid);
    for (index, mv) in moves.iter().enumerate() {
        tracer
            .apply(mv)
            .map_err(|e| Error::Contract(format!("move {index}: {e}")))?;
    }
    Ok(tracer.finish())
}

struct Tracer {
    grid: OccupancyGrid,
    /// Atom id at each site.
    slots: Vec<Option<usize>>,
    traces: Vec<AtomTrace>,
}

impl Tracer {
    fn new(grid: &OccupancyGrid) -> Self {
        let width = grid.width();
        let mut slots = vec![None; width * width];
        let mut traces = Vec::new();
        for site in grid.atoms() {
            slots[site.row * width + site.col] = Some(traces.len());
            traces.push(AtomTrace {
                origin: site,
                hops: Vec::new(),
                final_site: site,
            });
        }
        Self {
            grid: grid.clone(),
            slots,
            traces,
        }
    }

    fn apply(&mut self, mv: &TweezerMove) -> Result<()> {
        let width = self.grid.width();
        apply_move_in_place(&mut self.grid, mv)?;
        let mut lifted = Vec::new();
        for &r in &mv.rows {
            for &c in &mv.cols {
                if let Some(id) = self.slots[r * width + c].take() {
                    lifted.push(id);
                }
            }
        }
        for id in lifted {
            let trace = &mut self.traces[id];
            let dst = mv
                .direction
                .step(trace.final_site, mv.steps, width)
                .expect("validated move");
            self.slots[dst.row * width + dst.col] = Some(id);
            trace.final_site = dst;
            match trace.hops.last_mut() {
                Some((dir, steps)) if *dir == mv.direction => *steps += mv.steps,
                _ => trace.hops.push((mv.direction, mv.steps)),
            }
        }
        Ok(())
    }

    /// Single-line shift by one step; same semantics as the equivalent
    /// one-line tweezer move without building it.
    fn apply_segment(&mut self, axis: Axis, seg: &LineSegment, direction: Direction) -> Result<()> {
        let width = self.grid.width();
        let site_at = |k: usize| match axis {
            Axis::Rows => SiteCoord::new(seg.line, k),
            Axis::Columns => SiteCoord::new(k, seg.line),
        };
        let along = |s: SiteCoord| match axis {
            Axis::Rows => s.col,
            Axis::Columns => s.row,
        };
        if seg.line >= width || seg.end >= width || seg.start > seg.end {
            return Err(Error::Contract(format!("segment {seg:?} outside a {width}-wide array")));
        }
        let mut lifted = Vec::new();
        for k in seg.start..=seg.end {
            let src = site_at(k);
            let Some(dst) = direction.step(src, 1, width) else {
                return Err(Error::Contract(format!("trap {src} leaves the array")));
            };
            if self.grid.occupied(src.row, src.col)
                && self.grid.occupied(dst.row, dst.col)
                && !(seg.start..=seg.end).contains(&along(dst))
            {
                return Err(Error::Contract(format!("atom at {src} collides with {dst}")));
            }
            if let Some(id) = self.slots[src.row * width + src.col] {
                lifted.push((src, id));
            }
        }
        for &(src, _) in &lifted {
            self.slots[src.row * width + src.col] = None;
            self.grid.set(src, false)?;
        }
        for (src, id) in lifted {
            let dst = direction.step(src, 1, width).expect("checked above");
            self.slots[dst.row * width + dst.col] = Some(id);
            self.grid.set(dst, true)?;
            let trace = &mut self.traces[id];
            trace.final_site = dst;
            match trace.hops.last_mut() {
                Some((dir, steps)) if *dir == direction => *steps += 1,
                _ => trace.hops.push((direction, 1)),
            }
        }
        Ok(())
    }

    fn finish(self) -> Vec<AtomTrace> {
        self.traces
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{random_load, LoadConfig};

    fn cmd(quadrant: QuadrantId, axis: Axis, line: usize, scan: usize, atoms: usize) -> QuadrantCommand {
        QuadrantCommand {
            quadrant,
            iteration: 1,
            axis,
            line,
            scan_index: scan,
            segment: (scan + 1, 4),
            atoms,
        }
    }

    #[test]
    fn defect_free_grid_needs_nothing() {
        let grid = OccupancyGrid::full(8).unwrap();
        let target = TargetRegion::new(8, 4).unwrap();
        for result in [
            qrm_schedule(&grid, &target, &SchedulerConfig::default()).unwrap(),
            baseline_schedule(&grid, &target, &SchedulerConfig::default()).unwrap(),
        ] {
            assert!(result.moves.is_empty());
            assert!(result.success);
            assert_eq!(result.iterations, 0);
            assert!(result.traces.iter().all(|t| t.hops.is_empty()));
        }
    }

    #[test]
    fn west_quadrants_merge_into_one_east_move() {
        let cmds = [
            cmd(QuadrantId::NW, Axis::Rows, 2, 0, 3),
            cmd(QuadrantId::SW, Axis::Rows, 1, 0, 1),
        ];
        let merged = merge_commands(&cmds, 5).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].direction, Direction::E);
        // NW row 2 -> global row 2, SW row 1 -> global row 6; cols 0..=3.
        assert_eq!(
            merged[0].lines,
            vec![
                LineSegment { line: 2, start: 0, end: 3 },
                LineSegment { line: 6, start: 0, end: 3 },
            ]
        );
        assert!(merged[0].points_to_center(10));
    }

    #[test]
    fn vertical_merge_pairs_north_and_south() {
        let cmds = [
            cmd(QuadrantId::NW, Axis::Columns, 0, 1, 1),
            cmd(QuadrantId::NE, Axis::Columns, 0, 1, 1),
            cmd(QuadrantId::SE, Axis::Columns, 3, 1, 2),
        ];
        let merged = merge_commands(&cmds, 5).unwrap();
        let dirs: Vec<Direction> = merged.iter().map(|m| m.direction).collect();
        assert_eq!(dirs, vec![Direction::S, Direction::N]);
        assert_eq!(merged[0].lines.len(), 2);
        assert_eq!(merged[1].lines, vec![LineSegment { line: 8, start: 7, end: 9 }]);
    }

    #[test]
    fn empty_shifts_are_pruned() {
        let cmds = [
            cmd(QuadrantId::NW, Axis::Rows, 0, 2, 0),
            cmd(QuadrantId::SE, Axis::Rows, 4, 2, 0),
        ];
        assert!(merge_commands(&cmds, 5).unwrap().is_empty());
        assert!(merge_commands(&[], 5).unwrap().is_empty());
    }

    #[test]
    fn single_quadrant_merge() {
        let merged = merge_commands(&[cmd(QuadrantId::NE, Axis::Rows, 0, 0, 2)], 5).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].direction, Direction::W);
        assert_eq!(merged[0].lines, vec![LineSegment { line: 4, start: 6, end: 9 }]);
    }

    #[test]
    fn mixed_slots_are_rejected() {
        let cmds = [
            cmd(QuadrantId::NW, Axis::Rows, 0, 0, 1),
            cmd(QuadrantId::NW, Axis::Rows, 1, 1, 1),
        ];
        assert!(matches!(merge_commands(&cmds, 5), Err(Error::Contract(_))));
        let cmds = [
            cmd(QuadrantId::NW, Axis::Rows, 0, 0, 1),
            cmd(QuadrantId::NW, Axis::Columns, 1, 0, 1),
        ];
        assert!(merge_commands(&cmds, 5).is_err());
    }

    #[test]
    fn baseline_single_hole_single_move() {
        // Target is the central 2x2; (3,3) is empty and (3,2) holds an atom.
        let grid = OccupancyGrid::from_sites(8, &[(3, 2), (3, 4), (4, 3), (4, 4)]).unwrap();
        let target = TargetRegion::new(8, 2).unwrap();
        let result = baseline_schedule(&grid, &target, &SchedulerConfig::default()).unwrap();
        assert_eq!(result.moves.len(), 1);
        assert_eq!(
            result.moves[0].lines,
            vec![LineSegment { line: 3, start: 0, end: 2 }]
        );
        assert!(result.success);
        let moved: Vec<&AtomTrace> = result.traces.iter().filter(|t| !t.hops.is_empty()).collect();
        assert_eq!(moved.len(), 1);
        assert_eq!(moved[0].hops, vec![(Direction::E, 1)]);
    }

    #[test]
    fn traces_coalesce_hops() {
        let grid = OccupancyGrid::from_sites(8, &[(0, 0)]).unwrap();
        let step = |start| MergedMove {
            iteration: 1,
            axis: Axis::Rows,
            scan_index: 0,
            direction: Direction::E,
            lines: vec![LineSegment { line: 0, start, end: start }],
        };
        let traces = trace_atoms(&[step(0), step(1)], &grid).unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].hops, vec![(Direction::E, 2)]);
        assert_eq!(traces[0].final_site, SiteCoord::new(0, 2));
        assert_eq!(traces[0].replay(8).unwrap(), SiteCoord::new(0, 2));

        let single = trace_atoms(&[step(0)], &grid).unwrap();
        assert_eq!(single[0].hops, vec![(Direction::E, 1)]);
    }

    #[test]
    fn trace_rejects_mismatched_schedule() {
        let grid = OccupancyGrid::from_sites(8, &[(0, 0), (0, 1)]).unwrap();
        let mm = MergedMove {
            iteration: 1,
            axis: Axis::Rows,
            scan_index: 0,
            direction: Direction::E,
            lines: vec![LineSegment { line: 0, start: 0, end: 0 }],
        };
        assert!(trace_atoms(&[mm], &grid).is_err());
    }

    #[test]
    fn zero_iteration_limit_is_rejected() {
        let grid = OccupancyGrid::empty(8).unwrap();
        let target = TargetRegion::new(8, 4).unwrap();
        let cfg = SchedulerConfig {
            max_iterations: Some(0),
            ..SchedulerConfig::default()
        };
        assert!(matches!(qrm_schedule(&grid, &target, &cfg), Err(Error::InvalidConfig(_))));
        let wrong = TargetRegion::new(10, 4).unwrap();
        assert!(qrm_schedule(&grid, &wrong, &SchedulerConfig::default()).is_err());
    }

    #[test]
    fn small_qrm_run_is_consistent() {
        let target = TargetRegion::new(8, 4).unwrap();
        for seed in 0..20 {
            let grid = random_load(8, LoadConfig::new(0.5, seed)).unwrap();
            let result = qrm_schedule(&grid, &target, &SchedulerConfig::default()).unwrap();
            assert_eq!(result.final_grid.popcount(), grid.popcount());
            assert_eq!(result.success, result.residual_holes.is_empty());
            let mut replay = grid.clone();
            for mm in &result.moves {
                assert!(mm.points_to_center(8));
                replay = apply_merged(&replay, mm).unwrap();
            }
            assert_eq!(replay, result.final_grid);
        }
    }

    #[test]
    fn infeasible_grid_reports_holes() {
        let grid = OccupancyGrid::from_sites(8, &[(0, 0), (7, 7)]).unwrap();
        let target = TargetRegion::new(8, 4).unwrap();
        let result = qrm_schedule(&grid, &target, &SchedulerConfig::default()).unwrap();
        assert!(!result.success);
        assert_eq!(result.residual_holes.len(), 14);
        assert_eq!(result.final_grid.popcount(), 2);
    }
}
