//! File formats and the `generate` / `schedule` / `verify` / `bench` /
//! `show` workflow behind the `qrm` binary.

pub mod bench;
pub mod codec;
pub mod schedule_file;

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use crate::aod::{lower, simulate};
use crate::error::{Error, Result};
use crate::grid::{feasibility, random_load, LoadConfig, OccupancyGrid, TargetRegion};
use crate::scheduler::{baseline_schedule, qrm_schedule, trace_tweezer_moves, ScheduleResult, SchedulerConfig};

pub use bench::{run_bench, BenchAggregate, BenchConfig, BenchReport, BenchRow};
pub use codec::{pack_bitfield, unpack_bitfield, PacketStream};
pub use schedule_file::{MoveRecord, ScheduleFile, SummaryRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algorithm {
    Qrm,
    Baseline,
}

impl Algorithm {
    pub fn run(self, grid: &OccupancyGrid, target: &TargetRegion, cfg: &SchedulerConfig) -> Result<ScheduleResult> {
        match self {
            Algorithm::Qrm => qrm_schedule(grid, target, cfg),
            Algorithm::Baseline => baseline_schedule(grid, target, cfg),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Qrm => "qrm",
            Algorithm::Baseline => "baseline",
        })
    }
}

pub fn read_grid(path: &Path) -> Result<(OccupancyGrid, TargetRegion)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    codec::decode(&bytes)
}

pub fn write_grid(path: &Path, grid: &OccupancyGrid, target: &TargetRegion) -> Result<()> {
    fs::write(path, codec::encode(grid, target)?).map_err(|e| Error::io(path, e))
}

pub fn read_schedule(path: &Path) -> Result<ScheduleFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScheduleFile::parse(&text)
}

#[derive(Debug, Clone)]
pub struct GenerateOutcome {
    pub grid: OccupancyGrid,
    pub target: TargetRegion,
    /// Human-readable warnings, e.g. quadrants short of atoms.
    pub warnings: Vec<String>,
}

fn supply_warnings(grid: &OccupancyGrid, target: &TargetRegion) -> Result<Vec<String>> {
    Ok(feasibility(grid, target)?
        .infeasible()
        .map(|q| {
            format!(
                "warning: quadrant {} holds {} atoms but needs {}",
                q.quadrant, q.available, q.required
            )
        })
        .collect())
}

pub fn cmd_generate(width: usize, target: usize, fill: f64, seed: u64, out: &Path) -> Result<GenerateOutcome> {
    let region = TargetRegion::new(width, target)?;
    let grid = random_load(width, LoadConfig::new(fill, seed))?;
    write_grid(out, &grid, &region)?;
    Ok(GenerateOutcome {
        warnings: supply_warnings(&grid, &region)?,
        grid,
        target: region,
    })
}

#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub result: ScheduleResult,
    pub file: ScheduleFile,
    pub warnings: Vec<String>,
}

impl ScheduleOutcome {
    pub fn summary(&self) -> String {
        let s = &self.file.summary;
        format!(
            "iterations {}, merged moves {}, tweezer moves {}, success {}, residual holes {}",
            s.iterations,
            self.result.moves.len(),
            s.move_count,
            s.success,
            s.residual_holes.len()
        )
    }
}

/// Schedules a grid file; `out` of `None` skips writing.
pub fn cmd_schedule(input: &Path, algorithm: Algorithm, cfg: &SchedulerConfig, out: Option<&Path>) -> Result<ScheduleOutcome> {
    let (grid, target) = read_grid(input)?;
    let result = algorithm.run(&grid, &target, cfg)?;
    let lowered = lower(&result.moves, &grid)?;
    let file = ScheduleFile::from_schedule(&result, &lowered);
    if let Some(path) = out {
        fs::write(path, file.to_jsonl()).map_err(|e| Error::io(path, e))?;
    }
    Ok(ScheduleOutcome {
        warnings: supply_warnings(&grid, &target)?,
        result,
        file,
    })
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub moves_executed: usize,
    pub initial_popcount: usize,
    pub final_popcount: usize,
    pub defect_free: bool,
    /// Empty when everything checks out.
    pub problems: Vec<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        }
    }
}

/// Replays a schedule against its grid.
pub fn verify_schedule(grid: &OccupancyGrid, target: &TargetRegion, schedule: &ScheduleFile) -> Result<VerifyOutcome> {
    let moves = schedule.tweezer_moves()?;
    let mut problems = Vec::new();
    let initial_popcount = grid.popcount();
    let (final_grid, moves_executed) = match simulate(grid, &moves, Some(target)) {
        Ok(report) => (report.final_grid, report.moves_executed),
        Err(abort) => {
            problems.push(abort.to_string());
            (abort.grid.clone(), abort.move_index)
        }
    };
    let final_popcount = final_grid.popcount();
    if final_popcount != initial_popcount {
        problems.push(format!("popcount changed from {initial_popcount} to {final_popcount}"));
    }
    let defect_free = final_grid.is_defect_free(target);
    if problems.is_empty() {
        let summary = &schedule.summary;
        if summary.success != defect_free {
            problems.push(format!(
                "summary claims success={} but replay gives {}",
                summary.success, defect_free
            ));
        }
        if summary.residual_holes != final_grid.holes(target) {
            problems.push("residual holes do not match the replayed grid".into());
        }
        if summary.move_count != moves.len() {
            problems.push(format!(
                "summary counts {} moves, file has {}",
                summary.move_count,
                moves.len()
            ));
        }
        let traces = trace_tweezer_moves(&moves, grid)?;
        if traces != schedule.traces {
            problems.push("atom traces do not match the replayed moves".into());
        }
        for t in &schedule.traces {
            match t.replay(grid.width()) {
                Ok(site) if site == t.final_site => {}
                _ => problems.push(format!("trace from {} does not end at {}", t.origin, t.final_site)),
            }
        }
    }
    Ok(VerifyOutcome {
        moves_executed,
        initial_popcount,
        final_popcount,
        defect_free,
        problems,
    })
}

pub fn cmd_verify(grid_path: &Path, schedule_path: &Path) -> Result<VerifyOutcome> {
    let (grid, target) = read_grid(grid_path)?;
    let schedule = read_schedule(schedule_path)?;
    verify_schedule(&grid, &target, &schedule)
}

pub fn cmd_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    run_bench(cfg)
}

/// `●` for atoms, `·` for empty traps, row 0 on top. Target rows are
/// marked in the margin.
pub fn render_grid(grid: &OccupancyGrid, target: Option<&TargetRegion>) -> String {
    let mut out = String::new();
    for r in 0..grid.width() {
        let in_target = target.is_some_and(|t| (t.start()..t.end()).contains(&r));
        out.push(if in_target { '>' } else { ' ' });
        for c in 0..grid.width() {
            out.push(' ');
            out.push(if grid.occupied(r, c) { '●' } else { '·' });
        }
        out.push('\n');
    }
    out
}

/// Renders a grid file, a schedule file, or a grid replayed through a
/// schedule.
pub fn cmd_show(path: &Path, schedule: Option<&Path>) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::new();
    if !bytes.starts_with(&codec::MAGIC) {
        let text = String::from_utf8(bytes).map_err(|_| Error::ScheduleParse {
            line: 0,
            message: "neither a grid file nor a text schedule".into(),
        })?;
        let file = ScheduleFile::parse(&text)?;
        let s = &file.summary;
        let _ = writeln!(
            out,
            "schedule: {} moves, {} iterations, success {}, {} residual holes, {} traces",
            s.move_count,
            s.iterations,
            s.success,
            s.residual_holes.len(),
            file.traces.len()
        );
        let mut per_iteration = std::collections::BTreeMap::new();
        for m in &file.moves {
            *per_iteration.entry(m.iteration).or_insert(0usize) += 1;
        }
        for (it, n) in per_iteration {
            let _ = writeln!(out, "iteration {it}: {n} moves");
        }
        return Ok(out);
    }

    let (grid, target) = codec::decode(&bytes)?;
    let _ = writeln!(
        out,
        "{0}x{0} grid, {1} atoms, target {2}x{2}: {3}/{4} filled",
        grid.width(),
        grid.popcount(),
        target.side(),
        grid.target_popcount(&target),
        target.area()
    );
    out.push_str(&render_grid(&grid, Some(&target)));
    let Some(schedule_path) = schedule else {
        return Ok(out);
    };
    let file = read_schedule(schedule_path)?;
    let mut state = grid;
    let mut current = None;
    for record in &file.moves {
        if current.is_some_and(|it| it != record.iteration) {
            let _ = writeln!(
                out,
                "after iteration {}: target {}/{}",
                current.unwrap_or(0),
                state.target_popcount(&target),
                target.area()
            );
        }
        current = Some(record.iteration);
        state = crate::aod::apply_move(&state, &record.to_tweezer()?)?;
    }
    if let Some(it) = current {
        let _ = writeln!(
            out,
            "after iteration {it}: target {}/{}",
            state.target_popcount(&target),
            target.area()
        );
    }
    let _ = writeln!(out, "final grid:");
    out.push_str(&render_grid(&state, Some(&target)));
    Ok(out)
}
