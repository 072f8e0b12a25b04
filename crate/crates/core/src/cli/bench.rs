//! Seeded benchmark harness.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Algorithm;
use crate::aod::{lower, simulate};
use crate::error::{Error, Result};
use crate::grid::{random_load, LoadConfig, TargetRegion};
use crate::latency::{estimate, LatencyModel};
use crate::scheduler::SchedulerConfig;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub width: usize,
    pub target: usize,
    pub fill: f64,
    pub seeds: Range<u64>,
    pub algorithm: Algorithm,
    pub scheduler: SchedulerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub seed: u64,
    pub popcount: usize,
    pub success: bool,
    pub iterations: usize,
    pub merged_moves: usize,
    pub lowered_moves: usize,
    /// Simulator found no violation and reproduced the predicted grid.
    pub verified: bool,
    /// Host time for schedule + lowering; the only nondeterministic column.
    pub wall_time_us: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchAggregate {
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub all_verified: bool,
    pub median_iterations: f64,
    pub median_merged_moves: f64,
    pub median_lowered_moves: f64,
    pub median_wall_time_us: f64,
    /// Iteration count -> number of runs.
    pub iteration_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub config_label: String,
    pub rows: Vec<BenchRow>,
    pub aggregate: BenchAggregate,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

impl BenchAggregate {
    pub fn from_rows(rows: &[BenchRow]) -> Self {
        let col = |f: fn(&BenchRow) -> f64| -> f64 {
            let mut v: Vec<f64> = rows.iter().map(f).collect();
            median(&mut v)
        };
        let successes = rows.iter().filter(|r| r.success).count();
        let mut iteration_histogram = BTreeMap::new();
        for r in rows {
            *iteration_histogram.entry(r.iterations).or_insert(0) += 1;
        }
        Self {
            runs: rows.len(),
            successes,
            success_rate: if rows.is_empty() {
                0.0
            } else {
                successes as f64 / rows.len() as f64
            },
            all_verified: rows.iter().all(|r| r.verified),
            median_iterations: col(|r| r.iterations as f64),
            median_merged_moves: col(|r| r.merged_moves as f64),
            median_lowered_moves: col(|r| r.lowered_moves as f64),
            median_wall_time_us: col(|r| r.wall_time_us),
            iteration_histogram,
        }
    }
}

fn run_seed(cfg: &BenchConfig, target: &TargetRegion, seed: u64) -> Result<BenchRow> {
    let grid = random_load(cfg.width, LoadConfig::new(cfg.fill, seed))?;
    let start = Instant::now();
    let result = cfg.algorithm.run(&grid, target, &cfg.scheduler)?;
    let lowered = lower(&result.moves, &grid)?;
    let wall_time_us = start.elapsed().as_secs_f64() * 1e6;
    let moves: Vec<_> = lowered.iter().map(|m| m.tweezer.clone()).collect();
    let verified = simulate(&grid, &moves, Some(target))
        .map(|r| r.final_grid == result.final_grid)
        .unwrap_or(false);
    Ok(BenchRow {
        seed,
        popcount: grid.popcount(),
        success: result.success,
        iterations: result.iterations,
        merged_moves: result.moves.len(),
        lowered_moves: lowered.len(),
        verified,
        wall_time_us,
    })
}

/// Runs every seed (in parallel); rows come back sorted by seed.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let target = TargetRegion::new(cfg.width, cfg.target)?;
    if cfg.seeds.is_empty() {
        return Err(Error::InvalidConfig("empty seed range".into()));
    }
    let seeds: Vec<u64> = cfg.seeds.clone().collect();
    let mut rows = seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, &target, seed))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.seed);
    let aggregate = BenchAggregate::from_rows(&rows);
    Ok(BenchReport {
        config_label: format!(
            "{} W={} T={} p={} seeds {}..{}",
            cfg.algorithm, cfg.width, cfg.target, cfg.fill, cfg.seeds.start, cfg.seeds.end
        ),
        rows,
        aggregate,
    })
}

impl BenchReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer
                .serialize(row)
                .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
        csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<Vec<BenchRow>, _>>()
            .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))
    }

    pub fn summary(&self, width: usize) -> String {
        let a = &self.aggregate;
        let mut out = String::new();
        let _ = writeln!(out, "bench: {}", self.config_label);
        let _ = writeln!(
            out,
            "success rate: {}/{} ({:.1}%)",
            a.successes,
            a.runs,
            100.0 * a.success_rate
        );
        let _ = writeln!(out, "all runs verified by simulator: {}", a.all_verified);
        let hist: Vec<String> = a
            .iteration_histogram
            .iter()
            .map(|(it, n)| format!("{it}:{n}"))
            .collect();
        let _ = writeln!(out, "iterations (count:runs): {}", hist.join(" "));
        let _ = writeln!(
            out,
            "median iterations {:.1}, merged moves {:.1}, lowered moves {:.1}, host time {:.1} us",
            a.median_iterations, a.median_merged_moves, a.median_lowered_moves, a.median_wall_time_us
        );
        let iterations = (a.median_iterations.round() as usize).max(1);
        if let Ok(est) = estimate(width, iterations, &LatencyModel::default()) {
            let _ = writeln!(
                out,
                "indicative kernel latency at 250 MHz for {iterations} iteration(s): {} cycles = {:.2} us",
                est.total_cycles,
                est.wall_time_us()
            );
        }
        out
    }
}
