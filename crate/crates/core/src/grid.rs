//! Occupancy grids, loading, target geometry and the quadrant coordinate
//! algebra.
//!
//! Coordinates are `(row, col)` with the origin at the top-left site and
//! bits stored row-major. Row 0 is drawn at the top, so "north" means a
//! smaller row index and "west" a smaller column index.
//!
//! Each quadrant is viewed through a flip that puts local `(0, 0)` on the
//! site touching the array center; local indices grow outward. Compressing
//! toward the center is then always compressing toward local index 0.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteCoord {
    pub row: usize,
    pub col: usize,
}

impl SiteCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for SiteCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

impl From<(usize, usize)> for SiteCoord {
    fn from((row, col): (usize, usize)) -> Self {
        Self { row, col }
    }
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 || !width.is_multiple_of(2) {
        return Err(Error::InvalidDimension(width));
    }
    Ok(())
}

/// A `W x W` trap occupancy bitmap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OccupancyGrid {
    width: usize,
    bits: Vec<bool>,
}

impl OccupancyGrid {
    pub fn empty(width: usize) -> Result<Self> {
        check_width(width)?;
        Ok(Self {
            width,
            bits: vec![false; width * width],
        })
    }

    pub fn full(width: usize) -> Result<Self> {
        check_width(width)?;
        Ok(Self {
            width,
            bits: vec![true; width * width],
        })
    }

    pub fn from_bits(width: usize, bits: Vec<bool>) -> Result<Self> {
        check_width(width)?;
        if bits.len() != width * width {
            return Err(Error::LengthMismatch {
                expected: width * width,
                actual: bits.len(),
            });
        }
        Ok(Self { width, bits })
    }

    pub fn from_sites(width: usize, sites: &[(usize, usize)]) -> Result<Self> {
        let mut grid = Self::empty(width)?;
        for &(row, col) in sites {
            grid.set(SiteCoord::new(row, col), true)?;
        }
        Ok(grid)
    }

    /// Parses one string per row; `1`, `#`, `o` and `●` mark atoms, `0`,
    /// `.` and `·` mark empty traps. Whitespace is ignored.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let width = rows.len();
        check_width(width)?;
        let mut bits = Vec::with_capacity(width * width);
        for (r, row) in rows.iter().enumerate() {
            let before = bits.len();
            for ch in row.as_ref().chars().filter(|c| !c.is_whitespace()) {
                match ch {
                    '1' | '#' | 'o' | '●' => bits.push(true),
                    '0' | '.' | '·' => bits.push(false),
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "unexpected character {other:?} in row {r}"
                        )))
                    }
                }
            }
            if bits.len() - before != width {
                return Err(Error::LengthMismatch {
                    expected: width,
                    actual: bits.len() - before,
                });
            }
        }
        Self::from_bits(width, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Side of each quadrant, `W / 2`.
    pub fn quadrant_width(&self) -> usize {
        self.width / 2
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, site: SiteCoord) -> bool {
        site.row < self.width && site.col < self.width
    }

    fn index(&self, site: SiteCoord) -> Result<usize> {
        if !self.contains(site) {
            return Err(Error::OutOfRange {
                row: site.row,
                col: site.col,
                side: self.width,
            });
        }
        Ok(site.row * self.width + site.col)
    }

    pub fn get(&self, site: SiteCoord) -> Result<bool> {
        Ok(self.bits[self.index(site)?])
    }

    /// Unchecked lookup for hot loops; panics out of range.
    pub fn occupied(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, site: SiteCoord, value: bool) -> Result<()> {
        let idx = self.index(site)?;
        self.bits[idx] = value;
        Ok(())
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn atoms(&self) -> impl Iterator<Item = SiteCoord> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| SiteCoord::new(i / w, i % w))
    }

    pub fn target_popcount(&self, target: &TargetRegion) -> usize {
        target.sites().filter(|s| self.occupied(s.row, s.col)).count()
    }

    /// Empty sites inside the target, row-major.
    pub fn holes(&self, target: &TargetRegion) -> Vec<SiteCoord> {
        target
            .sites()
            .filter(|s| !self.occupied(s.row, s.col))
            .collect()
    }

    pub fn is_defect_free(&self, target: &TargetRegion) -> bool {
        target.sites().all(|s| self.occupied(s.row, s.col))
    }
}

impl fmt::Debug for OccupancyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OccupancyGrid {}x{}", self.width, self.width)?;
        for r in 0..self.width {
            for c in 0..self.width {
                f.write_str(if self.occupied(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Stochastic loading parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadConfig {
    pub fill_probability: f64,
    pub seed: u64,
}

impl LoadConfig {
    pub fn new(fill_probability: f64, seed: u64) -> Self {
        Self {
            fill_probability,
            seed,
        }
    }
}

/// Loads each trap independently with probability `p`, one SplitMix64 draw
/// per site in row-major order.
pub fn random_load(width: usize, cfg: LoadConfig) -> Result<OccupancyGrid> {
    check_width(width)?;
    let p = cfg.fill_probability;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!(
            "fill probability {p} outside [0, 1]"
        )));
    }
    let mut rng = SplitMix64::new(cfg.seed);
    let bits = (0..width * width).map(|_| rng.next_f64() < p).collect();
    OccupancyGrid::from_bits(width, bits)
}

/// Centered `T x T` region that must end up fully occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TargetRegion {
    width: usize,
    side: usize,
}

impl TargetRegion {
    pub fn new(width: usize, side: usize) -> Result<Self> {
        check_width(width)?;
        if side == 0 || !side.is_multiple_of(2) || side > width {
            return Err(Error::InvalidTarget { side, width });
        }
        Ok(Self { width, side })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Per-quadrant side `T / 2`.
    pub fn quadrant_side(&self) -> usize {
        self.side / 2
    }

    /// First row/column of the region.
    pub fn start(&self) -> usize {
        self.width / 2 - self.side / 2
    }

    /// One past the last row/column of the region.
    pub fn end(&self) -> usize {
        self.width / 2 + self.side / 2
    }

    pub fn contains(&self, site: SiteCoord) -> bool {
        let span = self.start()..self.end();
        span.contains(&site.row) && span.contains(&site.col)
    }

    pub fn area(&self) -> usize {
        self.side * self.side
    }

    pub fn sites(&self) -> impl Iterator<Item = SiteCoord> {
        let (start, end) = (self.start(), self.end());
        (start..end).flat_map(move |r| (start..end).map(move |c| SiteCoord::new(r, c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuadrantId {
    NW,
    NE,
    SW,
    SE,
}

impl QuadrantId {
    pub const ALL: [QuadrantId; 4] = [QuadrantId::NW, QuadrantId::NE, QuadrantId::SW, QuadrantId::SE];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_north(self) -> bool {
        matches!(self, QuadrantId::NW | QuadrantId::NE)
    }

    pub fn is_west(self) -> bool {
        matches!(self, QuadrantId::NW | QuadrantId::SW)
    }

    /// Global row of local row `i` (no bounds checks).
    pub(crate) fn global_row(self, i: usize, q_w: usize) -> usize {
        if self.is_north() {
            q_w - 1 - i
        } else {
            q_w + i
        }
    }

    /// Global column of local column `j` (no bounds checks).
    pub(crate) fn global_col(self, j: usize, q_w: usize) -> usize {
        if self.is_west() {
            q_w - 1 - j
        } else {
            q_w + j
        }
    }

    /// Applies this quadrant's flip to a `side x side` row-major bitmap.
    /// The flip is an involution.
    pub fn flip_bitmap(self, bits: &[bool], side: usize) -> Result<Vec<bool>> {
        if bits.len() != side * side {
            return Err(Error::LengthMismatch {
                expected: side * side,
                actual: bits.len(),
            });
        }
        let mut out = vec![false; side * side];
        for i in 0..side {
            for j in 0..side {
                let src_r = if self.is_north() { side - 1 - i } else { i };
                let src_c = if self.is_west() { side - 1 - j } else { j };
                out[i * side + j] = bits[src_r * side + src_c];
            }
        }
        Ok(out)
    }
}

impl fmt::Display for QuadrantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub fn local_to_global(quadrant: QuadrantId, local: SiteCoord, width: usize) -> Result<SiteCoord> {
    check_width(width)?;
    let q_w = width / 2;
    if local.row >= q_w || local.col >= q_w {
        return Err(Error::OutOfRange {
            row: local.row,
            col: local.col,
            side: q_w,
        });
    }
    Ok(SiteCoord::new(
        quadrant.global_row(local.row, q_w),
        quadrant.global_col(local.col, q_w),
    ))
}

pub fn global_to_local(site: SiteCoord, width: usize) -> Result<(QuadrantId, SiteCoord)> {
    check_width(width)?;
    if site.row >= width || site.col >= width {
        return Err(Error::OutOfRange {
            row: site.row,
            col: site.col,
            side: width,
        });
    }
    let q_w = width / 2;
    let north = site.row < q_w;
    let west = site.col < q_w;
    let quadrant = match (north, west) {
        (true, true) => QuadrantId::NW,
        (true, false) => QuadrantId::NE,
        (false, true) => QuadrantId::SW,
        (false, false) => QuadrantId::SE,
    };
    let i = if north { q_w - 1 - site.row } else { site.row - q_w };
    let j = if west { q_w - 1 - site.col } else { site.col - q_w };
    Ok((quadrant, SiteCoord::new(i, j)))
}

/// Flipped view of one quadrant; local `(0, 0)` touches the array center.
#[derive(Clone, PartialEq, Eq)]
pub struct LocalQuadrant {
    quadrant: QuadrantId,
    side: usize,
    bits: Vec<bool>,
}

impl LocalQuadrant {
    pub fn new(quadrant: QuadrantId, side: usize, bits: Vec<bool>) -> Result<Self> {
        if side == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if bits.len() != side * side {
            return Err(Error::LengthMismatch {
                expected: side * side,
                actual: bits.len(),
            });
        }
        Ok(Self {
            quadrant,
            side,
            bits,
        })
    }

    pub fn quadrant(&self) -> QuadrantId {
        self.quadrant
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.side + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.bits[i * self.side + j] = value;
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Atoms inside the local `t_q x t_q` corner.
    pub fn corner_popcount(&self, t_q: usize) -> usize {
        (0..t_q.min(self.side))
            .flat_map(|i| (0..t_q.min(self.side)).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j))
            .count()
    }
}

impl fmt::Debug for LocalQuadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LocalQuadrant {} {}x{}", self.quadrant, self.side, self.side)?;
        for i in 0..self.side {
            for j in 0..self.side {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Splits into `[NW, NE, SW, SE]`, each flipped toward the center.
pub fn split_quadrants(grid: &OccupancyGrid) -> [LocalQuadrant; 4] {
    let q_w = grid.quadrant_width();
    QuadrantId::ALL.map(|quadrant| {
        let mut bits = Vec::with_capacity(q_w * q_w);
        for i in 0..q_w {
            let r = quadrant.global_row(i, q_w);
            for j in 0..q_w {
                bits.push(grid.occupied(r, quadrant.global_col(j, q_w)));
            }
        }
        LocalQuadrant {
            quadrant,
            side: q_w,
            bits,
        }
    })
}

/// Inverse of [`split_quadrants`]. Quadrants may be passed in any order
/// but each id must appear once.
pub fn merge_quadrants(quadrants: &[LocalQuadrant; 4]) -> Result<OccupancyGrid> {
    let q_w = quadrants[0].side;
    let mut seen = [false; 4];
    let mut grid = OccupancyGrid::empty(2 * q_w)?;
    for q in quadrants {
        if q.side != q_w {
            return Err(Error::LengthMismatch {
                expected: q_w,
                actual: q.side,
            });
        }
        if std::mem::replace(&mut seen[q.quadrant.index()], true) {
            return Err(Error::Contract(format!("quadrant {} given twice", q.quadrant)));
        }
        for i in 0..q_w {
            for j in 0..q_w {
                let site = SiteCoord::new(q.quadrant.global_row(i, q_w), q.quadrant.global_col(j, q_w));
                grid.set(site, q.get(i, j))?;
            }
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadrantSupply {
    pub quadrant: QuadrantId,
    pub available: usize,
    pub required: usize,
}

impl QuadrantSupply {
    pub fn feasible(&self) -> bool {
        self.available >= self.required
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub quadrants: [QuadrantSupply; 4],
}

impl FeasibilityReport {
    pub fn all_feasible(&self) -> bool {
        self.quadrants.iter().all(QuadrantSupply::feasible)
    }

    pub fn infeasible(&self) -> impl Iterator<Item = &QuadrantSupply> {
        self.quadrants.iter().filter(|q| !q.feasible())
    }
}

/// Per-quadrant atom supply against the `T_q^2` each quadrant must fill on
/// its own.
pub fn feasibility(grid: &OccupancyGrid, target: &TargetRegion) -> Result<FeasibilityReport> {
    if target.width() != grid.width() {
        return Err(Error::InvalidTarget {
            side: target.side(),
            width: grid.width(),
        });
    }
    let required = target.quadrant_side() * target.quadrant_side();
    let quads = split_quadrants(grid);
    Ok(FeasibilityReport {
        quadrants: quads.map(|q| QuadrantSupply {
            quadrant: q.quadrant(),
            available: q.popcount(),
            required,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_probabilities() {
        for seed in [0, 1, 99] {
            let full = random_load(8, LoadConfig::new(1.0, seed)).unwrap();
            assert_eq!(full.popcount(), 64);
            let empty = random_load(8, LoadConfig::new(0.0, seed)).unwrap();
            assert_eq!(empty.popcount(), 0);
        }
    }

    #[test]
    fn load_rejects_bad_inputs() {
        assert!(matches!(
            random_load(7, LoadConfig::new(0.5, 0)),
            Err(Error::InvalidDimension(7))
        ));
        assert!(matches!(
            random_load(0, LoadConfig::new(0.5, 0)),
            Err(Error::InvalidDimension(0))
        ));
        assert!(random_load(8, LoadConfig::new(1.5, 0)).is_err());
        assert!(random_load(8, LoadConfig::new(f64::NAN, 0)).is_err());
    }

    #[test]
    fn load_is_deterministic() {
        let a = random_load(20, LoadConfig::new(0.5, 7)).unwrap();
        let b = random_load(20, LoadConfig::new(0.5, 7)).unwrap();
        let c = random_load(20, LoadConfig::new(0.5, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn load_fixture_seed_one() {
        // First draws of SplitMix64(1) in [0,1): 0.5666.., 0.7458.., 0.9710..,
        // 0.4444..
        let g = random_load(2, LoadConfig::new(0.5, 1)).unwrap();
        assert_eq!(g.bits(), &[false, false, false, true]);
    }

    #[test]
    fn mean_popcount_at_half_fill() {
        let total: usize = (0..100)
            .map(|seed| random_load(50, LoadConfig::new(0.5, seed)).unwrap().popcount())
            .sum();
        let mean = total as f64 / 100.0;
        assert!((mean - 1250.0).abs() <= 75.0, "mean {mean}");
    }

    #[test]
    fn target_geometry() {
        let t = TargetRegion::new(50, 30).unwrap();
        assert_eq!((t.start(), t.end()), (10, 40));
        assert_eq!(t.quadrant_side(), 15);
        assert_eq!(t.sites().count(), 900);
        assert!(TargetRegion::new(10, 3).is_err());
        assert!(TargetRegion::new(10, 0).is_err());
        assert!(TargetRegion::new(10, 12).is_err());
        assert!(TargetRegion::new(10, 10).is_ok());
    }

    #[test]
    fn mapping_examples() {
        let nw = local_to_global(QuadrantId::NW, SiteCoord::new(0, 0), 10).unwrap();
        assert_eq!(nw, SiteCoord::new(4, 4));
        assert_eq!(
            global_to_local(nw, 10).unwrap(),
            (QuadrantId::NW, SiteCoord::new(0, 0))
        );
        assert_eq!(
            local_to_global(QuadrantId::SE, SiteCoord::new(2, 3), 10).unwrap(),
            SiteCoord::new(7, 8)
        );
        assert_eq!(
            local_to_global(QuadrantId::NE, SiteCoord::new(1, 0), 10).unwrap(),
            SiteCoord::new(3, 5)
        );
        assert_eq!(
            local_to_global(QuadrantId::SW, SiteCoord::new(0, 4), 10).unwrap(),
            SiteCoord::new(5, 0)
        );
    }

    #[test]
    fn mapping_out_of_range() {
        assert!(local_to_global(QuadrantId::NW, SiteCoord::new(5, 0), 10).is_err());
        assert!(global_to_local(SiteCoord::new(0, 10), 10).is_err());
        assert!(local_to_global(QuadrantId::NW, SiteCoord::new(0, 0), 9).is_err());
    }

    #[test]
    fn split_full_grid() {
        let grid = OccupancyGrid::full(10).unwrap();
        for q in split_quadrants(&grid) {
            assert_eq!(q.popcount(), 25);
        }
    }

    #[test]
    fn split_orients_center_corner() {
        let grid = OccupancyGrid::from_sites(10, &[(4, 4), (4, 5), (5, 4), (5, 5)]).unwrap();
        for q in split_quadrants(&grid) {
            assert!(q.get(0, 0), "{q:?}");
            assert_eq!(q.popcount(), 1);
        }
        let grid = OccupancyGrid::from_sites(10, &[(7, 8)]).unwrap();
        let [_, _, _, se] = split_quadrants(&grid);
        assert!(se.get(2, 3));
    }

    #[test]
    fn feasibility_reports() {
        let t = TargetRegion::new(10, 4).unwrap();
        let full = feasibility(&OccupancyGrid::full(10).unwrap(), &t).unwrap();
        assert!(full.all_feasible());
        assert!(full.quadrants.iter().all(|q| q.available == 25 && q.required == 4));

        let empty = feasibility(&OccupancyGrid::empty(10).unwrap(), &t).unwrap();
        assert_eq!(empty.infeasible().count(), 4);

        let grid = random_load(50, LoadConfig::new(0.5, 3)).unwrap();
        let large = feasibility(&grid, &TargetRegion::new(50, 30).unwrap()).unwrap();
        assert!(large.quadrants.iter().all(|q| q.required == 225));
    }

    #[test]
    fn from_rows_parses_symbols() {
        let g = OccupancyGrid::from_rows(&["1.", "·●"]).unwrap();
        assert_eq!(g.bits(), &[true, false, false, true]);
        assert!(OccupancyGrid::from_rows(&["1", "01"]).is_err());
    }
}
