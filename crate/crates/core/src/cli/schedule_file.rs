//! Line-delimited JSON schedule records.
//!
//! One record per line, tagged by `kind`: every `move` first (ordinals
//! strictly increasing), then one `trace` per atom, then a single
//! `summary`.
//!
//! ```text
//! {"kind":"move","ordinal":0,"iteration":1,"axis":"rows","direction":"E","steps":1,"rows":[3,6],"cols":[0,1,2]}
//! {"kind":"trace","origin":{"row":3,"col":0},"hops":[["E",1]],"final":{"row":3,"col":1}}
//! {"kind":"summary","iterations":1,"success":true,"residual_holes":[],"move_count":1}
//! ```

use serde::{Deserialize, Serialize};

use crate::aod::{Direction, ScheduledMove, TweezerMove};
use crate::error::{Error, Result};
use crate::grid::SiteCoord;
use crate::scheduler::{AtomTrace, ScheduleResult};
use crate::shift_kernel::Axis;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub ordinal: usize,
    pub iteration: usize,
    pub axis: Axis,
    pub direction: Direction,
    pub steps: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl MoveRecord {
    pub fn to_tweezer(&self) -> Result<TweezerMove> {
        TweezerMove::new(
            self.rows.iter().copied(),
            self.cols.iter().copied(),
            self.direction,
            self.steps,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub iterations: usize,
    pub success: bool,
    pub residual_holes: Vec<SiteCoord>,
    pub move_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Record {
    Move(MoveRecord),
    Trace(AtomTrace),
    Summary(SummaryRecord),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleFile {
    pub moves: Vec<MoveRecord>,
    pub traces: Vec<AtomTrace>,
    pub summary: SummaryRecord,
}

impl ScheduleFile {
    pub fn from_schedule(result: &ScheduleResult, lowered: &[ScheduledMove]) -> Self {
        let moves: Vec<MoveRecord> = lowered
            .iter()
            .enumerate()
            .map(|(ordinal, m)| MoveRecord {
                ordinal,
                iteration: m.iteration,
                axis: m.axis,
                direction: m.tweezer.direction,
                steps: m.tweezer.steps,
                rows: m.tweezer.rows.iter().copied().collect(),
                cols: m.tweezer.cols.iter().copied().collect(),
            })
            .collect();
        let summary = SummaryRecord {
            iterations: result.iterations,
            success: result.success,
            residual_holes: result.residual_holes.clone(),
            move_count: moves.len(),
        };
        Self {
            moves,
            traces: result.traces.clone(),
            summary,
        }
    }

    pub fn tweezer_moves(&self) -> Result<Vec<TweezerMove>> {
        self.moves.iter().map(MoveRecord::to_tweezer).collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = Vec::new();
        let records = self
            .moves
            .iter()
            .cloned()
            .map(Record::Move)
            .chain(self.traces.iter().cloned().map(Record::Trace))
            .chain(std::iter::once(Record::Summary(self.summary.clone())));
        for record in records {
            serde_json::to_writer(&mut out, &record).expect("records serialize");
            out.push(b'\n');
        }
        String::from_utf8(out).expect("json is utf-8")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut moves: Vec<MoveRecord> = Vec::new();
        let mut traces = Vec::new();
        let mut summary = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| Error::ScheduleParse { line, message };
            if raw.trim().is_empty() {
                continue;
            }
            if summary.is_some() {
                return Err(err("record after summary".into()));
            }
            let record: Record = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
            match record {
                Record::Move(m) => {
                    if !traces.is_empty() {
                        return Err(err("move record after trace records".into()));
                    }
                    if let Some(prev) = moves.last() {
                        if m.ordinal <= prev.ordinal {
                            return Err(err(format!(
                                "ordinal {} does not follow {}",
                                m.ordinal, prev.ordinal
                            )));
                        }
                    }
                    moves.push(m);
                }
                Record::Trace(t) => traces.push(t),
                Record::Summary(s) => summary = Some(s),
            }
        }
        let summary = summary.ok_or(Error::ScheduleParse {
            line: text.lines().count(),
            message: "missing summary record".into(),
        })?;
        Ok(Self {
            moves,
            traces,
            summary,
        })
    }
}
