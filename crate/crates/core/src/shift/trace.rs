//! Event trace of a simulation, serialized as one JSON object per line.

use serde::{Deserialize, Serialize};

use crate::population::AntId;
use crate::vertex::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceRecord {
    TickStart {
        tick: u64,
    },
    /// `ant` split into `children` (bits 0 and 1), each of weight `2^-weight_exp`.
    Split {
        tick: u64,
        ant: AntId,
        node: String,
        children: [AntId; 2],
        weight_exp: u64,
    },
    /// The position of `ant` grew to `vertex` by emitting `value`.
    Emit {
        tick: u64,
        ant: AntId,
        value: u64,
        vertex: Vertex,
    },
    Halt {
        tick: u64,
        ant: AntId,
    },
    CascadeStart {
        tick: u64,
    },
    /// Shadows of `ants` temporarily set to `vertex`.
    ShiftTemp {
        tick: u64,
        vertex: Vertex,
        ants: Vec<AntId>,
    },
    CatFound {
        tick: u64,
        vertex: Vertex,
        cat_index: usize,
        cat_clock_used: u64,
    },
    CatNotFound {
        tick: u64,
        vertex: Vertex,
        cat_clock_used: u64,
    },
    /// Completed shift: shadows of `ants` now equal their positions.
    Shift {
        tick: u64,
        vertex: Vertex,
        ants: Vec<AntId>,
        weight: String,
        cat_index: Option<usize>,
        cat_clock_used: u64,
    },
    CascadeEnd {
        tick: u64,
        shifts: usize,
    },
    /// `wk[i]` is the measure of ants with at least `i` shifts.
    Measure {
        tick: u64,
        wk: Vec<String>,
    },
}

impl TraceRecord {
    pub fn tick(&self) -> u64 {
        match *self {
            TraceRecord::TickStart { tick }
            | TraceRecord::Split { tick, .. }
            | TraceRecord::Emit { tick, .. }
            | TraceRecord::Halt { tick, .. }
            | TraceRecord::CascadeStart { tick }
            | TraceRecord::ShiftTemp { tick, .. }
            | TraceRecord::CatFound { tick, .. }
            | TraceRecord::CatNotFound { tick, .. }
            | TraceRecord::Shift { tick, .. }
            | TraceRecord::CascadeEnd { tick, .. }
            | TraceRecord::Measure { tick, .. } => tick,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, serde_json::Error> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trace { records })
    }

    pub fn shifts(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records
            .iter()
            .filter(|r| matches!(r, TraceRecord::Shift { .. }))
    }
}
