//! Event-trace replay against the assignment engine.
//!
//! Trace format, one event per line (blank lines and `#` comments skipped):
//!
//! ```text
//! <seq> admit <RT|NRT> <x_km> <y_km>
//! <seq> release <request_id>
//! ```
//!
//! An admitted call's request id is the `seq` of its admit line.

use std::fmt::{self, Write as _};

use anyhow::{anyhow, bail, Context, Result};
use cim_core::{
    AssignmentDecision, CellId, Engine, Point, RequestId, SpectrumPlan, TrafficClass, TrafficRequest, Zone,
};

use crate::config::RunConfig;

pub const DECISIONS_HEADER: &str = "seq,outcome,channel_id,displaced_request,side_effect_count";

/// Ids for calls preloaded into neighbour cells, far above any trace seq.
const PRELOAD_BASE: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Admit { class: TrafficClass, position: Point },
    Release { request: RequestId },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceLine {
    pub line: usize,
    pub seq: u64,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceError {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trace line {}: {}", self.line, self.reason)
    }
}

impl std::error::Error for TraceError {}

fn parse_class(s: &str) -> Option<TrafficClass> {
    match s {
        "RT" => Some(TrafficClass::RealTime),
        "NRT" => Some(TrafficClass::NonRealTime),
        _ => None,
    }
}

fn parse_line(line: usize, text: &str) -> Result<Option<TraceLine>, TraceError> {
    let err = |reason: String| TraceError { line, reason };
    let text = text.trim();
    if text.is_empty() || text.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = text.split_whitespace().collect();
    let seq: u64 = fields[0]
        .parse()
        .map_err(|_| err(format!("invalid sequence number `{}`", fields[0])))?;
    let event = match fields.get(1).copied() {
        Some("admit") => {
            let [_, _, class, x, y] = fields[..] else {
                return Err(err("expected `<seq> admit <RT|NRT> <x_km> <y_km>`".into()));
            };
            let class = parse_class(class).ok_or_else(|| err(format!("unknown traffic class `{class}`")))?;
            let coord = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("invalid coordinate `{s}`")))
            };
            Event::Admit {
                class,
                position: Point::new(coord(x)?, coord(y)?),
            }
        }
        Some("release") => {
            let [_, _, id] = fields[..] else {
                return Err(err("expected `<seq> release <request_id>`".into()));
            };
            let id = id.parse().map_err(|_| err(format!("invalid request id `{id}`")))?;
            Event::Release { request: RequestId(id) }
        }
        Some(other) => return Err(err(format!("unknown event `{other}`"))),
        None => return Err(err("missing event".into())),
    };
    Ok(Some(TraceLine { line, seq, event }))
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceLine>, TraceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if let Some(line) = parse_line(i + 1, raw)? {
            out.push(line);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionRow {
    pub seq: u64,
    pub outcome: String,
    pub channel: Option<u32>,
    pub displaced: Option<u64>,
    pub side_effects: usize,
}

impl DecisionRow {
    fn from_admit(seq: u64, d: &AssignmentDecision) -> Self {
        DecisionRow {
            seq,
            outcome: d.outcome.as_str().to_owned(),
            channel: d.channel.map(|c| c.0),
            displaced: d.displaced.map(|x| x.request.0),
            side_effects: d.side_effects.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub rows: Vec<DecisionRow>,
    /// First invariant violation seen, if any.
    pub violation: Option<String>,
}

impl ReplayReport {
    pub fn conservation_ok(&self) -> bool {
        self.violation.is_none()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(DECISIONS_HEADER);
        out.push('\n');
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.seq,
                r.outcome,
                opt(r.channel.map(|c| c.to_string())),
                opt(r.displaced.map(|d| d.to_string())),
                r.side_effects
            )
            .unwrap();
        }
        out
    }

    pub fn conservation_line(&self) -> String {
        match &self.violation {
            None => "conservation check: PASS".to_owned(),
            Some(v) => format!("conservation check: FAIL ({v})"),
        }
    }
}

pub fn build_engine(config: &RunConfig) -> Result<Engine> {
    let layout = config.layout()?;
    let plan = SpectrumPlan::new(&layout, config.channels_per_cell)?;
    let mut engine = Engine::new(layout, plan, config.policy(), config.inner_ratio)?;
    let mut next = PRELOAD_BASE;
    for (&cell, &count) in &config.donor_occupancy {
        for _ in 0..count {
            engine
                .admit_local(RequestId(next), CellId(cell), TrafficClass::NonRealTime, Zone::Outer)?
                .ok_or_else(|| anyhow!("donor_occupancy: cell {cell} has no room"))?;
            next += 1;
        }
    }
    Ok(engine)
}

pub fn replay(config: &RunConfig, trace: &[TraceLine]) -> Result<ReplayReport> {
    let mut engine = build_engine(config)?;
    let mut rows = Vec::with_capacity(trace.len());
    let mut violation = None;
    for t in trace {
        let at = || format!("trace line {}", t.line);
        let row = match t.event {
            Event::Admit { class, position } => {
                if t.seq >= PRELOAD_BASE {
                    bail!(TraceError {
                        line: t.line,
                        reason: format!("sequence number {} is reserved", t.seq),
                    });
                }
                let decision = engine
                    .admit(TrafficRequest {
                        id: RequestId(t.seq),
                        class,
                        position,
                    })
                    .with_context(at)?;
                DecisionRow::from_admit(t.seq, &decision)
            }
            Event::Release { request } => {
                let released = engine.release(request).with_context(at)?;
                DecisionRow {
                    seq: t.seq,
                    outcome: "Released".to_owned(),
                    channel: Some(released.channel.0),
                    displaced: None,
                    side_effects: released.side_effects.len(),
                }
            }
        };
        rows.push(row);
        if let Err(e) = engine.check_invariants() {
            violation = Some(format!("after trace line {}: {e}", t.line));
            break;
        }
    }
    Ok(ReplayReport { rows, violation })
}
