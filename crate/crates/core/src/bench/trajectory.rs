//! JSON-lines trajectory export: one record per control cycle.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{Control, GuidanceMode, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeTag {
    Target,
    Detour,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub cycle: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
    /// Guidance in effect while this cycle's command was optimised.
    pub mode: ModeTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_min: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_vt: Option<[f64; 2]>,
    /// Solver wall-clock for this cycle in milliseconds.
    #[serde(default)]
    pub compute_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Vec<[f64; 2]>>,
}

impl TrajectoryRecord {
    pub fn new(cycle: usize, t: f64, state: State, control: Control, mode: &GuidanceMode) -> Self {
        let (tag, p_min, p_vt) = match *mode {
            GuidanceMode::TargetDirected => (ModeTag::Target, None, None),
            GuidanceMode::DetourInducing { p_min, p_vt } => {
                (ModeTag::Detour, Some(p_min.into()), Some(p_vt.into()))
            }
        };
        Self {
            cycle,
            t,
            x: state.x,
            y: state.y,
            theta: state.theta,
            v: control.v,
            omega: control.omega,
            mode: tag,
            p_min,
            p_vt,
            compute_ms: 0.0,
            predicted: None,
        }
    }
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[TrajectoryRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn emit_jsonl(records: &[TrajectoryRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<TrajectoryRecord>> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

pub fn parse_jsonl(text: &str) -> Result<Vec<TrajectoryRecord>> {
    read_jsonl(text.as_bytes())
}
