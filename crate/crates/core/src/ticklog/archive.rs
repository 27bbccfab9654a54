use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{EventPool, TickRecord};
use crate::config::MineConfig;
use crate::kpi::{summarize, KpiSummary};
use crate::sim::TIME_EPSILON;

pub const SCHEMA_VERSION: u32 = 1;

/// First line of a tick file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveHeader {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub policy: String,
    pub duration: f64,
    pub tick_interval: f64,
    pub config: MineConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickArchive {
    pub header: ArchiveHeader,
    pub ticks: Vec<TickRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("reading tick file: {0}")]
    Io(#[from] io::Error),
    #[error("tick file is empty")]
    Empty,
    #[error("bad header: {0}")]
    Header(String),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("header config hash {expected} does not match embedded config {found}")]
    ConfigHash { expected: String, found: String },
    #[error("corrupt record on line {line} (after t={after}): {message}")]
    Corrupt {
        line: usize,
        after: f64,
        message: String,
    },
    #[error("missing tick {index} at t={expected}; next record is t={found}")]
    Gap {
        index: usize,
        expected: f64,
        found: f64,
    },
    #[error("archive ends at t={last} before the run end t={duration}")]
    Truncated { last: f64, duration: f64 },
    #[error("unexpected record at t={time} past the run end")]
    Trailing { time: f64 },
    #[error("events in tick at t={time}: {message}")]
    Events { time: f64, message: String },
}

/// Snapshot instants of a run: every multiple of `interval` up to `duration`
/// inclusive, plus `duration` itself when it is not a multiple.
pub fn tick_times(duration: f64, interval: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while (k as f64) * interval <= duration + TIME_EPSILON {
        out.push(k as f64 * interval);
        k += 1;
    }
    if out.last().is_none_or(|&t| duration - t > TIME_EPSILON) {
        out.push(duration);
    }
    out
}

impl TickArchive {
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for t in &self.ticks {
            serde_json::to_writer(&mut w, t)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn to_ndjson(&self) -> String {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    /// The event pool, reassembled from the per-tick event batches.
    pub fn event_pool(&self) -> Result<EventPool, ReplayError> {
        let records = self
            .ticks
            .iter()
            .flat_map(|t| t.events.iter().cloned())
            .collect();
        EventPool::from_records(records).map_err(|message| ReplayError::Events {
            time: self.ticks.last().map_or(0.0, |t| t.time),
            message,
        })
    }

    /// KPIs recomputed from the archive alone. ADL is absent because
    /// wall-clock timings are not archived.
    pub fn kpis(&self) -> Result<KpiSummary, ReplayError> {
        Ok(summarize(&self.event_pool()?, &self.header.config, None))
    }
}

/// Reads and validates a tick file: header first, then one record per
/// snapshot instant in order with no gaps.
pub fn replay<R: BufRead>(reader: R) -> Result<TickArchive, ReplayError> {
    let mut lines = reader.lines().enumerate();
    let header_line = loop {
        match lines.next() {
            None => return Err(ReplayError::Empty),
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let header: ArchiveHeader =
        serde_json::from_str(&header_line).map_err(|e| ReplayError::Header(e.to_string()))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(ReplayError::SchemaVersion(header.schema_version));
    }
    let found = header.config.hash();
    if found != header.config_hash {
        return Err(ReplayError::ConfigHash {
            expected: header.config_hash,
            found,
        });
    }
    let expected = tick_times(header.duration, header.tick_interval);
    let mut ticks: Vec<TickRecord> = Vec::with_capacity(expected.len());
    let mut next_seq = 0u64;
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let after = ticks.last().map_or(f64::NEG_INFINITY, |t| t.time);
        let record: TickRecord = serde_json::from_str(&line).map_err(|e| ReplayError::Corrupt {
            line: i + 1,
            after,
            message: e.to_string(),
        })?;
        let index = ticks.len();
        let Some(&want) = expected.get(index) else {
            return Err(ReplayError::Trailing { time: record.time });
        };
        if record.index != index || (record.time - want).abs() > TIME_EPSILON {
            return Err(ReplayError::Gap {
                index,
                expected: want,
                found: record.time,
            });
        }
        for e in &record.events {
            if e.seq != next_seq || e.time > record.time + TIME_EPSILON || e.time < after {
                return Err(ReplayError::Events {
                    time: record.time,
                    message: format!("event seq {} out of order (expected {next_seq})", e.seq),
                });
            }
            next_seq += 1;
        }
        ticks.push(record);
    }
    if ticks.len() < expected.len() {
        return Err(ReplayError::Truncated {
            last: ticks.last().map_or(f64::NAN, |t| t.time),
            duration: header.duration,
        });
    }
    Ok(TickArchive { header, ticks })
}
