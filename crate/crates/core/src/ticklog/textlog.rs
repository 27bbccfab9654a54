use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use super::{EventPool, EventRecord, PoolEvent};
use crate::dispatch::OrderKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
}

impl fmt::Display for LogLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            LogLevel::Error => "ERROR",
            LogLevel::Warn => "WARN",
            LogLevel::Info => "INFO",
            LogLevel::Debug => "DEBUG",
        })
    }
}

impl FromStr for LogLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "error" => Ok(LogLevel::Error),
            "warn" | "warning" => Ok(LogLevel::Warn),
            "info" => Ok(LogLevel::Info),
            "debug" | "trace" => Ok(LogLevel::Debug),
            other => Err(format!("unknown log level {other:?}")),
        }
    }
}

/// Level and message of one pool record.
pub fn format_event(record: &EventRecord) -> (LogLevel, String) {
    use LogLevel::*;
    use PoolEvent as E;
    match &record.event {
        E::RunStarted {
            policy,
            seed,
            trucks,
        } => (Info, format!("run started: {policy}, seed {seed}, {trucks} trucks")),
        E::StateChanged {
            truck, from, to, ..
        } => (Debug, format!("truck {truck}: {} -> {}", from.label(), to.label())),
        E::OrderIssued {
            truck,
            order,
            target,
        } => {
            let target = match order {
                OrderKind::Init | OrderKind::Back => format!("load:{target}"),
                OrderKind::Haul => format!("dump:{target}"),
                OrderKind::Shovel { .. } => format!("shovel {target}"),
                OrderKind::Spot { .. } => format!("spot {target}"),
            };
            (Info, format!("truck {truck}: {order} -> {target}"))
        }
        E::DispatchRequested { truck, reason } => {
            (Debug, format!("truck {truck}: dispatch requested ({reason:?})"))
        }
        E::NoTarget {
            truck,
            order,
            retry_at,
        } => (
            Info,
            format!("truck {truck}: no target for {order} order, retry at {retry_at:.3}"),
        ),
        E::PolicyFault {
            truck,
            order,
            returned,
            attempt,
        } => (
            Warn,
            format!("truck {truck}: policy returned invalid {order} target {returned} (attempt {attempt})"),
        ),
        E::Departed {
            truck,
            road,
            from,
            to,
            arrival,
            ..
        } => (
            Debug,
            format!("truck {truck}: {from} -> {to} on road {road}, arrives {arrival:.3}"),
        ),
        E::Arrived { truck, site } => (Debug, format!("truck {truck}: arrived at {site}")),
        E::LoadingStarted {
            truck,
            site,
            shovel,
        } => (Debug, format!("truck {truck}: loading at load:{site} shovel {shovel}")),
        E::LoadingCompleted { truck, tons, .. } => {
            (Debug, format!("truck {truck}: loaded {tons} t"))
        }
        E::UnloadingStarted { truck, site, spot } => {
            (Debug, format!("truck {truck}: unloading at dump:{site} spot {spot}"))
        }
        E::UnloadingCompleted {
            truck, site, tons, ..
        } => (Info, format!("truck {truck}: delivered {tons} t to dump:{site}")),
        E::Jam {
            road,
            truck,
            position,
            duration,
            delay,
        } => (
            Info,
            match delay {
                Some(d) => format!(
                    "jam on road {road} at {position:.3} for {duration:.2} min delays truck {truck} by {d:.2} min"
                ),
                None => format!(
                    "jam on road {road} at {position:.3} for {duration:.2} min clears before truck {truck}"
                ),
            },
        ),
        E::MaintenancePenalty {
            road,
            truck,
            fraction,
            added,
        } => (
            Info,
            format!("truck {truck}: road {road} maintenance adds {added:.2} min ({fraction:.3})"),
        ),
        E::RoadMaintenanceStarted { road, duration } => {
            (Warn, format!("road {road}: maintenance for {duration:.2} min"))
        }
        E::RoadMaintenanceEnded { road } => (Info, format!("road {road}: maintenance over")),
        E::TruckRepairStarted { truck, duration } => {
            (Warn, format!("truck {truck}: repair for {duration:.2} min"))
        }
        E::TruckRepairEnded { truck } => (Info, format!("truck {truck}: repaired")),
        E::TruckBrokeDown { truck, tons_lost } => (
            Error,
            format!("truck {truck}: broke down, {tons_lost} t lost"),
        ),
        E::TruckReturnedToCharging { truck } => {
            (Info, format!("truck {truck}: towed back to charging"))
        }
        E::ShovelRepairStarted {
            site,
            shovel,
            duration,
        } => (
            Warn,
            format!("load:{site} shovel {shovel}: repair for {duration:.2} min"),
        ),
        E::ShovelRepairEnded { site, shovel } => {
            (Info, format!("load:{site} shovel {shovel}: repaired"))
        }
        E::ShovelBrokeDown {
            site,
            shovel,
            requeued,
        } => (
            Error,
            format!("load:{site} shovel {shovel}: broke down, {requeued} trucks re-dispatched"),
        ),
        E::FaultIgnored { subject } => (Debug, format!("fault on {subject:?} ignored")),
        E::RunEnded {} => (Info, "run ended".to_string()),
    }
}

/// Writes every record at `level` or more severe, one line each, keyed by
/// sequence number.
pub fn write_text_log<W: Write>(pool: &EventPool, level: LogLevel, mut w: W) -> io::Result<()> {
    for r in pool.iter() {
        let (l, msg) = format_event(r);
        if l <= level {
            writeln!(w, "[{:>10.3}] #{:06} {l:<5} {msg}", r.time, r.seq)?;
        }
    }
    w.flush()
}
