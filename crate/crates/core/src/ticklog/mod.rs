//! Event pool, per-tick snapshots, replay and frame rendering.

mod archive;
mod render;
mod textlog;

use serde::{Deserialize, Serialize};

use crate::dispatch::OrderKind;
use crate::events::Subject;
use crate::sim::{EquipmentStatus, Location, RoadStatus, Trigger, TruckState};

pub use archive::{replay, tick_times, ArchiveHeader, ReplayError, TickArchive, SCHEMA_VERSION};
pub use render::{render_frame, state_colour, STATE_COLOURS};
pub use textlog::{format_event, write_text_log, LogLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestReason {
    ShovelBreakdown,
    Retry,
}

/// Payload of one event pool record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoolEvent {
    RunStarted {
        policy: String,
        seed: u64,
        trucks: usize,
    },
    StateChanged {
        truck: usize,
        from: TruckState,
        to: TruckState,
        trigger: Trigger,
    },
    OrderIssued {
        truck: usize,
        order: OrderKind,
        target: usize,
    },
    DispatchRequested {
        truck: usize,
        reason: RequestReason,
    },
    NoTarget {
        truck: usize,
        order: OrderKind,
        retry_at: f64,
    },
    PolicyFault {
        truck: usize,
        order: OrderKind,
        returned: usize,
        attempt: u8,
    },
    Departed {
        truck: usize,
        road: usize,
        from: Location,
        to: Location,
        /// Kinematic travel time before penalties.
        base_minutes: f64,
        arrival: f64,
    },
    Arrived {
        truck: usize,
        site: Location,
    },
    LoadingStarted {
        truck: usize,
        site: usize,
        shovel: usize,
    },
    LoadingCompleted {
        truck: usize,
        site: usize,
        shovel: usize,
        tons: f64,
    },
    UnloadingStarted {
        truck: usize,
        site: usize,
        spot: usize,
    },
    UnloadingCompleted {
        truck: usize,
        site: usize,
        spot: usize,
        tons: f64,
    },
    Jam {
        road: usize,
        truck: usize,
        position: f64,
        duration: f64,
        /// Extra minutes for the departing truck; absent when it passes unaffected.
        delay: Option<f64>,
    },
    MaintenancePenalty {
        road: usize,
        truck: usize,
        fraction: f64,
        added: f64,
    },
    RoadMaintenanceStarted {
        road: usize,
        duration: f64,
    },
    RoadMaintenanceEnded {
        road: usize,
    },
    TruckRepairStarted {
        truck: usize,
        duration: f64,
    },
    TruckRepairEnded {
        truck: usize,
    },
    TruckBrokeDown {
        truck: usize,
        tons_lost: f64,
    },
    TruckReturnedToCharging {
        truck: usize,
    },
    ShovelRepairStarted {
        site: usize,
        shovel: usize,
        duration: f64,
    },
    ShovelRepairEnded {
        site: usize,
        shovel: usize,
    },
    ShovelBrokeDown {
        site: usize,
        shovel: usize,
        requeued: usize,
    },
    FaultIgnored {
        subject: Subject,
    },
    RunEnded {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub seq: u64,
    #[serde(flatten)]
    pub event: PoolEvent,
}

/// Append-only, totally ordered event log.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventPool {
    records: Vec<EventRecord>,
}

impl EventPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an event at `time`; panics if time would run backwards.
    pub fn push(&mut self, time: f64, event: PoolEvent) -> u64 {
        if let Some(last) = self.records.last() {
            assert!(
                time >= last.time,
                "event pool time went backwards: {time} < {}",
                last.time
            );
        }
        let seq = self.records.len() as u64;
        self.records.push(EventRecord { time, seq, event });
        seq
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EventRecord> {
        self.records.iter()
    }

    /// Rebuilds a pool from records, checking that `(time, seq)` strictly increases
    /// and that sequence numbers are contiguous from zero.
    pub fn from_records(records: Vec<EventRecord>) -> Result<Self, String> {
        for (i, r) in records.iter().enumerate() {
            if r.seq != i as u64 {
                return Err(format!(
                    "expected event seq {i}, found {} at t={}",
                    r.seq, r.time
                ));
            }
            if i > 0 && r.time < records[i - 1].time {
                return Err(format!(
                    "event {} at t={} precedes previous event",
                    r.seq, r.time
                ));
            }
        }
        Ok(Self { records })
    }

    /// End of run, when recorded.
    pub fn end_time(&self) -> Option<f64> {
        self.records
            .iter()
            .rev()
            .find(|r| matches!(r.event, PoolEvent::RunEnded {}))
            .map(|r| r.time)
    }

    pub fn truck_count(&self) -> Option<usize> {
        self.records.iter().find_map(|r| match r.event {
            PoolEvent::RunStarted { trucks, .. } => Some(trucks),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruckTick {
    pub id: usize,
    pub state: TruckState,
    pub x: f64,
    pub y: f64,
    pub target: Option<Location>,
    pub payload: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShovelTick {
    pub status: EquipmentStatus,
    pub queue: usize,
    pub busy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSiteTick {
    pub id: usize,
    pub parking: usize,
    pub shovels: Vec<ShovelTick>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotTick {
    pub queue: usize,
    pub busy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpSiteTick {
    pub id: usize,
    pub parking: usize,
    pub tons: f64,
    pub spots: Vec<SpotTick>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadTick {
    pub id: usize,
    pub status: RoadStatus,
    pub occupancy: usize,
    pub jam_count: u64,
    /// A jam is active on the road at this instant.
    pub jammed: bool,
}

/// Snapshot of the world at one tick, plus every event logged since the
/// previous tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub index: usize,
    pub time: f64,
    pub trucks: Vec<TruckTick>,
    pub load_sites: Vec<LoadSiteTick>,
    pub dump_sites: Vec<DumpSiteTick>,
    pub roads: Vec<RoadTick>,
    pub events: Vec<EventRecord>,
}

impl TickRecord {
    pub fn waiting_trucks(&self) -> usize {
        self.trucks.iter().filter(|t| t.state.is_waiting()).count()
    }

    pub fn tons_received(&self) -> f64 {
        self.dump_sites.iter().map(|d| d.tons).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_serialize_flat_with_kind_tag() {
        let r = EventRecord {
            time: 1.5,
            seq: 3,
            event: PoolEvent::UnloadingCompleted {
                truck: 2,
                site: 0,
                spot: 1,
                tons: 60.0,
            },
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["kind"], "unloading_completed");
        assert_eq!(v["tons"], 60.0);
        assert_eq!(serde_json::from_value::<EventRecord>(v).unwrap(), r);
    }

    #[test]
    #[should_panic(expected = "backwards")]
    fn pool_rejects_time_travel() {
        let mut p = EventPool::new();
        p.push(2.0, PoolEvent::RunEnded {});
        p.push(1.0, PoolEvent::RunEnded {});
    }

    #[test]
    fn pool_rebuild_detects_gaps() {
        let mut p = EventPool::new();
        p.push(0.0, PoolEvent::RunEnded {});
        p.push(1.0, PoolEvent::RunEnded {});
        let mut recs = p.records().to_vec();
        assert!(EventPool::from_records(recs.clone()).is_ok());
        recs.remove(0);
        assert!(EventPool::from_records(recs).is_err());
    }
}
