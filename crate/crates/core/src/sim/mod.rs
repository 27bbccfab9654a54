//! Discrete-event kernel.
//!
//! A run starts with every truck at the charging site and advances a single
//! clock through a time-ordered queue until the configured duration. All
//! randomness comes from per-entity substreams of the run seed, so a
//! `(config, seed, policy)` triple always produces the same event pool.

mod kernel;
mod queue;
mod state;
mod world;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use kernel::{run_simulation, run_with_options, RunOptions, SimError, SimResult};
pub use queue::{EventQueue, SimTime};
pub use state::{transition, IllegalTransition, Resume, Trigger, TruckState};
pub use world::{DumpSite, DumpSpot, Journey, LoadSite, Road, Shovel, Truck, World};

/// Tolerance for comparing event times against the horizon.
pub const TIME_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Charging,
    Load(usize),
    Dump(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Charging => write!(f, "charging"),
            Location::Load(i) => write!(f, "load:{i}"),
            Location::Dump(i) => write!(f, "dump:{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquipmentStatus {
    Up,
    UnderRepair,
    Broken,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoadStatus {
    Up,
    UnderMaintenance,
}

/// Minutes for a shovel to fill `capacity` tons: whole buckets times cycle time.
pub fn loading_time(capacity: f64, bucket_size: f64, cycle_time: f64) -> f64 {
    // guard against 60/20 = 3.0000000000000004 rounding up to 4 buckets
    let buckets = (capacity / bucket_size - 1e-9).ceil().max(1.0);
    buckets * cycle_time
}

/// Kinematic travel time in minutes.
pub fn travel_time(distance: f64, speed: f64) -> Result<f64, SimError> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(SimError::Config(format!(
            "road distance must be > 0, found {distance}"
        )));
    }
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(SimError::Config(format!(
            "truck speed must be > 0, found {speed}"
        )));
    }
    Ok(distance / speed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn travel_time_is_distance_over_speed() {
        assert_eq!(travel_time(5.0, 0.5).unwrap(), 10.0);
        assert!((travel_time(2.4, 0.4).unwrap() - 6.0).abs() < 1e-12);
        assert!(travel_time(0.0, 0.5).is_err());
        assert!(travel_time(5.0, 0.0).is_err());
    }

    #[test]
    fn loading_time_rounds_up_whole_buckets() {
        assert_eq!(loading_time(60.0, 20.0, 2.0), 6.0);
        assert_eq!(loading_time(61.0, 20.0, 2.0), 8.0);
        assert_eq!(loading_time(5.0, 20.0, 2.0), 2.0);
        assert_eq!(loading_time(0.3 * 3.0, 0.3, 1.0), 3.0);
    }
}
