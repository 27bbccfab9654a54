use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::Point;
use crate::sim::{EquipmentStatus, Location, RoadStatus, TruckState};

/// Read-only view of the mine handed to policies.
#[derive(Debug, Clone, Serialize)]
pub struct MineSnapshot {
    pub clock: f64,
    pub requester: Option<usize>,
    pub trucks: Vec<TruckView>,
    pub load_sites: Vec<LoadSiteView>,
    pub dump_sites: Vec<DumpSiteView>,
    pub roads: Vec<RoadView>,
    #[serde(skip)]
    pub(crate) road_lookup: BTreeMap<(Location, Location), usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruckView {
    pub id: usize,
    pub truck_type: String,
    pub capacity: f64,
    pub speed: f64,
    pub state: TruckState,
    /// Site the truck is parked at; `None` while travelling.
    pub location: Option<Location>,
    /// Destination of the current journey.
    pub target: Option<Location>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShovelView {
    pub id: usize,
    pub shovel_type: String,
    pub bucket_size: f64,
    pub cycle_time: f64,
    pub status: EquipmentStatus,
    pub queue: Vec<usize>,
    pub serving: Option<usize>,
}

impl ShovelView {
    /// Minutes to fill a truck of `capacity` tons.
    pub fn loading_time(&self, capacity: f64) -> f64 {
        crate::sim::loading_time(capacity, self.bucket_size, self.cycle_time)
    }

    /// Waiting plus in-service trucks.
    pub fn queue_len(&self) -> usize {
        self.queue.len() + usize::from(self.serving.is_some())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LoadSiteView {
    pub id: usize,
    pub name: String,
    pub position: Point,
    pub shovels: Vec<ShovelView>,
    /// Trucks at the site without a shovel.
    pub parking: Vec<usize>,
    /// Trucks travelling toward the site.
    pub en_route: Vec<usize>,
}

impl LoadSiteView {
    /// A load site is a valid destination while any shovel is not broken.
    pub fn is_eligible(&self) -> bool {
        self.shovels
            .iter()
            .any(|s| s.status != EquipmentStatus::Broken)
    }

    pub fn up_shovels(&self) -> impl Iterator<Item = usize> + '_ {
        self.shovels
            .iter()
            .filter(|s| s.status == EquipmentStatus::Up)
            .map(|s| s.id)
    }

    pub fn queue_len(&self) -> usize {
        self.shovels
            .iter()
            .map(ShovelView::queue_len)
            .sum::<usize>()
            + self.parking.len()
    }

    /// Every truck at the site: queued, in service, or parked.
    pub fn present(&self) -> impl Iterator<Item = usize> + '_ {
        self.shovels
            .iter()
            .flat_map(|s| s.serving.iter().chain(s.queue.iter()))
            .chain(self.parking.iter())
            .copied()
    }

    pub fn shortest_queue_shovel(&self) -> Option<usize> {
        super::argmin_by(self.up_shovels(), |j| self.shovels[j].queue_len() as f64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpotView {
    pub id: usize,
    pub unload_time: f64,
    pub queue: Vec<usize>,
    pub serving: Option<usize>,
}

impl SpotView {
    pub fn queue_len(&self) -> usize {
        self.queue.len() + usize::from(self.serving.is_some())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DumpSiteView {
    pub id: usize,
    pub name: String,
    pub position: Point,
    pub spots: Vec<SpotView>,
    pub parking: Vec<usize>,
    pub en_route: Vec<usize>,
}

impl DumpSiteView {
    pub fn queue_len(&self) -> usize {
        self.spots.iter().map(SpotView::queue_len).sum::<usize>() + self.parking.len()
    }

    pub fn present(&self) -> impl Iterator<Item = usize> + '_ {
        self.spots
            .iter()
            .flat_map(|s| s.serving.iter().chain(s.queue.iter()))
            .chain(self.parking.iter())
            .copied()
    }

    pub fn shortest_queue_spot(&self) -> Option<usize> {
        super::argmin_by(0..self.spots.len(), |k| self.spots[k].queue_len() as f64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoadView {
    pub id: usize,
    pub ends: (Location, Location),
    /// Kilometres.
    pub distance: f64,
    pub status: RoadStatus,
    pub load: usize,
    pub jam_count: u64,
}

impl MineSnapshot {
    pub fn from_parts(
        clock: f64,
        requester: Option<usize>,
        trucks: Vec<TruckView>,
        load_sites: Vec<LoadSiteView>,
        dump_sites: Vec<DumpSiteView>,
        roads: Vec<RoadView>,
    ) -> Self {
        let road_lookup = roads
            .iter()
            .map(|r| {
                let (a, b) = r.ends;
                (if a <= b { (a, b) } else { (b, a) }, r.id)
            })
            .collect();
        Self {
            clock,
            requester,
            trucks,
            load_sites,
            dump_sites,
            roads,
            road_lookup,
        }
    }

    pub fn requester(&self) -> Option<&TruckView> {
        self.requester.map(|i| &self.trucks[i])
    }

    pub fn road(&self, a: Location, b: Location) -> Option<&RoadView> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.road_lookup.get(&key).map(|&i| &self.roads[i])
    }

    pub fn distance(&self, a: Location, b: Location) -> Option<f64> {
        self.road(a, b).map(|r| r.distance)
    }

    /// Load sites with at least one shovel that is not broken.
    pub fn eligible_load_sites(&self) -> Vec<usize> {
        self.load_sites
            .iter()
            .filter(|s| s.is_eligible())
            .map(|s| s.id)
            .collect()
    }

    pub fn dump_site_ids(&self) -> Vec<usize> {
        (0..self.dump_sites.len()).collect()
    }
}
