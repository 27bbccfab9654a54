use std::collections::{BTreeMap, VecDeque};

use crate::config::{road_endpoints, MineConfig, Point};
use crate::dispatch::{
    DumpSiteView, LoadSiteView, MineSnapshot, OrderKind, RoadView, ShovelView, SpotView, TruckView,
};
use crate::events::HazardParams;
use crate::ticklog::{
    DumpSiteTick, EventRecord, LoadSiteTick, RoadTick, ShovelTick, SpotTick, TickRecord, TruckTick,
};

use super::{loading_time, EquipmentStatus, Location, Resume, RoadStatus, TruckState};

#[derive(Debug, Clone, PartialEq)]
pub struct Journey {
    pub road: usize,
    pub from: Location,
    pub to: Location,
    pub departure: f64,
    pub arrival: f64,
    /// Completion rate frozen while the truck is halted for repair.
    pub halted: Option<f64>,
}

impl Journey {
    pub fn completion_rate(&self, now: f64) -> f64 {
        if let Some(c) = self.halted {
            return c;
        }
        let span = self.arrival - self.departure;
        if span <= 0.0 {
            return 1.0;
        }
        ((now - self.departure) / span).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct Truck {
    pub id: usize,
    pub name: String,
    pub truck_type: String,
    pub capacity: f64,
    /// Kilometres per minute.
    pub speed: f64,
    pub hazard: Option<HazardParams>,
    pub state: TruckState,
    pub journey: Option<Journey>,
    pub site: Option<Location>,
    pub payload: f64,
    /// Bumped whenever scheduled arrivals or retries for this truck become stale.
    pub epoch: u64,
    pub pending: Option<OrderKind>,
    pub resume: Option<Resume>,
    pub repair_started: Option<f64>,
    /// Where a broken truck left its road.
    pub stranded_at: Option<Point>,
}

#[derive(Debug, Clone)]
pub struct Shovel {
    pub id: usize,
    pub shovel_type: String,
    pub bucket_size: f64,
    pub cycle_time: f64,
    pub hazard: Option<HazardParams>,
    pub status: EquipmentStatus,
    pub queue: VecDeque<usize>,
    pub serving: Option<usize>,
}

impl Shovel {
    pub fn loading_time(&self, capacity: f64) -> f64 {
        loading_time(capacity, self.bucket_size, self.cycle_time)
    }
}

#[derive(Debug, Clone)]
pub struct LoadSite {
    pub id: usize,
    pub name: String,
    pub position: Point,
    pub shovels: Vec<Shovel>,
    /// Trucks at the site not yet assigned a shovel.
    pub parking: Vec<usize>,
}

impl LoadSite {
    pub fn is_eligible(&self) -> bool {
        self.shovels
            .iter()
            .any(|s| s.status != EquipmentStatus::Broken)
    }
}

#[derive(Debug, Clone)]
pub struct DumpSpot {
    pub id: usize,
    pub unload_time: f64,
    pub queue: VecDeque<usize>,
    pub serving: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DumpSite {
    pub id: usize,
    pub name: String,
    pub position: Point,
    pub spots: Vec<DumpSpot>,
    pub parking: Vec<usize>,
    pub total_tons_received: f64,
}

#[derive(Debug, Clone)]
pub struct Road {
    pub id: usize,
    pub ends: (Location, Location),
    pub distance: f64,
    pub status: RoadStatus,
    pub trucks_on_road: Vec<usize>,
    pub jam_count: u64,
    pub completed_trips: u64,
    pub maintenance_until: Option<f64>,
    /// Clearing times of jams drawn on this road.
    pub jams_until: Vec<f64>,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct World {
    pub clock: f64,
    pub charging: Point,
    pub trucks: Vec<Truck>,
    pub load_sites: Vec<LoadSite>,
    pub dump_sites: Vec<DumpSite>,
    pub roads: Vec<Road>,
    road_lookup: BTreeMap<(Location, Location), usize>,
}

fn key(a: Location, b: Location) -> (Location, Location) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl World {
    pub fn new(config: &MineConfig) -> Self {
        let mut trucks = Vec::new();
        for fleet in &config.charging_site.fleets {
            for k in 0..fleet.count {
                trucks.push(Truck {
                    id: trucks.len(),
                    name: format!("{}-{k}", fleet.truck_type),
                    truck_type: fleet.truck_type.clone(),
                    capacity: fleet.capacity,
                    speed: fleet.speed,
                    hazard: fleet.hazard.clone(),
                    state: TruckState::AtCharging,
                    journey: None,
                    site: Some(Location::Charging),
                    payload: 0.0,
                    epoch: 0,
                    pending: None,
                    resume: None,
                    repair_started: None,
                    stranded_at: None,
                });
            }
        }
        let load_sites = config
            .load_sites
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut shovels = Vec::new();
                for spec in &s.shovels {
                    for _ in 0..spec.count {
                        shovels.push(Shovel {
                            id: shovels.len(),
                            shovel_type: spec.shovel_type.clone(),
                            bucket_size: spec.bucket_size,
                            cycle_time: spec.cycle_time,
                            hazard: spec.hazard.clone(),
                            status: EquipmentStatus::Up,
                            queue: VecDeque::new(),
                            serving: None,
                        });
                    }
                }
                LoadSite {
                    id: i,
                    name: s.name.clone(),
                    position: s.position,
                    shovels,
                    parking: Vec::new(),
                }
            })
            .collect();
        let dump_sites = config
            .dump_sites
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut spots = Vec::new();
                for spec in &s.spots {
                    for _ in 0..spec.count {
                        spots.push(DumpSpot {
                            id: spots.len(),
                            unload_time: spec.unload_time,
                            queue: VecDeque::new(),
                            serving: None,
                        });
                    }
                }
                DumpSite {
                    id: i,
                    name: s.name.clone(),
                    position: s.position,
                    spots,
                    parking: Vec::new(),
                    total_tons_received: 0.0,
                }
            })
            .collect();
        let mut roads = Vec::new();
        let mut road_lookup = BTreeMap::new();
        for (a, b) in road_endpoints(config.load_sites.len(), config.dump_sites.len()) {
            road_lookup.insert(key(a, b), roads.len());
            roads.push(Road {
                id: roads.len(),
                ends: (a, b),
                distance: config.road_distance(a, b),
                status: RoadStatus::Up,
                trucks_on_road: Vec::new(),
                jam_count: 0,
                completed_trips: 0,
                maintenance_until: None,
                jams_until: Vec::new(),
            });
        }
        Self {
            clock: 0.0,
            charging: config.charging_site.position,
            trucks,
            load_sites,
            dump_sites,
            roads,
            road_lookup,
        }
    }

    pub fn road_between(&self, a: Location, b: Location) -> Option<usize> {
        self.road_lookup.get(&key(a, b)).copied()
    }

    pub fn position(&self, loc: Location) -> Point {
        match loc {
            Location::Charging => self.charging,
            Location::Load(i) => self.load_sites[i].position,
            Location::Dump(i) => self.dump_sites[i].position,
        }
    }

    /// Linear interpolation along the current journey by completion rate.
    pub fn truck_position(&self, truck: usize, now: f64) -> Point {
        let t = &self.trucks[truck];
        if let Some(j) = &t.journey {
            return self
                .position(j.from)
                .lerp(self.position(j.to), j.completion_rate(now));
        }
        if let Some(site) = t.site {
            return self.position(site);
        }
        t.stranded_at.unwrap_or(self.charging)
    }

    pub fn snapshot(&self, requester: Option<usize>) -> MineSnapshot {
        let trucks: Vec<TruckView> = self
            .trucks
            .iter()
            .map(|t| TruckView {
                id: t.id,
                truck_type: t.truck_type.clone(),
                capacity: t.capacity,
                speed: t.speed,
                state: t.state,
                location: t.site,
                target: t.journey.as_ref().map(|j| j.to),
            })
            .collect();
        let mut load_sites: Vec<LoadSiteView> = self
            .load_sites
            .iter()
            .map(|s| LoadSiteView {
                id: s.id,
                name: s.name.clone(),
                position: s.position,
                shovels: s
                    .shovels
                    .iter()
                    .map(|sh| ShovelView {
                        id: sh.id,
                        shovel_type: sh.shovel_type.clone(),
                        bucket_size: sh.bucket_size,
                        cycle_time: sh.cycle_time,
                        status: sh.status,
                        queue: sh.queue.iter().copied().collect(),
                        serving: sh.serving,
                    })
                    .collect(),
                parking: s.parking.clone(),
                en_route: Vec::new(),
            })
            .collect();
        let mut dump_sites: Vec<DumpSiteView> = self
            .dump_sites
            .iter()
            .map(|d| DumpSiteView {
                id: d.id,
                name: d.name.clone(),
                position: d.position,
                spots: d
                    .spots
                    .iter()
                    .map(|k| SpotView {
                        id: k.id,
                        unload_time: k.unload_time,
                        queue: k.queue.iter().copied().collect(),
                        serving: k.serving,
                    })
                    .collect(),
                parking: d.parking.clone(),
                en_route: Vec::new(),
            })
            .collect();
        for t in &self.trucks {
            if t.state == TruckState::Broken {
                continue;
            }
            match t.journey.as_ref().map(|j| j.to) {
                Some(Location::Load(i)) => load_sites[i].en_route.push(t.id),
                Some(Location::Dump(i)) => dump_sites[i].en_route.push(t.id),
                _ => {}
            }
        }
        let roads = self
            .roads
            .iter()
            .map(|r| RoadView {
                id: r.id,
                ends: r.ends,
                distance: r.distance,
                status: r.status,
                load: r.trucks_on_road.len(),
                jam_count: r.jam_count,
            })
            .collect();
        MineSnapshot::from_parts(self.clock, requester, trucks, load_sites, dump_sites, roads)
    }

    pub fn tick_record(&self, index: usize, events: Vec<EventRecord>) -> TickRecord {
        let now = self.clock;
        TickRecord {
            index,
            time: now,
            trucks: self
                .trucks
                .iter()
                .map(|t| {
                    let p = self.truck_position(t.id, now);
                    TruckTick {
                        id: t.id,
                        state: t.state,
                        x: p.x,
                        y: p.y,
                        target: t.journey.as_ref().map(|j| j.to),
                        payload: t.payload,
                    }
                })
                .collect(),
            load_sites: self
                .load_sites
                .iter()
                .map(|s| LoadSiteTick {
                    id: s.id,
                    parking: s.parking.len(),
                    shovels: s
                        .shovels
                        .iter()
                        .map(|sh| ShovelTick {
                            status: sh.status,
                            queue: sh.queue.len(),
                            busy: sh.serving.is_some(),
                        })
                        .collect(),
                })
                .collect(),
            dump_sites: self
                .dump_sites
                .iter()
                .map(|d| DumpSiteTick {
                    id: d.id,
                    parking: d.parking.len(),
                    tons: d.total_tons_received,
                    spots: d
                        .spots
                        .iter()
                        .map(|k| SpotTick {
                            queue: k.queue.len(),
                            busy: k.serving.is_some(),
                        })
                        .collect(),
                })
                .collect(),
            roads: self
                .roads
                .iter()
                .map(|r| RoadTick {
                    id: r.id,
                    status: r.status,
                    occupancy: r.trucks_on_road.len(),
                    jam_count: r.jam_count,
                    jammed: r.jams_until.iter().any(|&end| end > now),
                })
                .collect(),
            events,
        }
    }
}
