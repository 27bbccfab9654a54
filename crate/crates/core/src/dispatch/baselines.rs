//! Rule-based baseline policies.

use rand::Rng;

use super::{argmin_by, Decision, DispatchPolicy, LoadSiteView, MineSnapshot, PolicyError};
use crate::events::SimRng;
use crate::sim::Location;

fn requester_location(policy: &str, snapshot: &MineSnapshot) -> Result<Location, PolicyError> {
    snapshot
        .requester()
        .and_then(|t| t.location)
        .ok_or_else(|| PolicyError::new(policy, "order requested without a parked requester"))
}

fn requester_capacity(policy: &str, snapshot: &MineSnapshot) -> Result<f64, PolicyError> {
    snapshot
        .requester()
        .map(|t| t.capacity)
        .ok_or_else(|| PolicyError::new(policy, "order requested without a requester"))
}

fn uniform(candidates: &[usize], rng: &mut SimRng) -> Option<usize> {
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[rng.gen_range(0..candidates.len())])
    }
}

/// Constant policy: always the lowest-index eligible site, shovel and spot.
#[derive(Debug, Default, Clone)]
pub struct NaiveDispatcher;

impl DispatchPolicy for NaiveDispatcher {
    fn name(&self) -> &str {
        "NaiveDispatcher"
    }

    fn give_init_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        Ok(s.eligible_load_sites().first().copied())
    }

    fn give_haul_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        Ok(s.dump_site_ids().first().copied())
    }

    fn give_back_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        Ok(s.eligible_load_sites().first().copied())
    }

    fn choose_shovel(&mut self, s: &MineSnapshot, site: usize, _: &mut SimRng) -> Decision {
        Ok(s.load_sites[site].up_shovels().next())
    }

    fn choose_dump_spot(&mut self, s: &MineSnapshot, site: usize, _: &mut SimRng) -> Decision {
        Ok((!s.dump_sites[site].spots.is_empty()).then_some(0))
    }
}

/// Uniform choice over eligible targets at every decision.
#[derive(Debug, Default, Clone)]
pub struct RandomDispatcher;

impl DispatchPolicy for RandomDispatcher {
    fn name(&self) -> &str {
        "RandomDispatcher"
    }

    fn give_init_order(&mut self, s: &MineSnapshot, rng: &mut SimRng) -> Decision {
        Ok(uniform(&s.eligible_load_sites(), rng))
    }

    fn give_haul_order(&mut self, s: &MineSnapshot, rng: &mut SimRng) -> Decision {
        Ok(uniform(&s.dump_site_ids(), rng))
    }

    fn give_back_order(&mut self, s: &MineSnapshot, rng: &mut SimRng) -> Decision {
        Ok(uniform(&s.eligible_load_sites(), rng))
    }

    fn choose_shovel(&mut self, s: &MineSnapshot, site: usize, rng: &mut SimRng) -> Decision {
        let up: Vec<usize> = s.load_sites[site].up_shovels().collect();
        Ok(uniform(&up, rng))
    }

    fn choose_dump_spot(&mut self, s: &MineSnapshot, site: usize, rng: &mut SimRng) -> Decision {
        let spots: Vec<usize> = (0..s.dump_sites[site].spots.len()).collect();
        Ok(uniform(&spots, rng))
    }
}

/// Greedy on road distance from the truck's current site.
#[derive(Debug, Default, Clone)]
pub struct NearestDispatcher;

impl NearestDispatcher {
    fn nearest(s: &MineSnapshot, from: Location, targets: Vec<Location>) -> Option<usize> {
        argmin_by(0..targets.len(), |k| {
            s.distance(from, targets[k]).unwrap_or(f64::INFINITY)
        })
        .map(|k| match targets[k] {
            Location::Load(i) | Location::Dump(i) => i,
            Location::Charging => unreachable!("charging is never a target"),
        })
    }

    fn nearest_load(&self, s: &MineSnapshot) -> Decision {
        let from = requester_location(self.name(), s)?;
        let targets = s
            .eligible_load_sites()
            .into_iter()
            .filter(|&i| Location::Load(i) != from)
            .map(Location::Load)
            .collect();
        Ok(Self::nearest(s, from, targets))
    }
}

impl DispatchPolicy for NearestDispatcher {
    fn name(&self) -> &str {
        "NearestDispatcher"
    }

    fn give_init_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        self.nearest_load(s)
    }

    fn give_haul_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        let from = requester_location(self.name(), s)?;
        let targets = s.dump_site_ids().into_iter().map(Location::Dump).collect();
        Ok(Self::nearest(s, from, targets))
    }

    fn give_back_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        self.nearest_load(s)
    }
}

/// Shortest queue, counting trucks already on the road toward a site.
/// Initial orders are uniform random.
#[derive(Debug, Default, Clone)]
pub struct SqDispatcher;

impl SqDispatcher {
    pub fn load_site_metric(site: &LoadSiteView) -> f64 {
        (site.queue_len() + site.en_route.len()) as f64
    }
}

impl DispatchPolicy for SqDispatcher {
    fn name(&self) -> &str {
        "SQDispatcher"
    }

    fn give_init_order(&mut self, s: &MineSnapshot, rng: &mut SimRng) -> Decision {
        Ok(uniform(&s.eligible_load_sites(), rng))
    }

    fn give_haul_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        Ok(argmin_by(s.dump_site_ids(), |j| {
            let d = &s.dump_sites[j];
            (d.queue_len() + d.en_route.len()) as f64
        }))
    }

    fn give_back_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        Ok(argmin_by(s.eligible_load_sites(), |i| {
            Self::load_site_metric(&s.load_sites[i])
        }))
    }
}

/// Shortest processing time first: expected queue work per server plus the
/// requester's own service time, counting trucks on the road as queued.
#[derive(Debug, Default, Clone)]
pub struct SptfDispatcher;

impl SptfDispatcher {
    /// Expected minutes until a truck of `capacity` tons is loaded at `site`.
    pub fn load_site_time(s: &MineSnapshot, site: &LoadSiteView, capacity: f64) -> f64 {
        let mut servers: Vec<_> = site.up_shovels().map(|j| &site.shovels[j]).collect();
        if servers.is_empty() {
            // shovels under repair still count toward the estimate
            servers = site
                .shovels
                .iter()
                .filter(|sh| sh.status != crate::sim::EquipmentStatus::Broken)
                .collect();
        }
        if servers.is_empty() {
            return f64::INFINITY;
        }
        let best = |cap: f64| {
            servers
                .iter()
                .map(|sh| sh.loading_time(cap))
                .fold(f64::INFINITY, f64::min)
        };
        let work: f64 = site
            .present()
            .chain(site.en_route.iter().copied())
            .map(|t| best(s.trucks[t].capacity))
            .sum();
        work / servers.len() as f64 + best(capacity)
    }

    pub fn dump_site_time(s: &MineSnapshot, site: usize) -> f64 {
        let d = &s.dump_sites[site];
        let best = d
            .spots
            .iter()
            .map(|k| k.unload_time)
            .fold(f64::INFINITY, f64::min);
        let ahead = d.present().count() + d.en_route.len();
        ahead as f64 * best / d.spots.len() as f64 + best
    }

    fn best_load_site(&self, s: &MineSnapshot) -> Decision {
        let capacity = requester_capacity(self.name(), s)?;
        Ok(argmin_by(s.eligible_load_sites(), |i| {
            Self::load_site_time(s, &s.load_sites[i], capacity)
        }))
    }
}

impl DispatchPolicy for SptfDispatcher {
    fn name(&self) -> &str {
        "SPTFDispatcher"
    }

    fn give_init_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        self.best_load_site(s)
    }

    fn give_haul_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        Ok(argmin_by(s.dump_site_ids(), |j| Self::dump_site_time(s, j)))
    }

    fn give_back_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        self.best_load_site(s)
    }

    fn choose_shovel(&mut self, s: &MineSnapshot, site: usize, _: &mut SimRng) -> Decision {
        let capacity = requester_capacity(self.name(), s)?;
        let site = &s.load_sites[site];
        Ok(argmin_by(site.up_shovels(), |j| {
            let sh = &site.shovels[j];
            let work: f64 = sh
                .serving
                .iter()
                .chain(sh.queue.iter())
                .map(|&t| sh.loading_time(s.trucks[t].capacity))
                .sum();
            work + sh.loading_time(capacity)
        }))
    }

    fn choose_dump_spot(&mut self, s: &MineSnapshot, site: usize, _: &mut SimRng) -> Decision {
        let d = &s.dump_sites[site];
        Ok(argmin_by(0..d.spots.len(), |k| {
            (d.spots[k].queue_len() + 1) as f64 * d.spots[k].unload_time
        }))
    }
}

#[cfg(test)]
pub(crate) mod testkit {
    use super::super::*;
    use crate::config::Point;
    use crate::sim::{EquipmentStatus, Location, RoadStatus, TruckState};

    pub fn truck(id: usize, capacity: f64, location: Option<Location>) -> TruckView {
        TruckView {
            id,
            truck_type: "T".into(),
            capacity,
            speed: 0.5,
            state: TruckState::EmptyRun,
            location,
            target: None,
        }
    }

    pub fn shovel(id: usize, bucket: f64, cycle: f64) -> ShovelView {
        ShovelView {
            id,
            shovel_type: "S".into(),
            bucket_size: bucket,
            cycle_time: cycle,
            status: EquipmentStatus::Up,
            queue: vec![],
            serving: None,
        }
    }

    pub fn load_site(id: usize, shovels: Vec<ShovelView>) -> LoadSiteView {
        LoadSiteView {
            id,
            name: format!("L{id}"),
            position: Point::new(id as f64, 0.0),
            shovels,
            parking: vec![],
            en_route: vec![],
        }
    }

    pub fn dump_site(id: usize, spots: usize, unload: f64) -> DumpSiteView {
        DumpSiteView {
            id,
            name: format!("D{id}"),
            position: Point::new(id as f64, 5.0),
            spots: (0..spots)
                .map(|k| SpotView {
                    id: k,
                    unload_time: unload,
                    queue: vec![],
                    serving: None,
                })
                .collect(),
            parking: vec![],
            en_route: vec![],
        }
    }

    /// Snapshot whose roads from `from` to each load site have the given lengths.
    pub fn snapshot(
        trucks: Vec<TruckView>,
        requester: usize,
        load_sites: Vec<LoadSiteView>,
        dump_sites: Vec<DumpSiteView>,
        load_distances: &[(Location, Vec<f64>)],
    ) -> MineSnapshot {
        let mut roads = Vec::new();
        for (from, ds) in load_distances {
            for (j, d) in ds.iter().enumerate() {
                let to = match from {
                    Location::Dump(_) | Location::Charging => Location::Load(j),
                    Location::Load(_) => Location::Dump(j),
                };
                roads.push(RoadView {
                    id: roads.len(),
                    ends: (*from, to),
                    distance: *d,
                    status: RoadStatus::Up,
                    load: 0,
                    jam_count: 0,
                });
            }
        }
        MineSnapshot::from_parts(0.0, Some(requester), trucks, load_sites, dump_sites, roads)
    }
}
