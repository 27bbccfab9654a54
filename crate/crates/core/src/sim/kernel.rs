use log::{debug, trace};
use web_time::Instant;

use crate::config::{ConfigError, MineConfig};
use crate::dispatch::{DispatchPolicy, OrderKind, PolicyError};
use crate::events::{
    sample_availability, sample_jam, sample_penalty_fraction, substream, FaultOutcome,
    HazardParams, RandomEvent, RandomEventKind, SimRng, Stream, Subject,
};
use crate::kpi::{summarize, DecisionLog, KpiSummary};
use crate::ticklog::{
    tick_times, ArchiveHeader, EventPool, PoolEvent, RequestReason, TickArchive, SCHEMA_VERSION,
};

use super::queue::EventQueue;
use super::world::{Journey, World};
use super::{
    transition, travel_time, EquipmentStatus, Location, Resume, RoadStatus, Trigger, TruckState,
    TIME_EPSILON,
};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("duration must be > 0, found {0}")]
    InvalidDuration(f64),
    #[error(transparent)]
    InvalidConfig(#[from] ConfigError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation bug at t={time}: truck {truck}: {source}")]
    IllegalTransition {
        time: f64,
        truck: usize,
        #[source]
        source: super::IllegalTransition,
    },
    #[error("run aborted at t={time}: {error}")]
    Policy {
        time: f64,
        error: PolicyError,
        /// Decision timings gathered up to the failure.
        decisions: DecisionLog,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Turns off jams, maintenance and faults regardless of configuration.
    pub random_events: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            random_events: true,
        }
    }
}

/// Output of one run.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub policy: String,
    pub seed: u64,
    pub duration: f64,
    pub events: EventPool,
    pub archive: TickArchive,
    pub decisions: DecisionLog,
    pub kpis: KpiSummary,
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Tick(usize),
    Arrive {
        truck: usize,
        epoch: u64,
    },
    LoadDone {
        site: usize,
        shovel: usize,
        truck: usize,
    },
    UnloadDone {
        site: usize,
        spot: usize,
        truck: usize,
    },
    ShovelRepairDone {
        site: usize,
        shovel: usize,
    },
    TruckRepairDone {
        truck: usize,
    },
    RoadMaintenanceDone {
        road: usize,
    },
    Retry {
        truck: usize,
        epoch: u64,
    },
    ReturnedToCharging {
        truck: usize,
    },
}

impl Action {
    fn phase(self) -> u8 {
        // ticks observe the instant after everything else at the same time
        match self {
            Action::Tick(_) => 1,
            _ => 0,
        }
    }
}

pub fn run_simulation(
    config: &MineConfig,
    policy: &mut dyn DispatchPolicy,
    seed: u64,
    duration: f64,
) -> Result<SimResult, SimError> {
    run_with_options(config, policy, seed, duration, &RunOptions::default())
}

pub fn run_with_options(
    config: &MineConfig,
    policy: &mut dyn DispatchPolicy,
    seed: u64,
    duration: f64,
    options: &RunOptions,
) -> Result<SimResult, SimError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(SimError::InvalidDuration(duration));
    }
    config.validate()?;
    let kernel = Kernel::new(config, policy, seed, duration, options);
    kernel.run()
}

struct Kernel<'a> {
    config: &'a MineConfig,
    policy: &'a mut dyn DispatchPolicy,
    seed: u64,
    duration: f64,
    random_events: bool,
    world: World,
    queue: EventQueue<Action>,
    pool: EventPool,
    archive: TickArchive,
    decisions: DecisionLog,
    tick_times: Vec<f64>,
    emitted: usize,
    policy_rng: SimRng,
    truck_rng: Vec<SimRng>,
    shovel_rng: Vec<Vec<SimRng>>,
    jam_rng: Vec<SimRng>,
    maintenance_rng: Vec<SimRng>,
}

impl<'a> Kernel<'a> {
    fn new(
        config: &'a MineConfig,
        policy: &'a mut dyn DispatchPolicy,
        seed: u64,
        duration: f64,
        options: &RunOptions,
    ) -> Self {
        let world = World::new(config);
        let interval = config.simulation.tick_interval;
        let tick_times = tick_times(duration, interval);
        let truck_rng = (0..world.trucks.len())
            .map(|i| substream(seed, Stream::Truck(i)))
            .collect();
        let shovel_rng = world
            .load_sites
            .iter()
            .map(|s| {
                (0..s.shovels.len())
                    .map(|j| {
                        substream(
                            seed,
                            Stream::Shovel {
                                site: s.id,
                                shovel: j,
                            },
                        )
                    })
                    .collect()
            })
            .collect();
        let jam_rng = (0..world.roads.len())
            .map(|r| substream(seed, Stream::RoadJam(r)))
            .collect();
        let maintenance_rng = (0..world.roads.len())
            .map(|r| substream(seed, Stream::RoadMaintenance(r)))
            .collect();
        let archive = TickArchive {
            header: ArchiveHeader {
                schema_version: SCHEMA_VERSION,
                config_hash: config.hash(),
                seed,
                policy: policy.name().to_string(),
                duration,
                tick_interval: interval,
                config: config.clone(),
            },
            ticks: Vec::with_capacity(tick_times.len()),
        };
        Self {
            config,
            seed,
            duration,
            random_events: options.random_events,
            world,
            queue: EventQueue::new(),
            pool: EventPool::new(),
            archive,
            decisions: DecisionLog::default(),
            tick_times,
            emitted: 0,
            policy_rng: substream(seed, Stream::Policy),
            truck_rng,
            shovel_rng,
            jam_rng,
            maintenance_rng,
            policy,
        }
    }

    fn now(&self) -> f64 {
        self.world.clock
    }

    fn log(&mut self, event: PoolEvent) {
        trace!("t={:.3} {:?}", self.world.clock, event);
        self.pool.push(self.world.clock, event);
    }

    fn schedule(&mut self, time: f64, action: Action) {
        self.queue.push(time, action.phase(), action);
    }

    fn run(mut self) -> Result<SimResult, SimError> {
        self.schedule(0.0, Action::Tick(0));
        let started = Instant::now();
        let init = self.policy.initialize(&self.world.snapshot(None));
        self.decisions.record_init(started.elapsed().as_secs_f64());
        if let Err(error) = init {
            return Err(self.policy_abort(error));
        }
        self.log(PoolEvent::RunStarted {
            policy: self.policy.name().to_string(),
            seed: self.seed,
            trucks: self.world.trucks.len(),
        });
        for truck in 0..self.world.trucks.len() {
            self.dispatch_init(truck)?;
        }
        let last_tick = self.tick_times.len() - 1;
        while let Some((time, _, action)) = self.queue.pop() {
            if time > self.duration + TIME_EPSILON {
                break;
            }
            self.world.clock = time;
            self.handle(action)?;
            if matches!(action, Action::Tick(k) if k == last_tick) {
                break;
            }
        }
        debug!(
            "{} seed {}: {} events, {} ticks",
            self.policy.name(),
            self.seed,
            self.pool.len(),
            self.archive.ticks.len()
        );
        let kpis = summarize(&self.pool, self.config, Some(&self.decisions));
        Ok(SimResult {
            policy: self.policy.name().to_string(),
            seed: self.seed,
            duration: self.duration,
            events: self.pool,
            archive: self.archive,
            decisions: self.decisions,
            kpis,
        })
    }

    fn policy_abort(&self, error: PolicyError) -> SimError {
        SimError::Policy {
            time: self.now(),
            error,
            decisions: self.decisions.clone(),
        }
    }

    fn handle(&mut self, action: Action) -> Result<(), SimError> {
        match action {
            Action::Tick(k) => self.on_tick(k),
            Action::Arrive { truck, epoch } => self.on_arrive(truck, epoch),
            Action::LoadDone {
                site,
                shovel,
                truck,
            } => self.on_load_done(site, shovel, truck),
            Action::UnloadDone { site, spot, truck } => self.on_unload_done(site, spot, truck),
            Action::ShovelRepairDone { site, shovel } => {
                let sh = &mut self.world.load_sites[site].shovels[shovel];
                if sh.status == EquipmentStatus::UnderRepair {
                    sh.status = EquipmentStatus::Up;
                    self.log(PoolEvent::ShovelRepairEnded { site, shovel });
                    self.try_start_loading(site, shovel)?;
                }
                Ok(())
            }
            Action::TruckRepairDone { truck } => self.on_truck_repaired(truck),
            Action::RoadMaintenanceDone { road } => {
                let r = &mut self.world.roads[road];
                r.status = RoadStatus::Up;
                r.maintenance_until = None;
                self.log(PoolEvent::RoadMaintenanceEnded { road });
                Ok(())
            }
            Action::Retry { truck, epoch } => self.on_retry(truck, epoch),
            Action::ReturnedToCharging { truck } => {
                let t = &mut self.world.trucks[truck];
                t.site = Some(Location::Charging);
                t.stranded_at = None;
                self.log(PoolEvent::TruckReturnedToCharging { truck });
                Ok(())
            }
        }
    }

    fn set_state(&mut self, truck: usize, trigger: Trigger) -> Result<(), SimError> {
        let from = self.world.trucks[truck].state;
        let to = transition(from, trigger).map_err(|source| SimError::IllegalTransition {
            time: self.now(),
            truck,
            source,
        })?;
        self.world.trucks[truck].state = to;
        self.log(PoolEvent::StateChanged {
            truck,
            from,
            to,
            trigger,
        });
        Ok(())
    }

    // ---- decisions ----

    fn eligible(&self, order: OrderKind) -> Vec<usize> {
        let w = &self.world;
        match order {
            OrderKind::Init | OrderKind::Back => w
                .load_sites
                .iter()
                .filter(|s| s.is_eligible())
                .map(|s| s.id)
                .collect(),
            OrderKind::Haul => (0..w.dump_sites.len()).collect(),
            OrderKind::Shovel { site } => w.load_sites[site]
                .shovels
                .iter()
                .filter(|s| s.status == EquipmentStatus::Up)
                .map(|s| s.id)
                .collect(),
            OrderKind::Spot { site } => (0..w.dump_sites[site].spots.len()).collect(),
        }
    }

    /// Asks the policy for a target. An invalid id is re-requested once; a
    /// second invalid answer leaves the truck without an order.
    fn decide(&mut self, truck: usize, order: OrderKind) -> Result<Option<usize>, SimError> {
        let eligible = self.eligible(order);
        if eligible.is_empty() {
            return Ok(None);
        }
        let snapshot = self.world.snapshot(Some(truck));
        for attempt in 1..=2u8 {
            let started = Instant::now();
            let rng = &mut self.policy_rng;
            let answer = match order {
                OrderKind::Init => self.policy.give_init_order(&snapshot, rng),
                OrderKind::Haul => self.policy.give_haul_order(&snapshot, rng),
                OrderKind::Back => self.policy.give_back_order(&snapshot, rng),
                OrderKind::Shovel { site } => self.policy.choose_shovel(&snapshot, site, rng),
                OrderKind::Spot { site } => self.policy.choose_dump_spot(&snapshot, site, rng),
            };
            let elapsed = started.elapsed().as_secs_f64();
            match answer {
                Err(error) => return Err(self.policy_abort(error)),
                Ok(None) => return Ok(None),
                Ok(Some(target)) if eligible.contains(&target) => {
                    self.decisions.record_order(elapsed);
                    self.log(PoolEvent::OrderIssued {
                        truck,
                        order,
                        target,
                    });
                    return Ok(Some(target));
                }
                Ok(Some(returned)) => self.log(PoolEvent::PolicyFault {
                    truck,
                    order,
                    returned,
                    attempt,
                }),
            }
        }
        Ok(None)
    }

    /// Leaves the truck where it is and asks again one tick later.
    fn idle(&mut self, truck: usize, order: OrderKind) {
        let retry_at = self.now() + self.config.simulation.tick_interval;
        let t = &mut self.world.trucks[truck];
        t.pending = Some(order);
        let (epoch, site, state) = (t.epoch, t.site, t.state);
        match (site, state) {
            (Some(Location::Load(s)), TruckState::WaitingForLoading) => self.park_load(truck, s),
            (Some(Location::Dump(d)), TruckState::WaitingForUnloading) => self.park_dump(truck, d),
            _ => {}
        }
        self.log(PoolEvent::NoTarget {
            truck,
            order,
            retry_at,
        });
        self.schedule(retry_at, Action::Retry { truck, epoch });
    }

    fn park_load(&mut self, truck: usize, site: usize) {
        let parking = &mut self.world.load_sites[site].parking;
        if !parking.contains(&truck) {
            parking.push(truck);
        }
    }

    fn park_dump(&mut self, truck: usize, site: usize) {
        let parking = &mut self.world.dump_sites[site].parking;
        if !parking.contains(&truck) {
            parking.push(truck);
        }
    }

    fn unpark(&mut self, truck: usize) {
        match self.world.trucks[truck].site {
            Some(Location::Load(s)) => self.world.load_sites[s].parking.retain(|&t| t != truck),
            Some(Location::Dump(d)) => self.world.dump_sites[d].parking.retain(|&t| t != truck),
            _ => {}
        }
    }

    fn on_retry(&mut self, truck: usize, epoch: u64) -> Result<(), SimError> {
        let t = &mut self.world.trucks[truck];
        if t.epoch != epoch || t.state == TruckState::Broken {
            return Ok(());
        }
        let Some(order) = t.pending.take() else {
            return Ok(());
        };
        self.log(PoolEvent::DispatchRequested {
            truck,
            reason: RequestReason::Retry,
        });
        match order {
            OrderKind::Init => self.dispatch_init(truck),
            OrderKind::Haul => self.dispatch_haul(truck),
            OrderKind::Back => self.dispatch_back(truck),
            OrderKind::Shovel { site } => self.assign_shovel(truck, site),
            OrderKind::Spot { site } => self.assign_spot(truck, site),
        }
    }

    fn dispatch_init(&mut self, truck: usize) -> Result<(), SimError> {
        match self.decide(truck, OrderKind::Init)? {
            Some(site) => {
                self.set_state(truck, Trigger::Dispatched)?;
                self.depart(truck, Location::Load(site))
            }
            None => {
                self.idle(truck, OrderKind::Init);
                Ok(())
            }
        }
    }

    fn dispatch_haul(&mut self, truck: usize) -> Result<(), SimError> {
        match self.decide(truck, OrderKind::Haul)? {
            Some(site) => self.depart(truck, Location::Dump(site)),
            None => {
                self.idle(truck, OrderKind::Haul);
                Ok(())
            }
        }
    }

    /// Back order from a dump site, or a re-dispatch away from a load site
    /// that has lost every shovel.
    fn dispatch_back(&mut self, truck: usize) -> Result<(), SimError> {
        match self.decide(truck, OrderKind::Back)? {
            Some(site) => {
                let here = self.world.trucks[truck].site;
                if here == Some(Location::Load(site)) {
                    return self.assign_shovel(truck, site);
                }
                if self.world.trucks[truck].state == TruckState::WaitingForLoading {
                    self.unpark(truck);
                    self.set_state(truck, Trigger::Redispatched)?;
                }
                self.depart(truck, Location::Load(site))
            }
            None => {
                self.idle(truck, OrderKind::Back);
                Ok(())
            }
        }
    }

    fn assign_shovel(&mut self, truck: usize, site: usize) -> Result<(), SimError> {
        if !self.world.load_sites[site].is_eligible() {
            return self.dispatch_back(truck);
        }
        match self.decide(truck, OrderKind::Shovel { site })? {
            Some(shovel) => {
                self.enqueue_at_shovel(truck, site, shovel)?;
                Ok(())
            }
            None => {
                self.idle(truck, OrderKind::Shovel { site });
                Ok(())
            }
        }
    }

    /// Appends the truck to a shovel queue and returns the number of trucks
    /// waiting ahead of it.
    fn enqueue_at_shovel(
        &mut self,
        truck: usize,
        site: usize,
        shovel: usize,
    ) -> Result<usize, SimError> {
        self.unpark(truck);
        let queue = &mut self.world.load_sites[site].shovels[shovel].queue;
        queue.push_back(truck);
        let position = queue.len() - 1;
        self.try_start_loading(site, shovel)?;
        Ok(position)
    }

    fn try_start_loading(&mut self, site: usize, shovel: usize) -> Result<(), SimError> {
        let sh = &mut self.world.load_sites[site].shovels[shovel];
        if sh.status != EquipmentStatus::Up || sh.serving.is_some() {
            return Ok(());
        }
        let Some(truck) = sh.queue.pop_front() else {
            return Ok(());
        };
        sh.serving = Some(truck);
        let minutes = sh.loading_time(self.world.trucks[truck].capacity);
        self.set_state(truck, Trigger::LoadingStarted)?;
        self.log(PoolEvent::LoadingStarted {
            truck,
            site,
            shovel,
        });
        let at = self.now() + minutes;
        self.schedule(
            at,
            Action::LoadDone {
                site,
                shovel,
                truck,
            },
        );
        Ok(())
    }

    fn on_load_done(&mut self, site: usize, shovel: usize, truck: usize) -> Result<(), SimError> {
        self.world.load_sites[site].shovels[shovel].serving = None;
        let t = &mut self.world.trucks[truck];
        t.payload = t.capacity;
        let tons = t.capacity;
        self.log(PoolEvent::LoadingCompleted {
            truck,
            site,
            shovel,
            tons,
        });
        self.set_state(truck, Trigger::LoadingCompleted)?;
        self.dispatch_haul(truck)?;
        self.try_start_loading(site, shovel)
    }

    fn assign_spot(&mut self, truck: usize, site: usize) -> Result<(), SimError> {
        match self.decide(truck, OrderKind::Spot { site })? {
            Some(spot) => {
                self.unpark(truck);
                self.world.dump_sites[site].spots[spot]
                    .queue
                    .push_back(truck);
                self.try_start_unloading(site, spot)
            }
            None => {
                self.idle(truck, OrderKind::Spot { site });
                Ok(())
            }
        }
    }

    fn try_start_unloading(&mut self, site: usize, spot: usize) -> Result<(), SimError> {
        let k = &mut self.world.dump_sites[site].spots[spot];
        if k.serving.is_some() {
            return Ok(());
        }
        let Some(truck) = k.queue.pop_front() else {
            return Ok(());
        };
        k.serving = Some(truck);
        let at = self.world.clock + k.unload_time;
        self.set_state(truck, Trigger::UnloadingStarted)?;
        self.log(PoolEvent::UnloadingStarted { truck, site, spot });
        self.schedule(at, Action::UnloadDone { site, spot, truck });
        Ok(())
    }

    fn on_unload_done(&mut self, site: usize, spot: usize, truck: usize) -> Result<(), SimError> {
        self.world.dump_sites[site].spots[spot].serving = None;
        let t = &mut self.world.trucks[truck];
        let tons = t.payload;
        t.payload = 0.0;
        self.world.dump_sites[site].total_tons_received += tons;
        self.log(PoolEvent::UnloadingCompleted {
            truck,
            site,
            spot,
            tons,
        });
        self.set_state(truck, Trigger::UnloadingCompleted)?;
        self.dispatch_back(truck)?;
        self.try_start_unloading(site, spot)
    }

    // ---- travel ----

    fn depart(&mut self, truck: usize, to: Location) -> Result<(), SimError> {
        let now = self.now();
        let from = self.world.trucks[truck]
            .site
            .ok_or_else(|| SimError::Config(format!("truck {truck} departs while not parked")))?;
        let road = self
            .world
            .road_between(from, to)
            .ok_or_else(|| SimError::Config(format!("no road between {from} and {to}")))?;
        let base = travel_time(
            self.world.roads[road].distance,
            self.world.trucks[truck].speed,
        )?;
        let mut trip = base;

        let mut penalty = None;
        if self.random_events && self.world.roads[road].status == RoadStatus::UnderMaintenance {
            if let Some(m) = &self.config.roads.maintenance {
                let fraction = sample_penalty_fraction(
                    m.penalty_mean,
                    m.penalty_std,
                    &mut self.maintenance_rng[road],
                );
                if fraction > 0.0 {
                    let added = base * fraction;
                    trip += added;
                    penalty = Some((fraction, added));
                }
            }
        }

        self.world.roads[road].trucks_on_road.push(truck);
        let mut jam = None;
        if self.random_events {
            let completions: Vec<f64> = self.world.roads[road]
                .trucks_on_road
                .iter()
                .map(|&i| {
                    self.world.trucks[i]
                        .journey
                        .as_ref()
                        .filter(|_| i != truck)
                        .map_or(0.0, |j| j.completion_rate(now))
                })
                .collect();
            jam = sample_jam(
                &completions,
                &self.config.roads.jam,
                trip,
                &mut self.jam_rng[road],
            );
            if let Some(draw) = jam {
                let r = &mut self.world.roads[road];
                r.jams_until.retain(|&end| end > now);
                r.jams_until.push(now + draw.duration);
                if let Some(delay) = draw.delay {
                    r.jam_count += 1;
                    trip += delay;
                }
            }
        }

        let arrival = now + trip;
        let t = &mut self.world.trucks[truck];
        t.site = None;
        t.journey = Some(Journey {
            road,
            from,
            to,
            departure: now,
            arrival,
            halted: None,
        });
        t.epoch += 1;
        let epoch = t.epoch;
        self.schedule(arrival, Action::Arrive { truck, epoch });
        self.log(PoolEvent::Departed {
            truck,
            road,
            from,
            to,
            base_minutes: base,
            arrival,
        });
        if let Some((fraction, added)) = penalty {
            self.log(PoolEvent::MaintenancePenalty {
                road,
                truck,
                fraction,
                added,
            });
        }
        if let Some(draw) = jam {
            self.log(PoolEvent::Jam {
                road,
                truck,
                position: draw.position,
                duration: draw.duration,
                delay: draw.delay,
            });
            self.policy.on_event(&RandomEvent {
                kind: RandomEventKind::Jam,
                subject: Subject::Road(road),
                start: now,
                duration: Some(draw.duration),
                penalty_fraction: None,
            });
        }
        Ok(())
    }

    fn on_arrive(&mut self, truck: usize, epoch: u64) -> Result<(), SimError> {
        let t = &mut self.world.trucks[truck];
        if t.epoch != epoch || t.state == TruckState::Broken {
            return Ok(());
        }
        let journey = t.journey.take().expect("arriving truck has a journey");
        t.site = Some(journey.to);
        let road = &mut self.world.roads[journey.road];
        road.trucks_on_road.retain(|&i| i != truck);
        road.completed_trips += 1;
        self.log(PoolEvent::Arrived {
            truck,
            site: journey.to,
        });
        self.set_state(truck, Trigger::Arrived)?;
        match journey.to {
            Location::Load(site) => self.assign_shovel(truck, site),
            Location::Dump(site) => self.assign_spot(truck, site),
            Location::Charging => Ok(()),
        }
    }

    // ---- random events ----

    fn on_tick(&mut self, k: usize) -> Result<(), SimError> {
        if k > 0 && self.random_events {
            self.check_availability()?;
        }
        let last = self.tick_times.len() - 1;
        if k == last {
            self.log(PoolEvent::RunEnded {});
        }
        let events = self.pool.records()[self.emitted..].to_vec();
        self.emitted = self.pool.len();
        let record = self.world.tick_record(k, events);
        self.archive.ticks.push(record);
        if k < last {
            self.schedule(self.tick_times[k + 1], Action::Tick(k + 1));
        }
        Ok(())
    }

    /// One availability draw per up subject: roads, then shovels, then trucks.
    fn check_availability(&mut self) -> Result<(), SimError> {
        let now = self.now();
        let window = self.config.simulation.tick_interval;
        if let Some(m) = &self.config.roads.maintenance {
            let params = HazardParams {
                breakdown_probability: 0.0,
                ..m.hazard.clone()
            };
            for road in 0..self.world.roads.len() {
                if self.world.roads[road].status != RoadStatus::Up {
                    continue;
                }
                if let Some(FaultOutcome::Repair(d)) =
                    sample_availability(&params, window, &mut self.maintenance_rng[road])
                {
                    self.apply_fault(RandomEvent {
                        kind: RandomEventKind::RoadMaintenance,
                        subject: Subject::Road(road),
                        start: now,
                        duration: Some(d),
                        penalty_fraction: None,
                    })?;
                }
            }
        }
        for site in 0..self.world.load_sites.len() {
            for shovel in 0..self.world.load_sites[site].shovels.len() {
                let sh = &self.world.load_sites[site].shovels[shovel];
                let Some(params) = sh
                    .hazard
                    .as_ref()
                    .filter(|_| sh.status == EquipmentStatus::Up)
                else {
                    continue;
                };
                let outcome =
                    sample_availability(params, window, &mut self.shovel_rng[site][shovel]);
                let subject = Subject::Shovel { site, shovel };
                match outcome {
                    Some(FaultOutcome::Repair(d)) => self.apply_fault(RandomEvent {
                        kind: RandomEventKind::ShovelRepair,
                        subject,
                        start: now,
                        duration: Some(d),
                        penalty_fraction: None,
                    })?,
                    Some(FaultOutcome::Breakdown) => self.apply_fault(RandomEvent {
                        kind: RandomEventKind::ShovelBreakdown,
                        subject,
                        start: now,
                        duration: None,
                        penalty_fraction: None,
                    })?,
                    None => {}
                }
            }
        }
        for truck in 0..self.world.trucks.len() {
            let t = &self.world.trucks[truck];
            // trucks are exposed while travelling
            let Some(params) = t
                .hazard
                .as_ref()
                .filter(|_| t.state.is_moving() && t.journey.is_some())
            else {
                continue;
            };
            let outcome = sample_availability(params, window, &mut self.truck_rng[truck]);
            let subject = Subject::Truck(truck);
            match outcome {
                Some(FaultOutcome::Repair(d)) => self.apply_fault(RandomEvent {
                    kind: RandomEventKind::TruckRepair,
                    subject,
                    start: now,
                    duration: Some(d),
                    penalty_fraction: None,
                })?,
                Some(FaultOutcome::Breakdown) => self.apply_fault(RandomEvent {
                    kind: RandomEventKind::TruckBreakdown,
                    subject,
                    start: now,
                    duration: None,
                    penalty_fraction: None,
                })?,
                None => {}
            }
        }
        Ok(())
    }

    /// Applies a fault to an up subject; faults on a subject that is already
    /// down are logged and dropped.
    fn apply_fault(&mut self, event: RandomEvent) -> Result<(), SimError> {
        let now = self.now();
        let duration = event.duration.unwrap_or(0.0).max(0.0);
        let applied = match (event.kind, event.subject) {
            (RandomEventKind::RoadMaintenance, Subject::Road(road)) => {
                let r = &mut self.world.roads[road];
                if r.status != RoadStatus::Up {
                    false
                } else {
                    r.status = RoadStatus::UnderMaintenance;
                    r.maintenance_until = Some(now + duration);
                    self.log(PoolEvent::RoadMaintenanceStarted { road, duration });
                    self.schedule(now + duration, Action::RoadMaintenanceDone { road });
                    true
                }
            }
            (RandomEventKind::ShovelRepair, Subject::Shovel { site, shovel }) => {
                let sh = &mut self.world.load_sites[site].shovels[shovel];
                if sh.status != EquipmentStatus::Up {
                    false
                } else {
                    sh.status = EquipmentStatus::UnderRepair;
                    self.log(PoolEvent::ShovelRepairStarted {
                        site,
                        shovel,
                        duration,
                    });
                    self.schedule(now + duration, Action::ShovelRepairDone { site, shovel });
                    true
                }
            }
            (RandomEventKind::ShovelBreakdown, Subject::Shovel { site, shovel }) => {
                let sh = &mut self.world.load_sites[site].shovels[shovel];
                if sh.status != EquipmentStatus::Up {
                    false
                } else {
                    sh.status = EquipmentStatus::Broken;
                    let queued: Vec<usize> = sh.queue.drain(..).collect();
                    self.log(PoolEvent::ShovelBrokeDown {
                        site,
                        shovel,
                        requeued: queued.len(),
                    });
                    self.policy.on_event(&event);
                    for truck in queued {
                        self.log(PoolEvent::DispatchRequested {
                            truck,
                            reason: RequestReason::ShovelBreakdown,
                        });
                        self.assign_shovel(truck, site)?;
                    }
                    return Ok(());
                }
            }
            (RandomEventKind::TruckRepair, Subject::Truck(truck)) => {
                let t = &mut self.world.trucks[truck];
                match (Resume::from_state(t.state), t.journey.as_mut()) {
                    (Some(resume), Some(journey)) if t.state.is_moving() => {
                        journey.halted = Some(journey.completion_rate(now));
                        t.resume = Some(resume);
                        t.repair_started = Some(now);
                        t.epoch += 1;
                        self.set_state(truck, Trigger::RepairStarted)?;
                        self.log(PoolEvent::TruckRepairStarted { truck, duration });
                        self.schedule(now + duration, Action::TruckRepairDone { truck });
                        true
                    }
                    _ => false,
                }
            }
            (RandomEventKind::TruckBreakdown, Subject::Truck(truck)) => {
                if !self.world.trucks[truck].state.is_moving()
                    || self.world.trucks[truck].journey.is_none()
                {
                    false
                } else {
                    let position = self.world.truck_position(truck, now);
                    let t = &mut self.world.trucks[truck];
                    let journey = t.journey.take().expect("moving truck");
                    let tons_lost = t.payload;
                    t.payload = 0.0;
                    t.stranded_at = Some(position);
                    t.pending = None;
                    t.epoch += 1;
                    let back = position.distance(self.world.charging) / t.speed;
                    self.world.roads[journey.road]
                        .trucks_on_road
                        .retain(|&i| i != truck);
                    self.set_state(truck, Trigger::BrokeDown)?;
                    self.log(PoolEvent::TruckBrokeDown { truck, tons_lost });
                    self.schedule(now + back, Action::ReturnedToCharging { truck });
                    true
                }
            }
            _ => false,
        };
        if applied {
            self.policy.on_event(&event);
        } else {
            self.log(PoolEvent::FaultIgnored {
                subject: event.subject,
            });
        }
        Ok(())
    }

    fn on_truck_repaired(&mut self, truck: usize) -> Result<(), SimError> {
        let now = self.now();
        let t = &mut self.world.trucks[truck];
        if t.state != TruckState::UnderRepair {
            return Ok(());
        }
        let held = now - t.repair_started.take().unwrap_or(now);
        let resume = t
            .resume
            .take()
            .expect("repair records the interrupted state");
        let journey = t.journey.as_mut().expect("repairs halt a journey");
        journey.departure += held;
        journey.arrival += held;
        journey.halted = None;
        let arrival = journey.arrival;
        t.epoch += 1;
        let epoch = t.epoch;
        self.set_state(truck, Trigger::RepairCompleted(resume))?;
        self.log(PoolEvent::TruckRepairEnded { truck });
        self.schedule(arrival, Action::Arrive { truck, epoch });
        Ok(())
    }
}
