mod common;

use common::*;
use pitsim::dispatch::{
    Decision, DispatchPolicy, MineSnapshot, PolicyError, PolicyRegistry, BASELINE_NAMES,
};
use pitsim::events::SimRng;
use pitsim::kpi::{loaded_tons, produced_tons, total_wait_time, waiting_curve};
use pitsim::sim::{run_with_options, Location, RunOptions, SimError, TruckState};
use pitsim::ticklog::PoolEvent;
use pitsim::{run_simulation, MineConfig, SimResult};
use proptest::prelude::*;

fn run(config: &MineConfig, policy: &str, seed: u64, duration: f64) -> SimResult {
    let mut p = PolicyRegistry::with_baselines().create(policy).unwrap();
    run_simulation(config, p.as_mut(), seed, duration).unwrap()
}

#[test]
fn single_truck_delivers_whole_cycles() {
    let c = reference_single_truck();
    for (duration, cycles) in [
        (240.0, 8.0),
        (30.0, 1.0),
        (29.5, 0.0),
        (95.0, 3.0),
        (1.0, 0.0),
    ] {
        let r = run(&c, "NaiveDispatcher", 1, duration);
        assert_eq!(r.kpis.produced_tons, cycles * 60.0, "duration {duration}");
        assert_eq!(r.kpis.total_wait_time, 0.0);
    }
}

#[test]
fn tick_count_and_initial_positions() {
    let c = bundled();
    let r = run(&c, "SQDispatcher", 3, 240.0);
    assert_eq!(r.archive.ticks.len(), 241);
    let first = &r.archive.ticks[0];
    // tick 0 is taken after the t=0 departures, still at the charging site
    for t in &first.trucks {
        assert_eq!(
            (t.x, t.y),
            (c.charging_site.position.x, c.charging_site.position.y)
        );
    }
    for (k, t) in r.archive.ticks.iter().enumerate() {
        assert_eq!(t.index, k);
        assert_eq!(t.time, k as f64);
    }
    assert_eq!(run(&c, "SQDispatcher", 3, 2.5).archive.ticks.len(), 4);
}

#[test]
fn runs_are_deterministic() {
    let c = bundled();
    for name in BASELINE_NAMES {
        let a = run(&c, name, 11, 120.0);
        let b = run(&c, name, 11, 120.0);
        assert_eq!(a.events, b.events, "{name}");
        assert_eq!(a.archive, b.archive, "{name}");
        assert!(a.kpis.same_outcome(&b.kpis), "{name}");
        let c2 = run(&c, name, 12, 120.0);
        if name != "NaiveDispatcher" && name != "NearestDispatcher" {
            assert_ne!(a.events, c2.events, "{name} ignores its seed");
        }
    }
}

#[test]
fn archive_holds_the_full_pool() {
    let r = run(&bundled(), "RandomDispatcher", 5, 240.0);
    assert_eq!(r.archive.event_pool().unwrap(), r.events);
    assert!(r.archive.kpis().unwrap().same_outcome(&r.kpis));
}

#[test]
fn conservation_of_tons() {
    for (config, name) in [
        (bundled(), "SPTFDispatcher"),
        (faulty(bundled(), 0.3), "SQDispatcher"),
        (faulty(bundled(), 0.3), "FixedGroupDispatcher"),
    ] {
        let r = run(&config, name, 9, 240.0);
        let loaded = loaded_tons(&r.events);
        let unloaded = produced_tons(&r.events);
        let lost: f64 = r
            .events
            .iter()
            .map(|e| match e.event {
                PoolEvent::TruckBrokeDown { tons_lost, .. } => tons_lost,
                _ => 0.0,
            })
            .sum();
        let carried: f64 = r
            .archive
            .ticks
            .last()
            .unwrap()
            .trucks
            .iter()
            .map(|t| t.payload)
            .sum();
        assert!(unloaded <= loaded);
        assert!((loaded - unloaded - lost - carried).abs() < 1e-6, "{name}");
        let last = r.archive.ticks.last().unwrap();
        assert!((last.tons_received() - unloaded).abs() < 1e-6);
        assert_eq!(r.kpis.production_curve.last().unwrap().value, unloaded);
    }
}

#[test]
fn fault_free_runs_deliver_everything_that_finished_loading() {
    let r = run(&zero_probability(bundled()), "SQDispatcher", 2, 240.0);
    let carried: f64 = r
        .archive
        .ticks
        .last()
        .unwrap()
        .trucks
        .iter()
        .map(|t| t.payload)
        .sum();
    assert_eq!(produced_tons(&r.events) + carried, loaded_tons(&r.events));
}

#[test]
fn zero_probabilities_reduce_to_kinematics() {
    let base = bundled();
    for name in BASELINE_NAMES {
        let mut p = PolicyRegistry::with_baselines().create(name).unwrap();
        let off = run_with_options(
            &base,
            p.as_mut(),
            4,
            240.0,
            &RunOptions {
                random_events: false,
            },
        )
        .unwrap();
        let zero = run(&zero_probability(base.clone()), name, 4, 240.0);
        assert_eq!(off.events, zero.events, "{name}");
        assert!(off.kpis.same_outcome(&zero.kpis), "{name}");
        assert_eq!(off.kpis.road_jams, 0);
    }
}

#[test]
fn penalties_extend_arrivals() {
    let mut c = jam_heavy(bundled());
    c.roads.maintenance.as_mut().unwrap().hazard.lambda = 0.05;
    let r = run(&c, "RandomDispatcher", 8, 240.0);
    let recs = r.events.records();
    let (mut jams, mut penalties) = (0, 0);
    for (i, rec) in recs.iter().enumerate() {
        let PoolEvent::Departed {
            base_minutes,
            arrival,
            truck,
            ..
        } = rec.event
        else {
            continue;
        };
        let mut extra = 0.0;
        for next in &recs[i + 1..] {
            match next.event {
                PoolEvent::MaintenancePenalty {
                    truck: t, added, ..
                } if t == truck => {
                    penalties += 1;
                    extra += added;
                }
                PoolEvent::Jam {
                    truck: t, delay, ..
                } if t == truck => {
                    if let Some(d) = delay {
                        jams += 1;
                        assert!(d > 0.0);
                        extra += d;
                    }
                }
                _ => break,
            }
        }
        assert!(arrival >= rec.time + base_minutes);
        assert!((arrival - rec.time - base_minutes - extra).abs() < 1e-9);
    }
    assert!(
        jams > 0 && penalties > 0,
        "jams {jams}, penalties {penalties}"
    );
    assert_eq!(jams as u64, r.kpis.road_jams);
}

#[test]
fn wait_time_is_the_integral_of_the_waiting_curve() {
    for name in BASELINE_NAMES {
        let r = run(&bundled(), name, 6, 240.0);
        let curve = waiting_curve(&r.events);
        let end = r.events.end_time().unwrap();
        let mut area = 0.0;
        for w in curve.windows(2) {
            area += w[0].value * (w[1].time - w[0].time);
        }
        let last = curve.last().unwrap();
        area += last.value * (end - last.time);
        let direct = total_wait_time(&r.events);
        assert!(
            (area - direct).abs() < 1e-6 * direct.max(1.0),
            "{name}: {area} vs {direct}"
        );
        let from_ticks: f64 = r.archive.ticks[..240]
            .iter()
            .map(|t| t.waiting_trucks() as f64)
            .sum();
        // minute sampling of the same quantity
        assert!(
            (from_ticks - direct).abs() < 0.1 * direct.max(100.0),
            "{name}"
        );
    }
}

#[test]
fn production_curve_is_monotone() {
    let r = run(&faulty(bundled(), 0.2), "SPTFDispatcher", 1, 240.0);
    for w in r.kpis.production_curve.windows(2) {
        assert!(w[1].value >= w[0].value && w[1].time >= w[0].time);
    }
}

#[test]
fn faults_happen_and_trucks_recover() {
    let r = run(&faulty(bundled(), 0.3), "SQDispatcher", 21, 240.0);
    let count = |f: fn(&PoolEvent) -> bool| r.events.iter().filter(|e| f(&e.event)).count();
    assert!(count(|e| matches!(e, PoolEvent::TruckRepairStarted { .. })) > 0);
    assert!(count(|e| matches!(e, PoolEvent::TruckRepairEnded { .. })) > 0);
    assert!(count(|e| matches!(e, PoolEvent::TruckBrokeDown { .. })) > 0);
    assert!(count(|e| matches!(e, PoolEvent::ShovelRepairStarted { .. })) > 0);
    assert!(count(|e| matches!(e, PoolEvent::ShovelBrokeDown { .. })) > 0);
    // broken trucks never move again
    for t in &r.archive.ticks.last().unwrap().trucks {
        if t.state == TruckState::Broken {
            assert_eq!(t.payload, 0.0);
        }
    }
    for e in r.events.iter() {
        if let PoolEvent::StateChanged {
            from: TruckState::Broken,
            ..
        } = e.event
        {
            panic!("left Broken at t={}", e.time);
        }
    }
}

#[test]
fn dead_site_trucks_are_redispatched() {
    let mut c = faulty(bundled(), 1.0);
    for f in &mut c.charging_site.fleets {
        f.hazard = None;
    }
    let r = run(&c, "SQDispatcher", 2, 240.0);
    let redispatched = r.events.iter().any(|e| {
        matches!(
            e.event,
            PoolEvent::StateChanged {
                from: TruckState::WaitingForLoading,
                to: TruckState::EmptyRun,
                ..
            }
        )
    });
    let all_dead = r.archive.ticks.last().unwrap().load_sites.iter().all(|s| {
        s.shovels
            .iter()
            .all(|sh| sh.status == pitsim::sim::EquipmentStatus::Broken)
    });
    assert!(redispatched || all_dead);
}

struct Liar {
    err: bool,
}

impl DispatchPolicy for Liar {
    fn name(&self) -> &str {
        "Liar"
    }
    fn give_init_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        if self.err && s.clock > 0.0 {
            return Err(PolicyError::new("Liar", "gave up"));
        }
        Ok(Some(99))
    }
    fn give_haul_order(&mut self, _: &MineSnapshot, _: &mut SimRng) -> Decision {
        Ok(Some(0))
    }
    fn give_back_order(&mut self, _: &MineSnapshot, _: &mut SimRng) -> Decision {
        Ok(Some(0))
    }
}

#[test]
fn invalid_targets_are_retried_then_idle() {
    let c = reference_single_truck();
    let r = run_simulation(&c, &mut Liar { err: false }, 1, 10.0).unwrap();
    let faults = r
        .events
        .iter()
        .filter(|e| matches!(e.event, PoolEvent::PolicyFault { returned: 99, .. }))
        .count();
    // two attempts per request, one request per minute from t=0 to t=10
    assert_eq!(faults, 22);
    assert_eq!(r.kpis.produced_tons, 0.0);
    assert!(r
        .archive
        .ticks
        .iter()
        .all(|t| t.trucks[0].state == TruckState::AtCharging));
}

#[test]
fn policy_errors_abort_the_run() {
    let c = reference_single_truck();
    match run_simulation(&c, &mut Liar { err: true }, 1, 10.0) {
        Err(SimError::Policy { time, error, .. }) => {
            assert_eq!(time, 1.0);
            assert_eq!(error.policy, "Liar");
        }
        other => panic!("expected a policy error, got {:?}", other.map(|r| r.kpis)),
    }
}

#[test]
fn invalid_duration_is_rejected() {
    let c = reference_single_truck();
    let mut p = PolicyRegistry::with_baselines()
        .create("NaiveDispatcher")
        .unwrap();
    assert!(matches!(
        run_simulation(&c, p.as_mut(), 1, 0.0),
        Err(SimError::InvalidDuration(_))
    ));
}

#[test]
fn fixed_group_keeps_trucks_on_their_site() {
    let c = zero_probability(bundled());
    let r = run(&c, "FixedGroupDispatcher", 1, 240.0);
    let binding = pitsim::dispatch::fixed_group_assign_config(&c);
    for e in r.events.iter() {
        if let PoolEvent::Arrived {
            truck,
            site: Location::Load(s),
        } = e.event
        {
            assert_eq!(s, binding[truck]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_truck_closed_form(
        half_km in 2u32..40,
        speed in prop::sample::select(vec![0.25, 0.5, 1.0]),
        buckets in 1u32..6,
        cycle in prop::sample::select(vec![0.5, 1.0, 1.5, 2.0]),
        unload in prop::sample::select(vec![0.5, 1.0, 2.0, 4.0]),
        duration in 1u32..400,
    ) {
        let distance = half_km as f64 / 2.0;
        let capacity = 20.0 * buckets as f64;
        let c = single_truck(distance, speed, capacity, 20.0, cycle, unload);
        let cycle_time = 2.0 * distance / speed + buckets as f64 * cycle + unload;
        let duration = duration as f64 + 0.25;
        let r = run(&c, "NaiveDispatcher", 1, duration);
        prop_assert_eq!(r.kpis.produced_tons, (duration / cycle_time).floor() * capacity);
    }
}
