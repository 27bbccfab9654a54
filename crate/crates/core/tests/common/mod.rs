#![allow(dead_code)]

use pitsim::config::{MineConfig, Point};
use pitsim::events::{HazardParams, JamParams};

/// One truck, one shovel, one spot; charging shares the dump position so
/// every leg is `distance / speed`.
pub fn single_truck(
    distance: f64,
    speed: f64,
    capacity: f64,
    bucket: f64,
    cycle: f64,
    unload: f64,
) -> MineConfig {
    let json = format!(
        r#"{{
          "name": "single",
          "charging_site": {{ "name": "c", "position": {{"x": 0, "y": 0}},
            "fleets": [{{ "truck_type": "T", "count": 1, "capacity": {capacity}, "speed": {speed} }}] }},
          "load_sites": [{{ "name": "l", "position": {{"x": {distance}, "y": 0}},
            "shovels": [{{ "shovel_type": "S", "count": 1, "bucket_size": {bucket}, "cycle_time": {cycle} }}] }}],
          "dump_sites": [{{ "name": "d", "position": {{"x": 0, "y": 0}},
            "spots": [{{ "count": 1, "unload_time": {unload} }}] }}],
          "roads": {{ "jam": {{ "sigma": 0.1, "jam_probability": 0, "weibull_shape": 1, "weibull_scale": 1 }} }},
          "simulation": {{ "duration": 240, "seed": 1 }}
        }}"#
    );
    MineConfig::from_json(&json).expect("fixture config")
}

/// 10 km out at 0.5 km/min, three 20 t buckets of 2 min, 4 min unload:
/// a 30 minute cycle.
pub fn reference_single_truck() -> MineConfig {
    single_truck(5.0, 0.5, 60.0, 20.0, 2.0, 4.0)
}

pub fn bundled() -> MineConfig {
    MineConfig::bundled()
}

/// The bundled config with every random-event probability set to zero.
pub fn zero_probability(mut c: MineConfig) -> MineConfig {
    let off = |h: &mut Option<HazardParams>| {
        if let Some(h) = h {
            h.lambda = 0.0;
        }
    };
    for f in &mut c.charging_site.fleets {
        off(&mut f.hazard);
    }
    for s in &mut c.load_sites {
        for sh in &mut s.shovels {
            off(&mut sh.hazard);
        }
    }
    if let Some(m) = &mut c.roads.maintenance {
        m.hazard.lambda = 0.0;
    }
    c.roads.jam.jam_probability = 0.0;
    c
}

/// Two load sites so trucks can be re-dispatched, with aggressive faults.
pub fn faulty(mut c: MineConfig, breakdown: f64) -> MineConfig {
    let h = HazardParams {
        lambda: 0.05,
        repair_mean: 8.0,
        repair_std: 2.0,
        breakdown_probability: breakdown,
    };
    for f in &mut c.charging_site.fleets {
        f.hazard = Some(h.clone());
    }
    for s in &mut c.load_sites {
        for sh in &mut s.shovels {
            sh.hazard = Some(h.clone());
        }
    }
    c
}

pub fn jam_heavy(mut c: MineConfig) -> MineConfig {
    c.roads.jam = JamParams {
        mu: 0.0,
        sigma: 0.1,
        jam_probability: 0.8,
        weibull_shape: 1.5,
        weibull_scale: 10.0,
    };
    c
}

pub fn origin() -> Point {
    Point::new(0.0, 0.0)
}
