//! Indicators computed from the event pool.

mod chart;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::MineConfig;
use crate::sim::loading_time;
use crate::ticklog::{EventPool, PoolEvent};

pub(crate) use chart::escape as escape_xml;
pub use chart::{curves_csv, line_chart_svg, Series};
pub use report::{summary_report, ReportRow, SummaryReport, COLUMNS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KpiError {
    #[error("{0} must be > 0")]
    NonPositive(&'static str),
    #[error("loading-time matrix is {rows}x{cols} but fleet has {trucks} truck and {shovels} shovel types")]
    Shape {
        rows: usize,
        cols: usize,
        trucks: usize,
        shovels: usize,
    },
    #[error("no runs to report")]
    NoRuns,
}

/// Wall-clock timings of policy calls, in seconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionLog {
    pub init: Vec<f64>,
    pub orders: Vec<f64>,
}

impl DecisionLog {
    pub fn record_init(&mut self, seconds: f64) {
        self.init.push(seconds.max(0.0));
    }

    pub fn record_order(&mut self, seconds: f64) {
        self.orders.push(seconds.max(0.0));
    }

    /// Mean time per effective order with initialization amortized over the
    /// orders; `None` when no order was issued.
    pub fn adl(&self) -> Option<f64> {
        adl(self)
    }
}

pub fn adl(log: &DecisionLog) -> Option<f64> {
    if log.orders.is_empty() {
        return None;
    }
    let total: f64 = log.init.iter().sum::<f64>() + log.orders.iter().sum::<f64>();
    Some(total / log.orders.len() as f64)
}

/// Inputs for the heterogeneous match factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetSpec {
    /// Trucks per truck type.
    pub truck_counts: Vec<u32>,
    /// Shovels per shovel type.
    pub shovel_counts: Vec<u32>,
    /// `ult[i][j]`: minutes for shovel type `j` to fill truck type `i`.
    pub ult: Vec<Vec<f64>>,
    /// Mean full truck cycle in minutes.
    pub truck_cycle_time: f64,
}

impl FleetSpec {
    /// Truck types are fleets; shovel types are the shovel groups of every
    /// load site in order.
    pub fn from_config(config: &MineConfig, truck_cycle_time: f64) -> Self {
        let shovels: Vec<_> = config
            .load_sites
            .iter()
            .flat_map(|s| s.shovels.iter())
            .collect();
        let fleets = &config.charging_site.fleets;
        Self {
            truck_counts: fleets.iter().map(|f| f.count).collect(),
            shovel_counts: shovels.iter().map(|s| s.count).collect(),
            ult: fleets
                .iter()
                .map(|f| {
                    shovels
                        .iter()
                        .map(|s| loading_time(f.capacity, s.bucket_size, s.cycle_time))
                        .collect()
                })
                .collect(),
            truck_cycle_time,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// lcm of a row of times on a tenth-of-a-minute grid, back in minutes
fn lcm_minutes(row: &[f64]) -> f64 {
    let lcm = row
        .iter()
        .map(|&t| ((t * 10.0).round() as u64).max(1))
        .fold(1u64, |acc, v| acc / gcd(acc, v) * v);
    lcm as f64 / 10.0
}

/// `MF = N * sum_i lcm_i / (sum_i sum_j shovel_j * lcm_i / ULT_ij * cycle)`.
pub fn match_factor(spec: &FleetSpec) -> Result<f64, KpiError> {
    let trucks = spec.truck_counts.len();
    let shovels = spec.shovel_counts.len();
    if spec.ult.len() != trucks || spec.ult.iter().any(|r| r.len() != shovels) {
        return Err(KpiError::Shape {
            rows: spec.ult.len(),
            cols: spec.ult.first().map_or(0, Vec::len),
            trucks,
            shovels,
        });
    }
    if !(spec.truck_cycle_time > 0.0) {
        return Err(KpiError::NonPositive("truck cycle time"));
    }
    if spec.ult.iter().flatten().any(|&t| !(t > 0.0)) {
        return Err(KpiError::NonPositive("loading time"));
    }
    let n: u32 = spec.truck_counts.iter().sum();
    let s: u32 = spec.shovel_counts.iter().sum();
    if n == 0 || s == 0 {
        return Err(KpiError::NonPositive("fleet size"));
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for row in &spec.ult {
        let lcm = lcm_minutes(row);
        numerator += lcm;
        for (j, &t) in row.iter().enumerate() {
            denominator += spec.shovel_counts[j] as f64 * lcm / t;
        }
    }
    Ok(n as f64 * numerator / (denominator * spec.truck_cycle_time))
}

/// Mean gap between consecutive unload completions of the same truck.
pub fn observed_cycle_time(pool: &EventPool) -> Option<f64> {
    let mut last: BTreeMap<usize, f64> = BTreeMap::new();
    let mut total = 0.0;
    let mut cycles = 0usize;
    for r in pool.iter() {
        if let PoolEvent::UnloadingCompleted { truck, .. } = r.event {
            if let Some(prev) = last.insert(truck, r.time) {
                total += r.time - prev;
                cycles += 1;
            }
        }
    }
    (cycles > 0).then(|| total / cycles as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub time: f64,
    pub value: f64,
}

/// Cumulative tons delivered, one step per unload completion, starting at 0.
pub fn production_curve(pool: &EventPool) -> Vec<CurvePoint> {
    let mut out = vec![CurvePoint {
        time: 0.0,
        value: 0.0,
    }];
    let mut total = 0.0;
    for r in pool.iter() {
        if let PoolEvent::UnloadingCompleted { tons, .. } = r.event {
            total += tons;
            out.push(CurvePoint {
                time: r.time,
                value: total,
            });
        }
    }
    out
}

/// Number of trucks queued at load or dump sites, one step per change.
pub fn waiting_curve(pool: &EventPool) -> Vec<CurvePoint> {
    let mut out = vec![CurvePoint {
        time: 0.0,
        value: 0.0,
    }];
    let mut waiting = 0i64;
    for r in pool.iter() {
        if let PoolEvent::StateChanged { from, to, .. } = r.event {
            let delta = to.is_waiting() as i64 - from.is_waiting() as i64;
            if delta == 0 {
                continue;
            }
            waiting += delta;
            let last = out.last_mut().expect("curve starts with a point");
            if last.time == r.time {
                last.value = waiting as f64;
            } else {
                out.push(CurvePoint {
                    time: r.time,
                    value: waiting as f64,
                });
            }
        }
    }
    out
}

fn horizon(pool: &EventPool) -> f64 {
    pool.end_time()
        .or_else(|| pool.records().last().map(|r| r.time))
        .unwrap_or(0.0)
}

/// Truck-minutes spent in the waiting states up to the end of the run.
pub fn total_wait_time(pool: &EventPool) -> f64 {
    let mut since: BTreeMap<usize, f64> = BTreeMap::new();
    let mut total = 0.0;
    for r in pool.iter() {
        if let PoolEvent::StateChanged {
            truck, from, to, ..
        } = r.event
        {
            if from.is_waiting() {
                if let Some(start) = since.remove(&truck) {
                    total += r.time - start;
                }
            }
            if to.is_waiting() {
                since.insert(truck, r.time);
            }
        }
    }
    let end = horizon(pool);
    total + since.values().map(|&start| end - start).sum::<f64>()
}

/// Jams that delayed the truck entering the road.
pub fn road_jams(pool: &EventPool) -> u64 {
    pool.iter()
        .filter(|r| matches!(r.event, PoolEvent::Jam { delay: Some(_), .. }))
        .count() as u64
}

pub fn produced_tons(pool: &EventPool) -> f64 {
    pool.iter()
        .map(|r| match r.event {
            PoolEvent::UnloadingCompleted { tons, .. } => tons,
            _ => 0.0,
        })
        .sum()
}

pub fn loaded_tons(pool: &EventPool) -> f64 {
    pool.iter()
        .map(|r| match r.event {
            PoolEvent::LoadingCompleted { tons, .. } => tons,
            _ => 0.0,
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiSummary {
    pub policy: String,
    pub produced_tons: f64,
    /// Absent when no truck completed a full cycle.
    pub match_factor: Option<f64>,
    /// Minutes.
    pub total_wait_time: f64,
    pub road_jams: u64,
    /// Seconds per order; absent when no decision log is available.
    pub adl: Option<f64>,
    pub production_curve: Vec<CurvePoint>,
    pub waiting_curve: Vec<CurvePoint>,
}

impl KpiSummary {
    /// Equality on every field except the wall-clock ADL.
    pub fn same_outcome(&self, other: &KpiSummary) -> bool {
        let strip = |k: &KpiSummary| KpiSummary {
            adl: None,
            ..k.clone()
        };
        strip(self) == strip(other)
    }
}

pub fn summarize(
    pool: &EventPool,
    config: &MineConfig,
    decisions: Option<&DecisionLog>,
) -> KpiSummary {
    let policy = pool
        .iter()
        .find_map(|r| match &r.event {
            PoolEvent::RunStarted { policy, .. } => Some(policy.clone()),
            _ => None,
        })
        .unwrap_or_default();
    let match_factor = observed_cycle_time(pool)
        .and_then(|cycle| match_factor(&FleetSpec::from_config(config, cycle)).ok());
    KpiSummary {
        policy,
        produced_tons: produced_tons(pool),
        match_factor,
        total_wait_time: total_wait_time(pool),
        road_jams: road_jams(pool),
        adl: decisions.and_then(adl),
        production_curve: production_curve(pool),
        waiting_curve: waiting_curve(pool),
    }
}

/// A user-defined indicator. It sees the finished pool read-only.
pub trait Indicator: Send + Sync {
    fn name(&self) -> &str;
    fn compute(&self, pool: &EventPool) -> f64;
}

impl<F> Indicator for (&'static str, F)
where
    F: Fn(&EventPool) -> f64 + Send + Sync,
{
    fn name(&self) -> &str {
        self.0
    }

    fn compute(&self, pool: &EventPool) -> f64 {
        (self.1)(pool)
    }
}

#[derive(Default)]
pub struct IndicatorSet {
    indicators: Vec<Box<dyn Indicator>>,
}

impl IndicatorSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, indicator: Box<dyn Indicator>) -> &mut Self {
        self.indicators.push(indicator);
        self
    }

    pub fn evaluate(&self, pool: &EventPool) -> Vec<(String, f64)> {
        self.indicators
            .iter()
            .map(|i| (i.name().to_string(), i.compute(pool)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Trigger, TruckState};
    use crate::ticklog::PoolEvent;
    use proptest::prelude::*;

    fn homogeneous(n: u32, s: u32, ult: f64, cycle: f64) -> FleetSpec {
        FleetSpec {
            truck_counts: vec![n],
            shovel_counts: vec![s],
            ult: vec![vec![ult]],
            truck_cycle_time: cycle,
        }
    }

    #[test]
    fn homogeneous_mf() {
        assert!((match_factor(&homogeneous(10, 1, 5.0, 50.0)).unwrap() - 1.0).abs() < 1e-12);
        let double = match_factor(&homogeneous(20, 1, 5.0, 50.0)).unwrap();
        assert!((double - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mf_rejects_bad_input() {
        assert!(match_factor(&homogeneous(10, 1, 0.0, 50.0)).is_err());
        assert!(match_factor(&homogeneous(10, 1, 5.0, 0.0)).is_err());
        let mut bad = homogeneous(10, 1, 5.0, 50.0);
        bad.ult = vec![vec![5.0, 6.0]];
        assert!(matches!(match_factor(&bad), Err(KpiError::Shape { .. })));
    }

    #[test]
    fn lcm_on_tenth_minute_grid() {
        assert_eq!(lcm_minutes(&[4.0, 6.0]), 12.0);
        assert_eq!(lcm_minutes(&[1.5, 2.0]), 6.0);
        assert_eq!(lcm_minutes(&[0.3, 0.4]), 1.2);
    }

    #[test]
    fn adl_examples() {
        let log = DecisionLog {
            init: vec![0.0],
            orders: vec![0.001; 100],
        };
        assert!((adl(&log).unwrap() - 0.001).abs() < 1e-15);
        let log = DecisionLog {
            init: vec![3.0, 3.0],
            orders: vec![0.01; 10],
        };
        assert!((adl(&log).unwrap() - 0.61).abs() < 1e-12);
        assert_eq!(adl(&DecisionLog::default()), None);
    }

    fn state(pool: &mut EventPool, t: f64, truck: usize, from: TruckState, to: TruckState) {
        pool.push(
            t,
            PoolEvent::StateChanged {
                truck,
                from,
                to,
                trigger: Trigger::Arrived,
            },
        );
    }

    #[test]
    fn empty_pool_curves() {
        let pool = EventPool::new();
        assert_eq!(
            production_curve(&pool),
            vec![CurvePoint {
                time: 0.0,
                value: 0.0
            }]
        );
        assert_eq!(total_wait_time(&pool), 0.0);
        assert_eq!(observed_cycle_time(&pool), None);
    }

    #[test]
    fn single_unload_steps_once() {
        let mut pool = EventPool::new();
        pool.push(
            30.0,
            PoolEvent::UnloadingCompleted {
                truck: 0,
                site: 0,
                spot: 0,
                tons: 40.0,
            },
        );
        let c = production_curve(&pool);
        assert_eq!(
            c.last().unwrap(),
            &CurvePoint {
                time: 30.0,
                value: 40.0
            }
        );
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn two_trucks_one_shovel_wait_five() {
        use TruckState::*;
        let mut pool = EventPool::new();
        state(&mut pool, 10.0, 0, EmptyRun, WaitingForLoading);
        state(&mut pool, 10.0, 0, WaitingForLoading, Loading);
        state(&mut pool, 10.0, 1, EmptyRun, WaitingForLoading);
        state(&mut pool, 15.0, 0, Loading, FullRun);
        state(&mut pool, 15.0, 1, WaitingForLoading, Loading);
        pool.push(20.0, PoolEvent::RunEnded {});
        assert_eq!(total_wait_time(&pool), 5.0);
    }

    #[test]
    fn open_waits_run_to_the_horizon() {
        use TruckState::*;
        let mut pool = EventPool::new();
        state(&mut pool, 2.0, 0, FullRun, WaitingForUnloading);
        pool.push(12.0, PoolEvent::RunEnded {});
        assert_eq!(total_wait_time(&pool), 10.0);
    }

    #[test]
    fn indicators_see_the_pool() {
        let mut pool = EventPool::new();
        pool.push(0.0, PoolEvent::RunEnded {});
        let mut set = IndicatorSet::new();
        set.register(Box::new(("events", |p: &EventPool| p.len() as f64)));
        assert_eq!(set.evaluate(&pool), vec![("events".to_string(), 1.0)]);
    }

    proptest! {
        #[test]
        fn balanced_homogeneous_is_one(n in 1u32..200, s in 1u32..20, ult in 1u32..200) {
            let ult = ult as f64 / 10.0;
            let cycle = n as f64 * ult / s as f64;
            let mf = match_factor(&homogeneous(n, s, ult, cycle)).unwrap();
            prop_assert!((mf - 1.0).abs() < 1e-9);
        }

        #[test]
        fn adl_ignores_order(mut t in prop::collection::vec(0.0f64..1.0, 1..50), init in 0.0f64..5.0) {
            let a = adl(&DecisionLog { init: vec![init], orders: t.clone() }).unwrap();
            t.reverse();
            let b = adl(&DecisionLog { init: vec![init], orders: t }).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
