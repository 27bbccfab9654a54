//! Dispatch policy interface and the baseline policies.
//!
//! The kernel asks a policy for a destination at three order points (leaving
//! charging, leaving a load site full, leaving a dump site empty) and for a
//! shovel or dump spot on arrival. Policies see an immutable [`MineSnapshot`].

mod baselines;
mod fixed_group;
mod snapshot;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::events::{RandomEvent, SimRng};

pub use baselines::{
    NaiveDispatcher, NearestDispatcher, RandomDispatcher, SptfDispatcher, SqDispatcher,
};
pub use fixed_group::{
    fixed_group_assign, fixed_group_assign_config, productivity_ratio, FixedGroupDispatcher,
    ShovelSpec,
};
pub use snapshot::{
    DumpSiteView, LoadSiteView, MineSnapshot, RoadView, ShovelView, SpotView, TruckView,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    Init,
    Haul,
    Back,
    Shovel { site: usize },
    Spot { site: usize },
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderKind::Init => write!(f, "init order"),
            OrderKind::Haul => write!(f, "haul order"),
            OrderKind::Back => write!(f, "back order"),
            OrderKind::Shovel { site } => write!(f, "shovel choice at load:{site}"),
            OrderKind::Spot { site } => write!(f, "spot choice at dump:{site}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("policy {policy} failed: {message}")]
pub struct PolicyError {
    pub policy: String,
    pub message: String,
}

impl PolicyError {
    pub fn new(policy: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            policy: policy.into(),
            message: message.into(),
        }
    }
}

/// Decision returned by a policy: an index into the relevant site, shovel or
/// spot list, or `None` when the policy declines to issue an order.
pub type Decision = Result<Option<usize>, PolicyError>;

/// A dispatch policy.
///
/// Each `give_*` call returns a load or dump site index for the requesting
/// truck (`snapshot.requester()`). The kernel validates every id: an id that
/// does not exist or names a broken subject counts as a policy fault and is
/// re-requested once.
pub trait DispatchPolicy: Send {
    fn name(&self) -> &str;

    /// Called once before the first order; timed as initialization cost.
    fn initialize(&mut self, _snapshot: &MineSnapshot) -> Result<(), PolicyError> {
        Ok(())
    }

    fn give_init_order(&mut self, snapshot: &MineSnapshot, rng: &mut SimRng) -> Decision;

    fn give_haul_order(&mut self, snapshot: &MineSnapshot, rng: &mut SimRng) -> Decision;

    fn give_back_order(&mut self, snapshot: &MineSnapshot, rng: &mut SimRng) -> Decision;

    /// Shovel at `load_site`; defaults to the shortest queue.
    fn choose_shovel(
        &mut self,
        snapshot: &MineSnapshot,
        load_site: usize,
        _rng: &mut SimRng,
    ) -> Decision {
        Ok(snapshot.load_sites[load_site].shortest_queue_shovel())
    }

    /// Spot at `dump_site`; defaults to the shortest queue.
    fn choose_dump_spot(
        &mut self,
        snapshot: &MineSnapshot,
        dump_site: usize,
        _rng: &mut SimRng,
    ) -> Decision {
        Ok(snapshot.dump_sites[dump_site].shortest_queue_spot())
    }

    fn on_event(&mut self, _event: &RandomEvent) {}
}

pub type PolicyFactory = Arc<dyn Fn() -> Box<dyn DispatchPolicy> + Send + Sync>;

/// Name-indexed policy constructors.
#[derive(Clone, Default)]
pub struct PolicyRegistry {
    entries: Vec<(String, PolicyFactory)>,
}

impl fmt::Debug for PolicyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

pub const BASELINE_NAMES: [&str; 6] = [
    "NaiveDispatcher",
    "RandomDispatcher",
    "NearestDispatcher",
    "SQDispatcher",
    "SPTFDispatcher",
    "FixedGroupDispatcher",
];

impl PolicyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the six baseline policies.
    pub fn with_baselines() -> Self {
        let mut r = Self::new();
        r.register("NaiveDispatcher", || Box::new(NaiveDispatcher));
        r.register("RandomDispatcher", || Box::new(RandomDispatcher));
        r.register("NearestDispatcher", || Box::new(NearestDispatcher));
        r.register("SQDispatcher", || Box::new(SqDispatcher));
        r.register("SPTFDispatcher", || Box::new(SptfDispatcher));
        r.register("FixedGroupDispatcher", || {
            Box::new(FixedGroupDispatcher::default())
        });
        r
    }

    /// Registers (or replaces) a policy constructor under `name`.
    pub fn register<F>(&mut self, name: impl Into<String>, factory: F)
    where
        F: Fn() -> Box<dyn DispatchPolicy> + Send + Sync + 'static,
    {
        let name = name.into();
        let factory: PolicyFactory = Arc::new(factory);
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = factory,
            None => self.entries.push((name, factory)),
        }
    }

    pub fn create(&self, name: &str) -> Option<Box<dyn DispatchPolicy>> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| n == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }
}

/// First index minimizing `key`; ties go to the lowest index.
pub(crate) fn argmin_by<I, F>(candidates: I, mut key: F) -> Option<usize>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(usize) -> f64,
{
    let mut best: Option<(usize, f64)> = None;
    for c in candidates {
        let k = key(c);
        if best.is_none_or(|(_, b)| k < b) {
            best = Some((c, k));
        }
    }
    best.map(|(c, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_baselines_and_accepts_third_party() {
        let mut r = PolicyRegistry::with_baselines();
        assert_eq!(r.names(), BASELINE_NAMES.to_vec());
        for name in BASELINE_NAMES {
            assert_eq!(r.create(name).unwrap().name(), name);
        }
        assert!(r.create("Mystery").is_none());
        r.register("AlwaysNaive", || Box::new(NaiveDispatcher));
        assert!(r.contains("AlwaysNaive"));
        assert_eq!(r.names().len(), 7);
    }

    #[test]
    fn argmin_ties_take_lowest_index() {
        assert_eq!(argmin_by([0, 1, 2], |i| [3.0, 1.0, 1.0][i]), Some(1));
        assert_eq!(argmin_by([2, 4], |_| 0.0), Some(2));
        assert_eq!(argmin_by(std::iter::empty(), |_| 0.0), None);
    }
}
