//! Truck state machine.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TruckState {
    AtCharging,
    EmptyRun,
    WaitingForLoading,
    Loading,
    FullRun,
    WaitingForUnloading,
    Unloading,
    UnderRepair,
    Broken,
}

impl TruckState {
    pub const ALL: [TruckState; 9] = [
        TruckState::AtCharging,
        TruckState::EmptyRun,
        TruckState::WaitingForLoading,
        TruckState::Loading,
        TruckState::FullRun,
        TruckState::WaitingForUnloading,
        TruckState::Unloading,
        TruckState::UnderRepair,
        TruckState::Broken,
    ];

    pub fn is_waiting(self) -> bool {
        matches!(
            self,
            TruckState::WaitingForLoading | TruckState::WaitingForUnloading
        )
    }

    pub fn is_moving(self) -> bool {
        matches!(self, TruckState::EmptyRun | TruckState::FullRun)
    }

    pub fn label(self) -> &'static str {
        match self {
            TruckState::AtCharging => "at charging",
            TruckState::EmptyRun => "empty run",
            TruckState::WaitingForLoading => "waiting for loading",
            TruckState::Loading => "loading",
            TruckState::FullRun => "full run",
            TruckState::WaitingForUnloading => "waiting for unloading",
            TruckState::Unloading => "unloading",
            TruckState::UnderRepair => "under repair",
            TruckState::Broken => "broken",
        }
    }
}

/// States a repaired truck may resume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Resume {
    EmptyRun,
    FullRun,
    WaitingForLoading,
    WaitingForUnloading,
}

impl Resume {
    pub const ALL: [Resume; 4] = [
        Resume::EmptyRun,
        Resume::FullRun,
        Resume::WaitingForLoading,
        Resume::WaitingForUnloading,
    ];

    pub fn from_state(state: TruckState) -> Option<Resume> {
        match state {
            TruckState::EmptyRun => Some(Resume::EmptyRun),
            TruckState::FullRun => Some(Resume::FullRun),
            TruckState::WaitingForLoading => Some(Resume::WaitingForLoading),
            TruckState::WaitingForUnloading => Some(Resume::WaitingForUnloading),
            _ => None,
        }
    }

    pub fn state(self) -> TruckState {
        match self {
            Resume::EmptyRun => TruckState::EmptyRun,
            Resume::FullRun => TruckState::FullRun,
            Resume::WaitingForLoading => TruckState::WaitingForLoading,
            Resume::WaitingForUnloading => TruckState::WaitingForUnloading,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trigger {
    Dispatched,
    Arrived,
    LoadingStarted,
    LoadingCompleted,
    UnloadingStarted,
    UnloadingCompleted,
    /// Sent to another load site after its shovels broke down.
    Redispatched,
    RepairStarted,
    RepairCompleted(Resume),
    BrokeDown,
}

impl Trigger {
    pub fn all() -> Vec<Trigger> {
        let mut v = vec![
            Trigger::Dispatched,
            Trigger::Arrived,
            Trigger::LoadingStarted,
            Trigger::LoadingCompleted,
            Trigger::UnloadingStarted,
            Trigger::UnloadingCompleted,
            Trigger::Redispatched,
            Trigger::RepairStarted,
            Trigger::BrokeDown,
        ];
        v.extend(Resume::ALL.map(Trigger::RepairCompleted));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("illegal transition: {trigger:?} in state {state:?}")]
pub struct IllegalTransition {
    pub state: TruckState,
    pub trigger: Trigger,
}

pub fn transition(state: TruckState, trigger: Trigger) -> Result<TruckState, IllegalTransition> {
    use Trigger as T;
    use TruckState::*;
    let next = match (state, trigger) {
        (AtCharging, T::Dispatched) => EmptyRun,
        (EmptyRun, T::Arrived) => WaitingForLoading,
        (WaitingForLoading, T::LoadingStarted) => Loading,
        (Loading, T::LoadingCompleted) => FullRun,
        (FullRun, T::Arrived) => WaitingForUnloading,
        (WaitingForUnloading, T::UnloadingStarted) => Unloading,
        (Unloading, T::UnloadingCompleted) => EmptyRun,
        (WaitingForLoading, T::Redispatched) => EmptyRun,
        (EmptyRun | FullRun | WaitingForLoading | WaitingForUnloading, T::RepairStarted) => {
            UnderRepair
        }
        (UnderRepair, T::RepairCompleted(resume)) => resume.state(),
        (EmptyRun | FullRun | WaitingForLoading | WaitingForUnloading, T::BrokeDown) => Broken,
        _ => return Err(IllegalTransition { state, trigger }),
    };
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TruckState::*;

    /// Hand-written table of every legal (state, trigger) pair.
    fn table() -> Vec<(TruckState, Trigger, TruckState)> {
        let mut t = vec![
            (AtCharging, Trigger::Dispatched, EmptyRun),
            (EmptyRun, Trigger::Arrived, WaitingForLoading),
            (WaitingForLoading, Trigger::LoadingStarted, Loading),
            (Loading, Trigger::LoadingCompleted, FullRun),
            (FullRun, Trigger::Arrived, WaitingForUnloading),
            (WaitingForUnloading, Trigger::UnloadingStarted, Unloading),
            (Unloading, Trigger::UnloadingCompleted, EmptyRun),
            (WaitingForLoading, Trigger::Redispatched, EmptyRun),
            (EmptyRun, Trigger::RepairStarted, UnderRepair),
            (FullRun, Trigger::RepairStarted, UnderRepair),
            (WaitingForLoading, Trigger::RepairStarted, UnderRepair),
            (WaitingForUnloading, Trigger::RepairStarted, UnderRepair),
            (EmptyRun, Trigger::BrokeDown, Broken),
            (FullRun, Trigger::BrokeDown, Broken),
            (WaitingForLoading, Trigger::BrokeDown, Broken),
            (WaitingForUnloading, Trigger::BrokeDown, Broken),
        ];
        for r in Resume::ALL {
            t.push((UnderRepair, Trigger::RepairCompleted(r), r.state()));
        }
        t
    }

    #[test]
    fn exhaustive_product_matches_table() {
        let table = table();
        for state in TruckState::ALL {
            for trigger in Trigger::all() {
                let expected = table
                    .iter()
                    .find(|(s, t, _)| *s == state && *t == trigger)
                    .map(|(_, _, n)| *n);
                assert_eq!(
                    transition(state, trigger).ok(),
                    expected,
                    "{state:?} x {trigger:?}"
                );
            }
        }
    }

    #[test]
    fn cycle_closes() {
        let mut s = EmptyRun;
        for t in [
            Trigger::Arrived,
            Trigger::LoadingStarted,
            Trigger::LoadingCompleted,
            Trigger::Arrived,
            Trigger::UnloadingStarted,
            Trigger::UnloadingCompleted,
        ] {
            s = transition(s, t).unwrap();
        }
        assert_eq!(s, EmptyRun);
        assert_eq!(transition(Loading, Trigger::LoadingCompleted), Ok(FullRun));
        assert_eq!(transition(FullRun, Trigger::BrokeDown), Ok(Broken));
    }

    #[test]
    fn broken_is_absorbing() {
        for trigger in Trigger::all() {
            assert!(transition(Broken, trigger).is_err());
        }
    }
}
