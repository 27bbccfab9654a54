//! Stochastic layer: traffic jams, road maintenance, and truck/shovel faults.
//!
//! Every sampler here is a pure function of its parameters and an RNG handle.
//! The kernel owns the RNG substreams (see [`rng`]) and applies the sampled
//! events to the world.

pub mod hazard;
pub mod jam;
pub mod rng;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

pub use hazard::{sample_availability, sample_penalty_fraction, FaultOutcome};
pub use jam::{jam_position_density, resolve_jam, sample_jam, JamDensity, JamDraw};
pub use rng::{substream, SimRng, Stream};

/// Jam model for one road class.
///
/// `mu` and `sigma` are in completion-rate units: a jam is centred at
/// `C_i(t) + mu` for each truck `i` already on the road.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct JamParams {
    #[serde(default)]
    pub mu: f64,
    pub sigma: f64,
    pub jam_probability: f64,
    pub weibull_shape: f64,
    /// Minutes.
    pub weibull_scale: f64,
}

impl JamParams {
    /// Jam parameters that never fire.
    pub fn disabled() -> Self {
        Self {
            mu: 0.0,
            sigma: 0.1,
            jam_probability: 0.0,
            weibull_shape: 2.0,
            weibull_scale: 10.0,
        }
    }

    pub fn validate(&self, path: &str, issues: &mut Vec<crate::config::ValidationIssue>) {
        use crate::config::ValidationIssue as V;
        if !self.mu.is_finite() {
            issues.push(V::new(format!("{path}.mu"), "must be finite"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            issues.push(V::new(format!("{path}.sigma"), "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.jam_probability) {
            issues.push(V::new(
                format!("{path}.jam_probability"),
                "must be in [0, 1]",
            ));
        }
        if !(self.weibull_shape > 0.0 && self.weibull_shape.is_finite()) {
            issues.push(V::new(format!("{path}.weibull_shape"), "must be > 0"));
        }
        if !(self.weibull_scale > 0.0 && self.weibull_scale.is_finite()) {
            issues.push(V::new(format!("{path}.weibull_scale"), "must be > 0"));
        }
    }
}

/// Exponential availability model shared by roads, trucks and shovels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HazardParams {
    /// Fault rate per minute.
    pub lambda: f64,
    /// Minutes.
    pub repair_mean: f64,
    /// Minutes.
    pub repair_std: f64,
    /// Share of faults that are terminal. Ignored for roads.
    #[serde(default)]
    pub breakdown_probability: f64,
}

impl HazardParams {
    pub fn validate(&self, path: &str, issues: &mut Vec<crate::config::ValidationIssue>) {
        use crate::config::ValidationIssue as V;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            issues.push(V::new(format!("{path}.lambda"), "must be >= 0"));
        }
        if !(self.repair_mean > 0.0 && self.repair_mean.is_finite()) {
            issues.push(V::new(format!("{path}.repair_mean"), "must be > 0"));
        }
        if !(self.repair_std >= 0.0 && self.repair_std.is_finite()) {
            issues.push(V::new(format!("{path}.repair_std"), "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.breakdown_probability) {
            issues.push(V::new(
                format!("{path}.breakdown_probability"),
                "must be in [0, 1]",
            ));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RandomEventKind {
    Jam,
    RoadMaintenance,
    TruckRepair,
    TruckBreakdown,
    ShovelRepair,
    ShovelBreakdown,
}

/// Entity a random event applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Road(usize),
    Truck(usize),
    Shovel { site: usize, shovel: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomEvent {
    pub kind: RandomEventKind,
    pub subject: Subject,
    pub start: f64,
    /// Minutes; absent for breakdowns.
    pub duration: Option<f64>,
    /// Travel-time penalty applied to road entrants while maintenance lasts.
    pub penalty_fraction: Option<f64>,
}
