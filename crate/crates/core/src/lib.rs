//! Discrete-event simulation of truck haulage in an open-pit mine, with
//! pluggable dispatch policies, stochastic road and equipment events, and
//! replayable per-minute snapshots.
//!
//! ```
//! use pitsim::{dispatch::PolicyRegistry, run_simulation, MineConfig};
//!
//! let config = MineConfig::bundled();
//! let mut policy = PolicyRegistry::with_baselines().create("SQDispatcher").unwrap();
//! let result = run_simulation(&config, policy.as_mut(), 7, 30.0).unwrap();
//! assert_eq!(result.archive.ticks.len(), 31);
//! ```

pub mod config;
pub mod dispatch;
pub mod events;
pub mod harness;
pub mod kpi;
pub mod sim;
pub mod ticklog;

pub use config::{parse_config, ConfigError, MineConfig};
pub use dispatch::{DispatchPolicy, PolicyRegistry};
pub use harness::Experiment;
pub use kpi::KpiSummary;
pub use sim::{run_simulation, run_with_options, RunOptions, SimError, SimResult};
