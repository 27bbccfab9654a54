//! Policy x seed experiment matrix.

use std::thread;

use crate::config::MineConfig;
use crate::dispatch::PolicyRegistry;
use crate::kpi::{summary_report, KpiError, ReportRow, SummaryReport};
use crate::sim::{run_with_options, RunOptions, SimError, SimResult};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("no dispatch policy given")]
    NoPolicies,
    #[error("no seed given")]
    NoSeeds,
    #[error("unknown policy {name:?}; registered: {}", available.join(", "))]
    UnknownPolicy {
        name: String,
        available: Vec<String>,
    },
    #[error("{policy} seed {seed}: {source}")]
    Run {
        policy: String,
        seed: u64,
        #[source]
        source: SimError,
    },
    #[error(transparent)]
    Report(#[from] KpiError),
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub policies: Vec<String>,
    pub seeds: Vec<u64>,
    pub duration: f64,
    pub options: RunOptions,
    /// Worker threads; 1 runs every cell on the calling thread.
    pub threads: usize,
}

impl Experiment {
    pub fn new(policies: Vec<String>, seeds: Vec<u64>, duration: f64) -> Self {
        Self {
            policies,
            seeds,
            duration,
            options: RunOptions::default(),
            threads: thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    /// Runs every (policy, seed) cell. Results come back policy-major in the
    /// order given, independent of the thread count.
    pub fn run(
        &self,
        config: &MineConfig,
        registry: &PolicyRegistry,
    ) -> Result<Vec<SimResult>, HarnessError> {
        if self.policies.is_empty() {
            return Err(HarnessError::NoPolicies);
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::NoSeeds);
        }
        for name in &self.policies {
            if !registry.contains(name) {
                return Err(HarnessError::UnknownPolicy {
                    name: name.clone(),
                    available: registry.names().into_iter().map(String::from).collect(),
                });
            }
        }
        let cells: Vec<(&str, u64)> = self
            .policies
            .iter()
            .flat_map(|p| self.seeds.iter().map(move |&s| (p.as_str(), s)))
            .collect();
        let run_cell = |&(name, seed): &(&str, u64)| {
            let mut policy = registry.create(name).expect("checked above");
            run_with_options(config, policy.as_mut(), seed, self.duration, &self.options).map_err(
                |source| HarnessError::Run {
                    policy: name.to_string(),
                    seed,
                    source,
                },
            )
        };
        let threads = self.threads.clamp(1, cells.len());
        if threads == 1 {
            return cells.iter().map(run_cell).collect();
        }
        let chunk = cells.len().div_ceil(threads);
        let parts: Vec<Vec<Result<SimResult, HarnessError>>> = thread::scope(|scope| {
            let handles: Vec<_> = cells
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(run_cell).collect()))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("simulation thread panicked"))
                .collect()
        });
        parts.into_iter().flatten().collect()
    }
}

/// One row per run, in run order.
pub fn per_seed_rows(runs: &[SimResult]) -> Vec<(u64, ReportRow)> {
    runs.iter()
        .map(|r| (r.seed, ReportRow::from_result(r)))
        .collect()
}

/// Per-policy means sorted by produced tons.
pub fn mean_report(runs: &[SimResult]) -> Result<SummaryReport, HarnessError> {
    Ok(summary_report(runs)?)
}
