//! Browser bindings: run a scenario, scrub its frames, compare policies.
//!
//! Every exported function has a plain Rust counterpart returning
//! `Result<_, String>` so the logic can be tested natively.

use pitsim::kpi::{line_chart_svg, ReportRow, Series};
use pitsim::ticklog::{format_event, render_frame};
use pitsim::{Experiment, KpiSummary, MineConfig, PolicyRegistry, RunOptions, SimResult};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn load(config_json: Option<String>) -> Result<MineConfig, String> {
    match config_json.as_deref().map(str::trim) {
        None | Some("") => Ok(MineConfig::bundled()),
        Some(text) => MineConfig::from_json(text).map_err(|e| {
            let issues: Vec<String> = e.issues().iter().map(ToString::to_string).collect();
            if issues.is_empty() {
                e.to_string()
            } else {
                issues.join("\n")
            }
        }),
    }
}

fn duration_or(config: &MineConfig, duration: Option<f64>) -> f64 {
    duration.unwrap_or(config.simulation.duration)
}

fn charts(runs: &[&SimResult], duration: f64) -> (String, String) {
    let production: Vec<Series> = runs
        .iter()
        .map(|r| Series {
            name: r.policy.clone(),
            points: r.kpis.production_curve.clone(),
        })
        .collect();
    let waiting: Vec<Series> = runs
        .iter()
        .map(|r| Series {
            name: r.policy.clone(),
            points: r.kpis.waiting_curve.clone(),
        })
        .collect();
    (
        line_chart_svg("Cumulative production", "tons", duration, &production),
        line_chart_svg("Waiting trucks", "trucks", duration, &waiting),
    )
}

/// Bundled synthetic scenario as pretty JSON.
#[wasm_bindgen(js_name = bundledConfig)]
pub fn bundled_config() -> String {
    MineConfig::bundled().to_json()
}

/// Registered dispatch policy names.
#[wasm_bindgen]
pub fn policies() -> Vec<String> {
    PolicyRegistry::with_baselines()
        .names()
        .into_iter()
        .map(String::from)
        .collect()
}

#[derive(Serialize)]
struct RunView<'a> {
    policy: &'a str,
    seed: u64,
    duration: f64,
    ticks: usize,
    kpis: &'a KpiSummary,
}

/// One finished run kept in memory so the page can render any tick.
#[wasm_bindgen]
pub struct Simulation {
    config: MineConfig,
    result: SimResult,
    production_svg: String,
    waiting_svg: String,
}

impl Simulation {
    pub fn create(
        config_json: Option<String>,
        policy: &str,
        seed: u64,
        duration: Option<f64>,
        random_events: bool,
    ) -> Result<Simulation, String> {
        let config = load(config_json)?;
        let duration = duration_or(&config, duration);
        let registry = PolicyRegistry::with_baselines();
        let mut p = registry.create(policy).ok_or_else(|| {
            format!(
                "unknown policy {policy:?}; registered: {}",
                registry.names().join(", ")
            )
        })?;
        let options = RunOptions { random_events };
        let result = pitsim::run_with_options(&config, p.as_mut(), seed, duration, &options)
            .map_err(|e| e.to_string())?;
        let (production_svg, waiting_svg) = charts(&[&result], duration);
        Ok(Simulation {
            config,
            result,
            production_svg,
            waiting_svg,
        })
    }

    pub fn frame(&self, index: usize) -> Result<String, String> {
        let ticks = &self.result.archive.ticks;
        ticks
            .get(index)
            .map(|t| render_frame(t, &self.config))
            .ok_or_else(|| {
                format!(
                    "tick {index} out of range 0..{}",
                    ticks.len().saturating_sub(1)
                )
            })
    }

    pub fn result(&self) -> &SimResult {
        &self.result
    }
}

#[wasm_bindgen]
impl Simulation {
    /// Runs `policy` on the given config (bundled scenario if empty).
    #[wasm_bindgen(constructor)]
    pub fn new(
        config_json: Option<String>,
        policy: &str,
        seed: u64,
        duration: Option<f64>,
        random_events: Option<bool>,
    ) -> Result<Simulation, JsError> {
        Self::create(
            config_json,
            policy,
            seed,
            duration,
            random_events.unwrap_or(true),
        )
        .map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = tickCount)]
    pub fn tick_count(&self) -> usize {
        self.result.archive.ticks.len()
    }

    #[wasm_bindgen(js_name = tickTime)]
    pub fn tick_time(&self, index: usize) -> f64 {
        self.result
            .archive
            .ticks
            .get(index)
            .map_or(f64::NAN, |t| t.time)
    }

    /// SVG snapshot of tick `index`.
    #[wasm_bindgen(js_name = renderFrame)]
    pub fn render_frame(&self, index: usize) -> Result<String, JsError> {
        self.frame(index).map_err(|e| JsError::new(&e))
    }

    /// Events logged between the previous tick and tick `index`, as JSON.
    #[wasm_bindgen(js_name = tickEvents)]
    pub fn tick_events(&self, index: usize) -> String {
        let events = self.result.archive.ticks.get(index).map(|t| &t.events);
        serde_json::to_string(&events).unwrap_or_default()
    }

    /// Events logged between the previous tick and tick `index`, one
    /// formatted line each.
    #[wasm_bindgen(js_name = tickLog)]
    pub fn tick_log(&self, index: usize) -> String {
        let Some(tick) = self.result.archive.ticks.get(index) else {
            return String::new();
        };
        let mut out = String::new();
        for r in &tick.events {
            let (level, msg) = format_event(r);
            out.push_str(&format!("[{:>8.3}] {level:<5} {msg}\n", r.time));
        }
        out
    }

    /// Run summary and KPIs as JSON.
    #[wasm_bindgen(js_name = summaryJson)]
    pub fn summary_json(&self) -> String {
        let r = &self.result;
        serde_json::to_string(&RunView {
            policy: &r.policy,
            seed: r.seed,
            duration: r.duration,
            ticks: r.archive.ticks.len(),
            kpis: &r.kpis,
        })
        .unwrap_or_default()
    }

    #[wasm_bindgen(js_name = productionSvg)]
    pub fn production_svg(&self) -> String {
        self.production_svg.clone()
    }

    #[wasm_bindgen(js_name = waitingSvg)]
    pub fn waiting_svg(&self) -> String {
        self.waiting_svg.clone()
    }
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub rows: Vec<ReportRow>,
    pub production_svg: String,
    pub waiting_svg: String,
    pub csv: String,
}

/// Runs every policy in `names` (all baselines if empty) on one seed.
pub fn compare_policies(
    config_json: Option<String>,
    names: &[String],
    seed: u64,
    duration: Option<f64>,
) -> Result<Comparison, String> {
    let config = load(config_json)?;
    let duration = duration_or(&config, duration);
    let registry = PolicyRegistry::with_baselines();
    let names = if names.is_empty() {
        registry.names().into_iter().map(String::from).collect()
    } else {
        names.to_vec()
    };
    let mut experiment = Experiment::new(names, vec![seed], duration);
    // no threads in the browser
    experiment.threads = 1;
    let runs = experiment
        .run(&config, &registry)
        .map_err(|e| e.to_string())?;
    let report = pitsim::harness::mean_report(&runs).map_err(|e| e.to_string())?;
    let refs: Vec<&SimResult> = runs.iter().collect();
    let (production_svg, waiting_svg) = charts(&refs, duration);
    Ok(Comparison {
        csv: report.to_csv(),
        rows: report.rows,
        production_svg,
        waiting_svg,
    })
}

/// `compare_policies` for JavaScript; `names` is a JSON array of strings.
#[wasm_bindgen]
pub fn compare(
    config_json: Option<String>,
    names_json: Option<String>,
    seed: u64,
    duration: Option<f64>,
) -> Result<String, JsError> {
    let names: Vec<String> = match names_json.as_deref() {
        None | Some("") => Vec::new(),
        Some(text) => serde_json::from_str(text).map_err(|e| JsError::new(&e.to_string()))?,
    };
    let c = compare_policies(config_json, &names, seed, duration).map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&c).map_err(|e| JsError::new(&e.to_string()))
}
