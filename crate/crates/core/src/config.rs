//! Mine configuration: schema, loading, and validation.

use std::fmt;
use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::events::{HazardParams, JamParams};
use crate::sim::Location;
/// Bundled synthetic scenario: 3 truck fleets,
/// Bundled synthetic scenario at the published scale: 3 truck fleets,
/// 71 trucks, 21 shovels, 5 load sites and 5 dump sites.
pub const BUNDLED_SCENARIO: &str = include_str!("../scenarios/synthetic_pit.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Point {
    /// Kilometres.
    pub x: f64,
    /// Kilometres.
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MineConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub charging_site: ChargingSiteConfig,
    pub load_sites: Vec<LoadSiteConfig>,
    pub dump_sites: Vec<DumpSiteConfig>,
    pub roads: RoadsConfig,
    pub simulation: SimulationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ChargingSiteConfig {
    pub name: String,
    pub position: Point,
    pub fleets: Vec<TruckFleetConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TruckFleetConfig {
    pub truck_type: String,
    pub count: u32,
    /// Tons.
    pub capacity: f64,
    /// Kilometres per minute.
    pub speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hazard: Option<HazardParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LoadSiteConfig {
    pub name: String,
    pub position: Point,
    pub shovels: Vec<ShovelFleetConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ShovelFleetConfig {
    pub shovel_type: String,
    pub count: u32,
    /// Tons per bucket.
    pub bucket_size: f64,
    /// Minutes per bucket.
    pub cycle_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hazard: Option<HazardParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DumpSiteConfig {
    pub name: String,
    pub position: Point,
    pub spots: Vec<DumpSpotConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DumpSpotConfig {
    pub count: u32,
    /// Minutes.
    pub unload_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RoadsConfig {
    /// Kilometres from the charging site to each load site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charging_to_load: Option<Vec<f64>>,
    /// Kilometres, indexed `[load][dump]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_to_dump: Option<Vec<Vec<f64>>>,
    pub jam: JamParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maintenance: Option<MaintenanceParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MaintenanceParams {
    pub hazard: HazardParams,
    /// Mean fractional travel-time penalty for entrants.
    pub penalty_mean: f64,
    pub penalty_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Minutes.
    pub duration: f64,
    /// Minutes between tick records and availability checks.
    #[serde(default = "default_tick_interval")]
    pub tick_interval: f64,
    pub seed: u64,
}

fn default_tick_interval() -> f64 {
    1.0
}

/// One validation failure with its path into the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{} validation error(s):\n{}", .0.len(), join_issues(.0))]
    Invalid(Vec<ValidationIssue>),
}

fn join_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl ConfigError {
    pub fn issues(&self) -> Vec<ValidationIssue> {
        match self {
            ConfigError::Invalid(v) => v.clone(),
            ConfigError::Schema { path, message } => {
                vec![ValidationIssue::new(path.clone(), message.clone())]
            }
            ConfigError::Io { path, source } => {
                vec![ValidationIssue::new(path.clone(), source.to_string())]
            }
        }
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<MineConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    MineConfig::from_json(&text)
}

impl MineConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: MineConfig =
            serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_SCENARIO).expect("bundled scenario is valid")
    }

    /// Canonical pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&compact))
    }

    pub fn json_schema() -> String {
        serde_json::to_string_pretty(&schemars::schema_for!(MineConfig)).expect("schema")
    }

    pub fn truck_count(&self) -> usize {
        self.charging_site
            .fleets
            .iter()
            .map(|f| f.count as usize)
            .sum()
    }

    pub fn shovel_count(&self) -> usize {
        self.load_sites
            .iter()
            .flat_map(|s| &s.shovels)
            .map(|s| s.count as usize)
            .sum()
    }

    pub fn position(&self, loc: Location) -> Point {
        match loc {
            Location::Charging => self.charging_site.position,
            Location::Load(i) => self.load_sites[i].position,
            Location::Dump(i) => self.dump_sites[i].position,
        }
    }

    /// Road length between two sites, honouring the explicit matrices.
    pub fn road_distance(&self, a: Location, b: Location) -> f64 {
        match (a, b) {
            (Location::Charging, Location::Load(j)) | (Location::Load(j), Location::Charging) => {
                if let Some(d) = &self.roads.charging_to_load {
                    return d[j];
                }
            }
            (Location::Load(i), Location::Dump(j)) | (Location::Dump(j), Location::Load(i)) => {
                if let Some(d) = &self.roads.load_to_dump {
                    return d[i][j];
                }
            }
            _ => {}
        }
        self.position(a).distance(self.position(b))
    }

    /// Checks every constraint and reports all failures at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let positive = |v: f64, path: String, issues: &mut Vec<ValidationIssue>| {
            if !(v > 0.0 && v.is_finite()) {
                issues.push(ValidationIssue::new(path, "must be > 0"));
            }
        };
        let point = |p: Point, path: &str, issues: &mut Vec<ValidationIssue>| {
            if !(p.x.is_finite() && p.y.is_finite()) {
                issues.push(ValidationIssue::new(path, "coordinates must be finite"));
            }
        };

        let mut names: Vec<(&str, String)> = Vec::new();
        names.push((&self.charging_site.name, "charging_site.name".into()));
        point(
            self.charging_site.position,
            "charging_site.position",
            &mut issues,
        );

        if self.charging_site.fleets.is_empty() {
            issues.push(ValidationIssue::new(
                "charging_site.fleets",
                "at least one truck fleet is required",
            ));
        }
        let mut truck_types: Vec<&str> = Vec::new();
        for (i, fleet) in self.charging_site.fleets.iter().enumerate() {
            let p = format!("charging_site.fleets[{i}]");
            if fleet.count == 0 {
                issues.push(ValidationIssue::new(format!("{p}.count"), "must be > 0"));
            }
            positive(fleet.capacity, format!("{p}.capacity"), &mut issues);
            positive(fleet.speed, format!("{p}.speed"), &mut issues);
            if let Some(h) = &fleet.hazard {
                h.validate(&format!("{p}.hazard"), &mut issues);
            }
            if truck_types.contains(&fleet.truck_type.as_str()) {
                issues.push(ValidationIssue::new(
                    format!("{p}.truck_type"),
                    format!("duplicate truck type {:?}", fleet.truck_type),
                ));
            }
            truck_types.push(&fleet.truck_type);
        }

        if self.load_sites.is_empty() {
            issues.push(ValidationIssue::new(
                "load_sites",
                "at least one load site is required",
            ));
        }
        for (i, site) in self.load_sites.iter().enumerate() {
            let p = format!("load_sites[{i}]");
            names.push((&site.name, format!("{p}.name")));
            point(site.position, &format!("{p}.position"), &mut issues);
            if site.shovels.is_empty() {
                issues.push(ValidationIssue::new(
                    format!("{p}.shovels"),
                    "at least one shovel is required",
                ));
            }
            for (j, shovel) in site.shovels.iter().enumerate() {
                let sp = format!("{p}.shovels[{j}]");
                if shovel.count == 0 {
                    issues.push(ValidationIssue::new(format!("{sp}.count"), "must be > 0"));
                }
                positive(shovel.bucket_size, format!("{sp}.bucket_size"), &mut issues);
                positive(shovel.cycle_time, format!("{sp}.cycle_time"), &mut issues);
                if let Some(h) = &shovel.hazard {
                    h.validate(&format!("{sp}.hazard"), &mut issues);
                }
            }
        }

        if self.dump_sites.is_empty() {
            issues.push(ValidationIssue::new(
                "dump_sites",
                "at least one dump site is required",
            ));
        }
        for (i, site) in self.dump_sites.iter().enumerate() {
            let p = format!("dump_sites[{i}]");
            names.push((&site.name, format!("{p}.name")));
            point(site.position, &format!("{p}.position"), &mut issues);
            if site.spots.is_empty() {
                issues.push(ValidationIssue::new(
                    format!("{p}.spots"),
                    "at least one dump spot is required",
                ));
            }
            for (j, spot) in site.spots.iter().enumerate() {
                let sp = format!("{p}.spots[{j}]");
                if spot.count == 0 {
                    issues.push(ValidationIssue::new(format!("{sp}.count"), "must be > 0"));
                }
                positive(spot.unload_time, format!("{sp}.unload_time"), &mut issues);
            }
        }

        for (k, (name, path)) in names.iter().enumerate() {
            if names[..k].iter().any(|(other, _)| other == name) {
                issues.push(ValidationIssue::new(
                    path.clone(),
                    format!("duplicate site name {name:?}"),
                ));
            }
        }

        let roads = &self.roads;
        roads.jam.validate("roads.jam", &mut issues);
        if let Some(m) = &roads.maintenance {
            m.hazard.validate("roads.maintenance.hazard", &mut issues);
            if !(m.penalty_mean.is_finite()) {
                issues.push(ValidationIssue::new(
                    "roads.maintenance.penalty_mean",
                    "must be finite",
                ));
            }
            if !(m.penalty_std >= 0.0 && m.penalty_std.is_finite()) {
                issues.push(ValidationIssue::new(
                    "roads.maintenance.penalty_std",
                    "must be >= 0",
                ));
            }
        }
        let mut matrix_ok = true;
        if let Some(d) = &roads.charging_to_load {
            if d.len() != self.load_sites.len() {
                matrix_ok = false;
                issues.push(ValidationIssue::new(
                    "roads.charging_to_load",
                    format!(
                        "expected {} entries, found {}",
                        self.load_sites.len(),
                        d.len()
                    ),
                ));
            }
        }
        if let Some(d) = &roads.load_to_dump {
            if d.len() != self.load_sites.len() {
                matrix_ok = false;
                issues.push(ValidationIssue::new(
                    "roads.load_to_dump",
                    format!("expected {} rows, found {}", self.load_sites.len(), d.len()),
                ));
            }
            for (i, row) in d.iter().enumerate() {
                if row.len() != self.dump_sites.len() {
                    matrix_ok = false;
                    issues.push(ValidationIssue::new(
                        format!("roads.load_to_dump[{i}]"),
                        format!(
                            "expected {} entries, found {}",
                            self.dump_sites.len(),
                            row.len()
                        ),
                    ));
                }
            }
        }
        if matrix_ok {
            for (a, b) in road_endpoints(self.load_sites.len(), self.dump_sites.len()) {
                let d = self.road_distance(a, b);
                if !(d > 0.0 && d.is_finite()) {
                    issues.push(ValidationIssue::new(
                        road_path(a, b),
                        format!("road distance must be > 0, found {d}"),
                    ));
                }
            }
        }

        let sim = &self.simulation;
        positive(sim.duration, "simulation.duration".into(), &mut issues);
        positive(
            sim.tick_interval,
            "simulation.tick_interval".into(),
            &mut issues,
        );

        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(issues))
        }
    }
}

/// Every road of the network: charging to load, load to dump, and load to
/// load transfer roads used when a site loses all its shovels.
pub fn road_endpoints(loads: usize, dumps: usize) -> Vec<(Location, Location)> {
    let mut out = Vec::new();
    for j in 0..loads {
        out.push((Location::Charging, Location::Load(j)));
    }
    for i in 0..loads {
        for j in 0..dumps {
            out.push((Location::Load(i), Location::Dump(j)));
        }
    }
    for i in 0..loads {
        for j in (i + 1)..loads {
            out.push((Location::Load(i), Location::Load(j)));
        }
    }
    out
}

fn road_path(a: Location, b: Location) -> String {
    match (a, b) {
        (Location::Charging, Location::Load(j)) => format!("roads.charging_to_load[{j}]"),
        (Location::Load(i), Location::Dump(j)) => format!("roads.load_to_dump[{i}][{j}]"),
        (Location::Load(i), Location::Load(j)) => {
            format!("load_sites[{j}].position (coincides with load_sites[{i}])")
        }
        _ => format!("roads.{a}-{b}"),
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenario_counts() {
        let c = MineConfig::bundled();
        assert_eq!(c.charging_site.fleets.len(), 3);
        assert_eq!(c.truck_count(), 71);
        assert_eq!(c.shovel_count(), 21);
        assert_eq!(c.load_sites.len(), 5);
        assert_eq!(c.dump_sites.len(), 5);
    }

    #[test]
    fn minimal_config_is_valid() {
        fixtures::single_truck().validate().unwrap();
    }

    #[test]
    fn zero_truck_count_names_the_field() {
        let mut c = fixtures::single_truck();
        c.charging_site.fleets[0].count = 0;
        let issues = c.validate().unwrap_err().issues();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].path, "charging_site.fleets[0].count");
    }

    #[test]
    fn all_errors_are_reported() {
        let mut c = fixtures::single_truck();
        c.charging_site.fleets[0].count = 0;
        c.load_sites[0].shovels[0].cycle_time = 0.0;
        c.dump_sites[0].spots[0].unload_time = -1.0;
        c.simulation.duration = 0.0;
        let paths: Vec<_> = c
            .validate()
            .unwrap_err()
            .issues()
            .into_iter()
            .map(|i| i.path)
            .collect();
        assert_eq!(
            paths,
            vec![
                "charging_site.fleets[0].count",
                "load_sites[0].shovels[0].cycle_time",
                "dump_sites[0].spots[0].unload_time",
                "simulation.duration",
            ]
        );
    }

    #[test]
    fn co_located_sites_are_rejected() {
        let mut c = fixtures::single_truck();
        c.load_sites[0].position = c.charging_site.position;
        let issues = c.validate().unwrap_err().issues();
        assert!(issues.iter().any(|i| i.path == "roads.charging_to_load[0]"));
        assert!(issues.iter().any(|i| i.path == "roads.load_to_dump[0][0]"));
    }

    #[test]
    fn explicit_matrix_overrides_euclidean() {
        let mut c = fixtures::single_truck();
        c.roads.charging_to_load = Some(vec![7.5]);
        c.roads.load_to_dump = Some(vec![vec![6.0]]);
        c.validate().unwrap();
        assert_eq!(c.road_distance(Location::Charging, Location::Load(0)), 7.5);
        assert_eq!(c.road_distance(Location::Dump(0), Location::Load(0)), 6.0);
    }

    #[test]
    fn schema_errors_carry_document_path() {
        let mut v: serde_json::Value =
            serde_json::from_str(&fixtures::single_truck().to_json()).unwrap();
        v["load_sites"][0]["shovels"][0]["bucket_size"] = serde_json::json!("big");
        match MineConfig::from_json(&v.to_string()) {
            Err(ConfigError::Schema { path, .. }) => {
                assert_eq!(path, "load_sites[0].shovels[0].bucket_size")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn emit_then_parse_round_trips() {
        let c = MineConfig::bundled();
        assert_eq!(MineConfig::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(
            c.hash(),
            MineConfig::from_json(&c.to_json()).unwrap().hash()
        );
    }
}
