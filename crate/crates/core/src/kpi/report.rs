use std::fmt::Write as _;

use serde::Serialize;

use super::KpiError;
use crate::sim::SimResult;

/// One line of the comparison table. Values are means when the row
/// aggregates several seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub name: String,
    pub produced_tons: f64,
    pub match_factor: Option<f64>,
    pub total_wait_time: f64,
    pub road_jams: f64,
    pub adl: Option<f64>,
    pub runs: usize,
}

impl ReportRow {
    pub fn from_result(r: &SimResult) -> Self {
        Self {
            name: r.policy.clone(),
            produced_tons: r.kpis.produced_tons,
            match_factor: r.kpis.match_factor,
            total_wait_time: r.kpis.total_wait_time,
            road_jams: r.kpis.road_jams as f64,
            adl: r.kpis.adl,
            runs: 1,
        }
    }

    /// Arithmetic mean of per-run rows; optional fields average over the
    /// runs where they are present.
    pub fn mean(name: &str, rows: &[ReportRow]) -> Self {
        let n = rows.len().max(1) as f64;
        let mean_opt = |f: fn(&ReportRow) -> Option<f64>| {
            let v: Vec<f64> = rows.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        Self {
            name: name.to_string(),
            produced_tons: rows.iter().map(|r| r.produced_tons).sum::<f64>() / n,
            match_factor: mean_opt(|r| r.match_factor),
            total_wait_time: rows.iter().map(|r| r.total_wait_time).sum::<f64>() / n,
            road_jams: rows.iter().map(|r| r.road_jams).sum::<f64>() / n,
            adl: mean_opt(|r| r.adl),
            runs: rows.iter().map(|r| r.runs).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub rows: Vec<ReportRow>,
}

pub const COLUMNS: [&str; 6] = [
    "Name",
    "Produced Tons",
    "Matching Factor",
    "Total Wait Time",
    "Road Jams",
    "ADL",
];

/// Groups runs by policy (first-seen order), averages them and sorts the
/// rows by produced tons, highest first.
pub fn summary_report(runs: &[SimResult]) -> Result<SummaryReport, KpiError> {
    let mut groups: Vec<(String, Vec<ReportRow>)> = Vec::new();
    for r in runs {
        let row = ReportRow::from_result(r);
        match groups.iter_mut().find(|(name, _)| *name == r.policy) {
            Some((_, rows)) => rows.push(row),
            None => groups.push((r.policy.clone(), vec![row])),
        }
    }
    SummaryReport::from_rows(
        groups
            .iter()
            .map(|(name, rows)| ReportRow::mean(name, rows))
            .collect(),
    )
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.digits$}"))
}

impl SummaryReport {
    pub fn from_rows(mut rows: Vec<ReportRow>) -> Result<Self, KpiError> {
        if rows.is_empty() {
            return Err(KpiError::NoRuns);
        }
        rows.sort_by(|a, b| b.produced_tons.total_cmp(&a.produced_tons));
        Ok(Self { rows })
    }

    fn cells(r: &ReportRow) -> [String; 6] {
        [
            r.name.clone(),
            format!("{:.2}", r.produced_tons),
            opt(r.match_factor, 4),
            format!("{:.2}", r.total_wait_time),
            format!("{:.1}", r.road_jams),
            // microsecond resolution
            opt(r.adl, 6),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells = Self::cells(r);
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| {} |", COLUMNS.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(COLUMNS.len()));
        for r in &self.rows {
            let _ = writeln!(out, "| {} |", Self::cells(r).join(" | "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str, tons: f64) -> ReportRow {
        ReportRow {
            name: name.into(),
            produced_tons: tons,
            match_factor: Some(0.9),
            total_wait_time: 10.0,
            road_jams: 3.0,
            adl: Some(1e-5),
            runs: 1,
        }
    }

    #[test]
    fn empty_report_is_an_error() {
        assert_eq!(SummaryReport::from_rows(vec![]), Err(KpiError::NoRuns));
        assert_eq!(summary_report(&[]), Err(KpiError::NoRuns));
    }

    #[test]
    fn rows_sorted_by_tons() {
        let r =
            SummaryReport::from_rows(vec![row("a", 1.0), row("b", 3.0), row("c", 2.0)]).unwrap();
        let names: Vec<_> = r.rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["b", "c", "a"]);
    }

    #[test]
    fn csv_and_markdown_columns() {
        let r = SummaryReport::from_rows(vec![row("a", 1.0)]).unwrap();
        let csv = r.to_csv();
        assert_eq!(
            csv.lines().next().unwrap(),
            "Name,Produced Tons,Matching Factor,Total Wait Time,Road Jams,ADL"
        );
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "a,1.00,0.9000,10.00,3.0,0.000010"
        );
        assert_eq!(r.to_markdown().lines().count(), 3);
    }

    #[test]
    fn mean_of_rows() {
        let mut b = row("x", 3.0);
        b.match_factor = None;
        let m = ReportRow::mean("x", &[row("x", 1.0), b]);
        assert_eq!(m.produced_tons, 2.0);
        assert_eq!(m.match_factor, Some(0.9));
        assert_eq!(m.runs, 2);
    }
}
