use std::fmt::Write as _;

use super::TickRecord;
use crate::config::{road_endpoints, MineConfig, Point};
use crate::sim::{EquipmentStatus, Location, RoadStatus, TruckState};

pub const STATE_COLOURS: [(TruckState, &str); 9] = [
    (TruckState::AtCharging, "#7f7f7f"),
    (TruckState::EmptyRun, "#1f77b4"),
    (TruckState::WaitingForLoading, "#ff7f0e"),
    (TruckState::Loading, "#bcbd22"),
    (TruckState::FullRun, "#2ca02c"),
    (TruckState::WaitingForUnloading, "#e377c2"),
    (TruckState::Unloading, "#17becf"),
    (TruckState::UnderRepair, "#9467bd"),
    (TruckState::Broken, "#d62728"),
];

pub fn state_colour(state: TruckState) -> &'static str {
    STATE_COLOURS
        .iter()
        .find(|(s, _)| *s == state)
        .map(|(_, c)| *c)
        .expect("every state has a colour")
}

const W: f64 = 900.0;
const H: f64 = 640.0;
const MAP: f64 = 600.0;
const MARGIN: f64 = 50.0;

struct Frame {
    min: Point,
    scale: f64,
}

impl Frame {
    fn new(config: &MineConfig) -> Self {
        let mut pts = vec![config.charging_site.position];
        pts.extend(config.load_sites.iter().map(|s| s.position));
        pts.extend(config.dump_sites.iter().map(|s| s.position));
        let min = Point::new(
            pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
            pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
        );
        let span = pts
            .iter()
            .map(|p| (p.x - min.x).max(p.y - min.y))
            .fold(0.0, f64::max);
        let scale = if span > 0.0 {
            (MAP - 2.0 * MARGIN) / span
        } else {
            1.0
        };
        Self { min, scale }
    }

    // y grows upward in mine coordinates
    fn map(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            MAP - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

fn position(config: &MineConfig, loc: Location) -> Point {
    match loc {
        Location::Charging => config.charging_site.position,
        Location::Load(i) => config.load_sites[i].position,
        Location::Dump(i) => config.dump_sites[i].position,
    }
}

fn badge(out: &mut String, x: f64, y: f64, n: usize, fill: &str) {
    let _ = writeln!(
        out,
        r##"<g><circle cx="{x:.1}" cy="{y:.1}" r="8" fill="{fill}" stroke="#222"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="10">{n}</text></g>"##,
        y + 3.5
    );
}

/// Bird's-eye SVG of one tick. Output depends only on the record and config.
pub fn render_frame(record: &TickRecord, config: &MineConfig) -> String {
    let f = Frame::new(config);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r##"<rect width="{W}" height="{H}" fill="#fbfaf6"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="24" font-size="16">{} t={:.1} min (tick {})</text>"#,
        crate::kpi::escape_xml(&config.name),
        record.time,
        record.index
    );

    let ends = road_endpoints(config.load_sites.len(), config.dump_sites.len());
    out.push_str("<g>\n");
    for r in &record.roads {
        let Some(&(a, b)) = ends.get(r.id) else {
            continue;
        };
        let (x1, y1) = f.map(position(config, a));
        let (x2, y2) = f.map(position(config, b));
        let (stroke, dash) = match (r.jammed, r.status) {
            (true, _) => ("#d62728", ""),
            (false, RoadStatus::UnderMaintenance) => ("#ff7f0e", r#" stroke-dasharray="6 4""#),
            (false, RoadStatus::Up) => ("#c8c2b4", ""),
        };
        let _ = writeln!(
            out,
            r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="{stroke}" stroke-width="2"{dash}/>"#
        );
    }
    out.push_str("</g>\n");

    let (cx, cy) = f.map(config.charging_site.position);
    let _ = writeln!(
        out,
        r##"<rect x="{:.1}" y="{:.1}" width="20" height="20" fill="#555"/><text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
        cx - 10.0,
        cy - 10.0,
        cy + 26.0,
        crate::kpi::escape_xml(&config.charging_site.name)
    );
    for (i, site) in config.load_sites.iter().enumerate() {
        let (x, y) = f.map(site.position);
        let _ = writeln!(
            out,
            r##"<polygon points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="#8c564b"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            x,
            y - 13.0,
            x - 12.0,
            y + 9.0,
            x + 12.0,
            y + 9.0,
            y + 26.0,
            crate::kpi::escape_xml(&site.name)
        );
        if let Some(tick) = record.load_sites.get(i) {
            for (j, sh) in tick.shovels.iter().enumerate() {
                let fill = match sh.status {
                    EquipmentStatus::Up => "#ffffff",
                    EquipmentStatus::UnderRepair => "#f5c242",
                    EquipmentStatus::Broken => "#e06666",
                };
                badge(
                    &mut out,
                    x + 20.0 + 18.0 * j as f64,
                    y - 18.0,
                    sh.queue,
                    fill,
                );
            }
            if tick.parking > 0 {
                badge(&mut out, x - 22.0, y - 18.0, tick.parking, "#dddddd");
            }
        }
    }
    for (i, site) in config.dump_sites.iter().enumerate() {
        let (x, y) = f.map(site.position);
        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="22" height="16" fill="#393b79"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            x - 11.0,
            y - 8.0,
            y + 24.0,
            crate::kpi::escape_xml(&site.name)
        );
        if let Some(tick) = record.dump_sites.get(i) {
            for (j, spot) in tick.spots.iter().enumerate() {
                badge(
                    &mut out,
                    x + 20.0 + 18.0 * j as f64,
                    y - 18.0,
                    spot.queue,
                    "#ffffff",
                );
            }
        }
    }

    out.push_str("<g>\n");
    for t in &record.trucks {
        let (x, y) = f.map(Point::new(t.x, t.y));
        let _ = writeln!(
            out,
            r##"<circle cx="{x:.1}" cy="{y:.1}" r="4" fill="{}" stroke="#222" stroke-width="0.5"/>"##,
            state_colour(t.state)
        );
    }
    out.push_str("</g>\n");

    let lx = MAP + 20.0;
    for (k, (state, colour)) in STATE_COLOURS.iter().enumerate() {
        let ly = 60.0 + 22.0 * k as f64;
        let n = record.trucks.iter().filter(|t| t.state == *state).count();
        let _ = writeln!(
            out,
            r##"<circle cx="{lx:.1}" cy="{ly:.1}" r="6" fill="{colour}" stroke="#222"/><text x="{:.1}" y="{:.1}">{} ({n})</text>"##,
            lx + 12.0,
            ly + 4.0,
            state.label()
        );
    }
    let tons = record.tons_received();
    let _ = writeln!(
        out,
        r#"<text x="{lx:.1}" y="{:.1}">delivered: {tons:.0} t</text>"#,
        60.0 + 22.0 * STATE_COLOURS.len() as f64 + 10.0
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::fixtures::single_truck;
    use crate::sim::World;

    #[test]
    fn every_state_has_a_distinct_colour() {
        let mut colours: Vec<_> = STATE_COLOURS.iter().map(|(_, c)| *c).collect();
        colours.sort();
        colours.dedup();
        assert_eq!(colours.len(), TruckState::ALL.len());
        for s in TruckState::ALL {
            state_colour(s);
        }
    }

    #[test]
    fn frame_is_deterministic() {
        let c = single_truck();
        let rec = World::new(&c).tick_record(0, vec![]);
        let a = render_frame(&rec, &c);
        assert_eq!(a, render_frame(&rec, &c));
        assert!(a.matches("<circle cx").count() >= 1);
    }

    #[test]
    fn frame_without_trucks_draws_sites() {
        let c = single_truck();
        let mut rec = World::new(&c).tick_record(0, vec![]);
        rec.trucks.clear();
        let svg = render_frame(&rec, &c);
        assert!(svg.contains("<polygon"));
        assert!(svg.contains("fill=\"#393b79\""));
        assert!(!svg.contains(r#"r="4""#));
    }
}
