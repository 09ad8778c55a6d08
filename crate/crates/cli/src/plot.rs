//! Minimal static SVG line charts, one series per scenario.

use std::fmt::Write as _;

use cim_core::{MetricsRecord, ScenarioKind};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 190.0;
const MARGIN_Y: f64 = 40.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

#[derive(Debug, Clone, Copy)]
pub enum Metric {
    Sinr,
    Capacity,
    Outage,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Sinr, Metric::Capacity, Metric::Outage];

    pub fn file_name(&self) -> &'static str {
        match self {
            Metric::Sinr => "sinr.svg",
            Metric::Capacity => "capacity.svg",
            Metric::Outage => "outage.svg",
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Metric::Sinr => "SINR (dB)",
            Metric::Capacity => "Capacity (bps/Hz)",
            Metric::Outage => "Outage probability",
        }
    }

    fn value(&self, r: &MetricsRecord) -> f64 {
        match self {
            Metric::Sinr => r.sinr_db,
            Metric::Capacity => r.capacity_bps_hz,
            Metric::Outage => r.outage_prob,
        }
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub fn render(metric: Metric, records: &[MetricsRecord], kinds: &[ScenarioKind]) -> String {
    let (x0, x1) = bounds(records.iter().map(|r| r.distance_km));
    let (y0, y1) = bounds(records.iter().map(|r| metric.value(r)));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_Y + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();

    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.2}</text>"#,
            sx(xv),
            HEIGHT - MARGIN_Y + 16.0,
            xv
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            MARGIN_LEFT - 6.0,
            sy(yv) + 4.0,
            yv
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Distance from BS (km)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 6.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        MARGIN_Y + plot_h / 2.0,
        MARGIN_Y + plot_h / 2.0,
        metric.label()
    )
    .unwrap();

    for (i, &kind) in kinds.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = records
            .iter()
            .filter(|r| r.scenario == kind)
            .map(|r| format!("{:.2},{:.2}", sx(r.distance_km), sy(metric.value(r))))
            .collect();
        writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        )
        .unwrap();
        let ly = MARGIN_Y + 16.0 + 20.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            kind.as_str()
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
