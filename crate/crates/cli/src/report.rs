use std::fmt::Write as _;

use cim_core::{MetricsRecord, ScenarioKind};

pub const METRICS_HEADER: &str = "distance_km,scenario,sinr_db,capacity_bps_hz,outage_prob";

pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{:.6},{},{:.6},{:.6},{:.6}",
            r.distance_km,
            r.scenario.as_str(),
            r.sinr_db,
            r.capacity_bps_hz,
            r.outage_prob
        )
        .unwrap();
    }
    out
}

/// Min SINR and max outage per scenario, in the order scenarios were run.
pub fn summary_table(records: &[MetricsRecord], kinds: &[ScenarioKind]) -> String {
    let name_width = kinds.iter().map(|k| k.as_str().len()).max().unwrap_or(8).max(8);
    let mut out = String::new();
    writeln!(
        out,
        "{:<name_width$}  {:>13}  {:>15}",
        "scenario", "min_sinr_db", "max_outage"
    )
    .unwrap();
    for &kind in kinds {
        let rows = records.iter().filter(|r| r.scenario == kind);
        let min_sinr = rows.clone().map(|r| r.sinr_db).fold(f64::INFINITY, f64::min);
        let max_outage = rows.map(|r| r.outage_prob).fold(f64::NEG_INFINITY, f64::max);
        writeln!(
            out,
            "{:<name_width$}  {:>13.6}  {:>15.6}",
            kind.as_str(),
            min_sinr,
            max_outage
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(d: f64, scenario: ScenarioKind, sinr: f64, outage: f64) -> MetricsRecord {
        MetricsRecord {
            distance_km: d,
            scenario,
            sinr_db: sinr,
            capacity_bps_hz: 1.0,
            outage_prob: outage,
        }
    }

    #[test]
    fn fixed_six_decimals() {
        let csv = metrics_csv(&[record(0.1, ScenarioKind::SchemeRealTime, 45.0365451, 0.000249)]);
        assert_eq!(
            csv,
            "distance_km,scenario,sinr_db,capacity_bps_hz,outage_prob\n\
             0.100000,SchemeRealTime,45.036545,1.000000,0.000249\n"
        );
    }

    #[test]
    fn summary_picks_extremes() {
        let rs = [
            record(0.1, ScenarioKind::SchemeRealTime, 40.0, 0.1),
            record(0.2, ScenarioKind::SchemeRealTime, 30.0, 0.3),
        ];
        let table = summary_table(&rs, &[ScenarioKind::SchemeRealTime]);
        let line = table.lines().nth(1).unwrap();
        assert!(line.contains("30.000000"));
        assert!(line.contains("0.300000"));
    }
}
