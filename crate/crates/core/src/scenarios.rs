//! Evaluation scenarios and distance sweeps.
//!
//! A single user walks from the reference BS toward the corner shared with
//! cells 6 and 7. Three interference pictures are compared at each distance:
//! real-time traffic on original channels, non-real-time traffic on a
//! borrowed channel with the partners bifurcated, and the same borrowed
//! channel with no interference management at all.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{CellId, ClusterLayout, Point, ServiceBand};
use crate::propagation::{self, InterferenceEntry, InterferenceSet, RadioEnvironment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioKind {
    SchemeRealTime,
    SchemeNonRealTime,
    NoManagementBaseline,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::SchemeRealTime,
        ScenarioKind::SchemeNonRealTime,
        ScenarioKind::NoManagementBaseline,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::SchemeRealTime => "SchemeRealTime",
            ScenarioKind::SchemeNonRealTime => "SchemeNonRealTime",
            ScenarioKind::NoManagementBaseline => "NoManagementBaseline",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::param("scenarios", format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub distance_km: f64,
    pub scenario: ScenarioKind,
    pub sinr_db: f64,
    pub capacity_bps_hz: f64,
    pub outage_prob: f64,
}

/// Everything needed to evaluate the scenarios at a distance.
#[derive(Debug, Clone)]
pub struct ScenarioModel {
    layout: ClusterLayout,
    env: RadioEnvironment,
    inner_ratio: f64,
    power_factor: Option<f64>,
    noise_w: f64,
    donor: CellId,
}

impl ScenarioModel {
    pub fn new(layout: ClusterLayout, env: RadioEnvironment) -> Result<Self> {
        env.validate()?;
        Ok(ScenarioModel {
            layout,
            env,
            inner_ratio: 0.5,
            power_factor: None,
            noise_w: 0.0,
            donor: CellId(6),
        })
    }

    pub fn with_inner_ratio(mut self, inner_ratio: f64) -> Result<Self> {
        crate::geometry::check_inner_ratio(inner_ratio)?;
        self.inner_ratio = inner_ratio;
        Ok(self)
    }

    /// Override the transmit-power scale of bifurcated partners.
    pub fn with_power_factor(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::param(
                "bifurcation_power_factor",
                format!("must be in (0, 1], got {factor}"),
            ));
        }
        self.power_factor = Some(factor);
        Ok(self)
    }

    pub fn with_noise(mut self, noise_w: f64) -> Result<Self> {
        if !(noise_w >= 0.0 && noise_w.is_finite()) {
            return Err(Error::param("noise_w", format!("must be >= 0, got {noise_w}")));
        }
        self.noise_w = noise_w;
        Ok(self)
    }

    /// Cell whose band serves the borrowed-channel scenarios.
    pub fn with_donor(mut self, donor: CellId) -> Result<Self> {
        if donor == self.layout.reference() || self.layout.cell(donor)?.tier != 1 {
            return Err(Error::param("donor", format!("cell {donor} is not a tier-1 neighbour")));
        }
        self.donor = donor;
        Ok(self)
    }

    pub fn layout(&self) -> &ClusterLayout {
        &self.layout
    }

    pub fn env(&self) -> &RadioEnvironment {
        &self.env
    }

    pub fn inner_ratio(&self) -> f64 {
        self.inner_ratio
    }

    pub fn donor(&self) -> CellId {
        self.donor
    }

    /// Power scale of a partner serving the band only in its inner zone.
    ///
    /// Defaults to `inner_ratio^(slope/10)`: the power that keeps the
    /// received level at the inner edge equal to full power at the cell edge.
    pub fn power_factor(&self) -> f64 {
        self.power_factor
            .unwrap_or_else(|| self.inner_ratio.powf(self.env.distance_slope_db() / 10.0))
    }

    /// User position at `distance_km` along the evaluation ray.
    pub fn evaluation_point(&self, distance_km: f64) -> Result<Point> {
        let a = self.layout.cell(CellId(6))?.center;
        let b = self.layout.cell(CellId(7))?.center;
        let mid = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        let norm = mid.norm();
        Ok(Point::new(mid.x / norm * distance_km, mid.y / norm * distance_km))
    }

    fn check_distance(&self, distance_km: f64) -> Result<()> {
        let radius = self.layout.cell_radius();
        if distance_km > 0.0 && distance_km <= radius * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: "user_distance",
                value: distance_km,
            })
        }
    }

    pub fn build_interference(&self, kind: ScenarioKind, distance_km: f64) -> Result<InterferenceSet> {
        self.check_distance(distance_km)?;
        let point = self.evaluation_point(distance_km)?;
        let (service, tier1_scale) = match kind {
            ScenarioKind::SchemeRealTime => (ServiceBand::Original, 1.0),
            ScenarioKind::SchemeNonRealTime => (ServiceBand::Borrowed { donor: self.donor }, self.power_factor()),
            ScenarioKind::NoManagementBaseline => (ServiceBand::Borrowed { donor: self.donor }, 1.0),
        };
        let mut set = InterferenceSet::new();
        for interferer in self.layout.cochannel_interferers(service, point)? {
            let scale = if interferer.tier == 1 { tier1_scale } else { 1.0 };
            set.push(InterferenceEntry {
                distance_km: interferer.distance,
                power_w: scale * propagation::received_power(&self.env, interferer.distance)?,
                tier: interferer.tier as u8,
            })?;
        }
        Ok(set)
    }

    pub fn evaluate(&self, kind: ScenarioKind, distance_km: f64) -> Result<MetricsRecord> {
        let interference = self.build_interference(kind, distance_km)?;
        let s0 = propagation::received_power(&self.env, distance_km)?;
        let sinr = propagation::sinr(s0, &interference, self.noise_w)?;
        Ok(MetricsRecord {
            distance_km,
            scenario: kind,
            sinr_db: propagation::linear_to_db(sinr),
            capacity_bps_hz: propagation::capacity(sinr)?,
            outage_prob: propagation::outage_probability(self.env.gamma_db, s0, &interference)?,
        })
    }

    /// Scenario-major, distance-minor.
    pub fn run_sweep(&self, distances: &[f64], kinds: &[ScenarioKind]) -> Result<Vec<MetricsRecord>> {
        if distances.is_empty() {
            return Err(Error::param("distances", "sweep needs at least one distance"));
        }
        kinds
            .iter()
            .flat_map(|&kind| distances.iter().map(move |&d| self.evaluate(kind, d)))
            .collect()
    }
}

/// `start, start+step, …` up to `stop` inclusive (within a small tolerance).
pub fn sweep_distances(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start > 0.0) {
        return Err(Error::param("d_start", "must be > 0"));
    }
    if !(step > 0.0) {
        return Err(Error::param("d_step", "must be > 0"));
    }
    if !(stop >= start) {
        return Err(Error::param("d_stop", "must be >= d_start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // rounding to 1e-12 keeps 0.1 + 2·0.1 printing as 0.3
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}
