//! JSON run configuration. Omitted fields fall back to the evaluation defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cim_core::geometry::ClusterLayout;
use cim_core::scenarios::sweep_distances;
use cim_core::{BorrowPolicy, CellId, RadioEnvironment, ScenarioKind, ScenarioModel};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub carrier_mhz: f64,
    pub bs_height_m: f64,
    pub ms_height_m: f64,
    pub penetration_loss_db: f64,
    pub tx_power_w: f64,
    pub gamma_db: f64,
    pub cell_radius_km: f64,
    pub tier_count: u32,
    pub channels_per_cell: u32,
    pub inner_ratio: f64,
    /// Per-donor cap for the first group; defaults to a quarter of the pool.
    pub a_th: Option<usize>,
    pub b_th: Option<usize>,
    pub donors_per_group: usize,
    pub d_start: f64,
    pub d_stop: f64,
    pub d_step: f64,
    pub scenarios: Vec<String>,
    pub noise_w: f64,
    pub bifurcation_power_factor: Option<f64>,
    pub donor: u32,
    /// Calls already in progress in neighbour cells before a replay starts.
    pub donor_occupancy: BTreeMap<u32, usize>,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let env = RadioEnvironment::default();
        RunConfig {
            carrier_mhz: env.carrier_mhz,
            bs_height_m: env.bs_height_m,
            ms_height_m: env.ms_height_m,
            penetration_loss_db: env.penetration_loss_db,
            tx_power_w: env.tx_power_w,
            gamma_db: env.gamma_db,
            cell_radius_km: 1.0,
            tier_count: 2,
            channels_per_cell: 120,
            inner_ratio: 0.5,
            a_th: None,
            b_th: None,
            donors_per_group: 1,
            d_start: 0.1,
            d_stop: 1.0,
            d_step: 0.1,
            scenarios: ScenarioKind::ALL.iter().map(|k| k.as_str().to_owned()).collect(),
            noise_w: 0.0,
            bifurcation_power_factor: None,
            donor: 6,
            donor_occupancy: BTreeMap::new(),
            out_dir: None,
        }
    }
}

/// Configuration error naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for FieldError {}

fn field(field: &'static str, reason: impl Into<String>) -> FieldError {
    FieldError {
        field,
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).context("config is not a valid run configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn environment(&self) -> RadioEnvironment {
        RadioEnvironment {
            carrier_mhz: self.carrier_mhz,
            bs_height_m: self.bs_height_m,
            ms_height_m: self.ms_height_m,
            penetration_loss_db: self.penetration_loss_db,
            tx_power_w: self.tx_power_w,
            gamma_db: self.gamma_db,
        }
    }

    pub fn first_threshold(&self) -> usize {
        self.a_th.unwrap_or(self.channels_per_cell as usize / 4)
    }

    pub fn second_threshold(&self) -> usize {
        self.b_th.unwrap_or(self.channels_per_cell as usize / 4)
    }

    pub fn policy(&self) -> BorrowPolicy {
        let mut policy = BorrowPolicy::for_pool(self.channels_per_cell)
            .with_thresholds(self.first_threshold(), self.second_threshold());
        policy.donors_per_group = self.donors_per_group;
        policy
    }

    pub fn scenario_kinds(&self) -> Result<Vec<ScenarioKind>, FieldError> {
        self.scenarios
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| field("scenarios", format!("unknown scenario `{s}`")))
            })
            .collect()
    }

    pub fn distances(&self) -> Result<Vec<f64>, FieldError> {
        sweep_distances(self.d_start, self.d_stop, self.d_step).map_err(|e| match e {
            cim_core::Error::InvalidParameter { name, reason } => field(
                match name {
                    "d_start" => "d_start",
                    "d_stop" => "d_stop",
                    _ => "d_step",
                },
                reason,
            ),
            other => field("d_step", other.to_string()),
        })
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(field(name, format!("must be > 0, got {v}")))
            }
        };
        positive("carrier_mhz", self.carrier_mhz)?;
        positive("bs_height_m", self.bs_height_m)?;
        positive("ms_height_m", self.ms_height_m)?;
        positive("penetration_loss_db", self.penetration_loss_db)?;
        positive("tx_power_w", self.tx_power_w)?;
        if !self.gamma_db.is_finite() {
            return Err(field("gamma_db", "must be finite"));
        }
        positive("cell_radius_km", self.cell_radius_km)?;
        if !(1..=2).contains(&self.tier_count) {
            return Err(field("tier_count", format!("must be 1 or 2, got {}", self.tier_count)));
        }
        if self.channels_per_cell == 0 {
            return Err(field("channels_per_cell", "must be >= 1"));
        }
        if !(self.inner_ratio > 0.0 && self.inner_ratio < 1.0) {
            return Err(field(
                "inner_ratio",
                format!("must be in (0, 1), got {}", self.inner_ratio),
            ));
        }
        if self.donors_per_group == 0 {
            return Err(field("donors_per_group", "must be >= 1"));
        }
        positive("d_start", self.d_start)?;
        positive("d_step", self.d_step)?;
        if self.d_stop > self.cell_radius_km * (1.0 + 1e-12) {
            return Err(field(
                "d_stop",
                format!("must not exceed cell radius {}", self.cell_radius_km),
            ));
        }
        if self.d_stop < self.d_start {
            return Err(field("d_stop", "must be >= d_start"));
        }
        if self.scenarios.is_empty() {
            return Err(field("scenarios", "must list at least one scenario"));
        }
        self.scenario_kinds()?;
        if !(self.noise_w >= 0.0 && self.noise_w.is_finite()) {
            return Err(field("noise_w", "must be >= 0"));
        }
        if let Some(f) = self.bifurcation_power_factor {
            if !(f > 0.0 && f <= 1.0) {
                return Err(field("bifurcation_power_factor", "must be in (0, 1]"));
            }
        }
        if !(2..=7).contains(&self.donor) {
            return Err(field("donor", "must be a tier-1 cell id (2..=7)"));
        }
        for (&cell, &count) in &self.donor_occupancy {
            if !(2..=7).contains(&cell) {
                return Err(field("donor_occupancy", format!("cell {cell} is not a tier-1 cell")));
            }
            if count > self.channels_per_cell as usize {
                return Err(field(
                    "donor_occupancy",
                    format!("cell {cell}: {count} exceeds the pool"),
                ));
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<ClusterLayout> {
        Ok(ClusterLayout::build(self.cell_radius_km, self.tier_count)?)
    }

    pub fn scenario_model(&self) -> Result<ScenarioModel> {
        let mut model = ScenarioModel::new(self.layout()?, self.environment())?
            .with_inner_ratio(self.inner_ratio)?
            .with_noise(self.noise_w)?
            .with_donor(CellId(self.donor))?;
        if let Some(f) = self.bifurcation_power_factor {
            model = model.with_power_factor(f)?;
        }
        Ok(model)
    }

    /// Resolved parameters, one `name value` row each.
    pub fn parameter_table(&self) -> Result<String> {
        let model = self.scenario_model()?;
        let rows: Vec<(&str, String)> = vec![
            ("original channels per cell", self.channels_per_cell.to_string()),
            ("center frequency (MHz)", format!("{}", self.carrier_mhz)),
            ("BS transmit power (W)", format!("{}", self.tx_power_w)),
            ("cell radius (km)", format!("{}", self.cell_radius_km)),
            ("penetration loss (dB)", format!("{}", self.penetration_loss_db)),
            ("SINR threshold gamma (dB)", format!("{}", self.gamma_db)),
            ("BS height (m)", format!("{}", self.bs_height_m)),
            ("mobile antenna height (m)", format!("{}", self.ms_height_m)),
            ("interference tiers", self.tier_count.to_string()),
            ("inner-zone ratio", format!("{}", self.inner_ratio)),
            ("A_Th (first group cap)", self.first_threshold().to_string()),
            ("B_Th (second group cap)", self.second_threshold().to_string()),
            ("donors per group", self.donors_per_group.to_string()),
            ("bifurcation power factor", format!("{:.6}", model.power_factor())),
            ("noise (W)", format!("{}", self.noise_w)),
            (
                "sweep (km)",
                format!("{} .. {} step {}", self.d_start, self.d_stop, self.d_step),
            ),
            ("scenarios", self.scenarios.join(",")),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<width$}  {v}\n"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.channels_per_cell, 120);
        assert_eq!(c.carrier_mhz, 1800.0);
        assert_eq!(c.tx_power_w, 1500.0);
        assert_eq!(c.cell_radius_km, 1.0);
        assert_eq!(c.penetration_loss_db, 10.0);
        assert_eq!(c.gamma_db, 9.0);
        assert_eq!(c.bs_height_m, 100.0);
        assert_eq!(c.ms_height_m, 5.0);
        assert_eq!(c.first_threshold(), 30);
    }

    #[test]
    fn single_override() {
        let c = RunConfig::from_json(r#"{"gamma_db": 6}"#).unwrap();
        assert_eq!(
            c,
            RunConfig {
                gamma_db: 6.0,
                ..RunConfig::default()
            }
        );
    }

    #[test]
    fn zero_step_names_field() {
        let err = RunConfig::from_json(r#"{"d_step": 0}"#).unwrap_err();
        let fe = err.downcast_ref::<FieldError>().unwrap();
        assert_eq!(fe.field, "d_step");
        assert!(err.to_string().contains("d_step"));
    }

    #[test]
    fn other_validation_errors() {
        let name = |json: &str| {
            RunConfig::from_json(json)
                .unwrap_err()
                .downcast_ref::<FieldError>()
                .map(|e| e.field)
        };
        assert_eq!(name(r#"{"d_stop": 1.5}"#), Some("d_stop"));
        assert_eq!(name(r#"{"d_start": 0}"#), Some("d_start"));
        assert_eq!(name(r#"{"inner_ratio": 1.0}"#), Some("inner_ratio"));
        assert_eq!(name(r#"{"scenarios": ["Nope"]}"#), Some("scenarios"));
        assert_eq!(name(r#"{"tier_count": 3}"#), Some("tier_count"));
        assert_eq!(name(r#"{"channels_per_cell": 0}"#), Some("channels_per_cell"));
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(RunConfig::from_json("not json").is_err());
    }

    #[test]
    fn occupancy_keys_are_cell_ids() {
        let c = RunConfig::from_json(r#"{"channels_per_cell": 8, "donor_occupancy": {"7": 8, "3": 2}}"#).unwrap();
        assert_eq!(c.donor_occupancy.get(&7), Some(&8));
        assert!(RunConfig::from_json(r#"{"donor_occupancy": {"1": 2}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"channels_per_cell": 8, "donor_occupancy": {"2": 9}}"#).is_err());
    }

    #[test]
    fn parameter_table_lists_defaults() {
        let table = RunConfig::default().parameter_table().unwrap();
        assert!(table.contains("original channels per cell"));
        assert!(table.contains("1800"));
        assert!(table.contains("1500"));
    }
}
