//! Okumura-Hata link model and the derived link metrics.

use crate::error::{Error, Result};

/// Smallest distance accepted by [`path_loss`], in kilometers.
pub const MIN_DISTANCE_KM: f64 = 0.001;

/// Physical parameters of the downlink. Defaults are the evaluation setup:
/// 1800 MHz, 100 m BS, 5 m mobile, 10 dB penetration loss, 1.5 kW, γ = 9 dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioEnvironment {
    pub carrier_mhz: f64,
    pub bs_height_m: f64,
    pub ms_height_m: f64,
    pub penetration_loss_db: f64,
    pub tx_power_w: f64,
    pub gamma_db: f64,
}

impl Default for RadioEnvironment {
    fn default() -> Self {
        RadioEnvironment {
            carrier_mhz: 1800.0,
            bs_height_m: 100.0,
            ms_height_m: 5.0,
            penetration_loss_db: 10.0,
            tx_power_w: 1500.0,
            gamma_db: 9.0,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

impl RadioEnvironment {
    pub fn validate(&self) -> Result<()> {
        positive("carrier_mhz", self.carrier_mhz)?;
        positive("bs_height_m", self.bs_height_m)?;
        positive("ms_height_m", self.ms_height_m)?;
        positive("penetration_loss_db", self.penetration_loss_db)?;
        positive("tx_power_w", self.tx_power_w)?;
        if !self.gamma_db.is_finite() {
            return Err(Error::param("gamma_db", "must be finite"));
        }
        Ok(())
    }

    pub fn gamma_linear(&self) -> f64 {
        db_to_linear(self.gamma_db)
    }

    /// Path-loss slope in dB per decade of distance: `44.9 − 6.55·log h_b`.
    pub fn distance_slope_db(&self) -> f64 {
        44.9 - 6.55 * self.bs_height_m.log10()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Mobile antenna height correction `a(h_m)` in dB.
pub fn antenna_correction(env: &RadioEnvironment) -> f64 {
    let log_f = env.carrier_mhz.log10();
    1.1 * (log_f - 0.7) * env.ms_height_m - (1.56 * log_f - 0.8)
}

/// Okumura-Hata path loss in dB at `distance_km`, penetration loss included.
pub fn path_loss(env: &RadioEnvironment, distance_km: f64) -> Result<f64> {
    if !(distance_km >= MIN_DISTANCE_KM) || !distance_km.is_finite() {
        return Err(Error::OutOfDomain {
            what: "distance_km",
            value: distance_km,
        });
    }
    Ok(
        69.55 + 26.16 * env.carrier_mhz.log10() - 13.82 * env.bs_height_m.log10() - antenna_correction(env)
            + env.distance_slope_db() * distance_km.log10()
            + env.penetration_loss_db,
    )
}

/// Transmit power attenuated by `loss_db`.
pub fn attenuate(tx_power_w: f64, loss_db: f64) -> f64 {
    tx_power_w / db_to_linear(loss_db)
}

/// Received power in watts at `distance_km` from a full-power BS.
pub fn received_power(env: &RadioEnvironment, distance_km: f64) -> Result<f64> {
    Ok(attenuate(env.tx_power_w, path_loss(env, distance_km)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceEntry {
    pub distance_km: f64,
    pub power_w: f64,
    /// 1 for the first ring of interferers, 2 for the second.
    pub tier: u8,
}

/// Interference powers split by tier: `P` tier-1 terms and `Q` tier-2 terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InterferenceSet {
    entries: Vec<InterferenceEntry>,
}

impl InterferenceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: InterferenceEntry) -> Result<()> {
        if !(entry.power_w >= 0.0) || !entry.power_w.is_finite() {
            return Err(Error::param("power_w", format!("must be >= 0, got {}", entry.power_w)));
        }
        if !(1..=2).contains(&entry.tier) {
            return Err(Error::param("tier", format!("must be 1 or 2, got {}", entry.tier)));
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Build from raw powers, all tagged tier 1. Handy for tests and sweeps.
    pub fn from_powers(powers: &[f64]) -> Result<Self> {
        let mut set = Self::new();
        for &power_w in powers {
            set.push(InterferenceEntry {
                distance_km: f64::NAN,
                power_w,
                tier: 1,
            })?;
        }
        Ok(set)
    }

    pub fn entries(&self) -> &[InterferenceEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tier_total(&self, tier: u8) -> f64 {
        self.entries.iter().filter(|e| e.tier == tier).map(|e| e.power_w).sum()
    }

    pub fn total(&self) -> f64 {
        self.tier_total(1) + self.tier_total(2)
    }
}

/// `s0 / (Σ tier-1 + Σ tier-2 + noise)`, linear.
pub fn sinr(s0: f64, interference: &InterferenceSet, noise_w: f64) -> Result<f64> {
    if !(s0 > 0.0) {
        return Err(Error::OutOfDomain { what: "s0", value: s0 });
    }
    if !(noise_w >= 0.0) {
        return Err(Error::OutOfDomain {
            what: "noise_w",
            value: noise_w,
        });
    }
    let denominator = interference.total() + noise_w;
    if denominator == 0.0 {
        return Err(Error::UndefinedSinr);
    }
    Ok(s0 / denominator)
}

/// Shannon spectral efficiency in bps/Hz.
pub fn capacity(sinr_linear: f64) -> Result<f64> {
    if !(sinr_linear >= 0.0) {
        return Err(Error::OutOfDomain {
            what: "sinr",
            value: sinr_linear,
        });
    }
    Ok(sinr_linear.ln_1p() / std::f64::consts::LN_2)
}

/// `1 − Π exp(−(γ/s0)·I_i)` over every interferer, `γ` in dB.
pub fn outage_probability(gamma_db: f64, s0: f64, interference: &InterferenceSet) -> Result<f64> {
    if !(s0 > 0.0) {
        return Err(Error::OutOfDomain { what: "s0", value: s0 });
    }
    let scale = db_to_linear(gamma_db) / s0;
    // Π exp(−a_i) accumulated in the exponent; 1 − e^x via expm1 keeps
    // precision when the outage is tiny.
    let log_survival: f64 = interference.entries().iter().map(|e| -scale * e.power_w).sum();
    Ok((-log_survival.exp_m1()).clamp(0.0, 1.0))
}
