//! Analysis configuration: every lookup table the analysis treats as given,
//! plus per-approach model inputs. Loaded from TOML; absent keys fall back
//! to the built-in defaults.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::delay::platoon_ratio;
use crate::emissions::{CityRate, EmissionFactorTable, IdleRateTable};
use crate::error::{AnalysisError, Result};
use crate::flow::CapacityTable;
use crate::los::{DelayPolicy, Grade, LosBandTable};
use crate::pcu::PcuFactorTable;
use crate::scalar::{lit, Scalar};
use crate::stats::{DayFilter, DEFAULT_WINDOW_S};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct AnalysisConfig<T: Scalar> {
    pub schema_version: u32,
    /// Count columns already hold PCU rather than raw vehicles.
    pub counts_in_pcu: bool,
    pub pcu_factors: PcuFactorTable<T>,
    pub capacity: CapacityTable<T>,
    pub los: LosStandards<T>,
    pub delay: DelayConfig<T>,
    pub emissions: EmissionsConfig<T>,
    pub peak: PeakConfig,
    pub references: Vec<Reference<T>>,
}

impl<T: Scalar> Default for AnalysisConfig<T> {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            counts_in_pcu: false,
            pcu_factors: PcuFactorTable::default(),
            capacity: CapacityTable::default(),
            los: LosStandards::default(),
            delay: DelayConfig::default(),
            emissions: EmissionsConfig::default(),
            peak: PeakConfig::default(),
            references: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct LosStandards<T: Scalar> {
    pub heterogeneous_delay: LosBandTable<T>,
    pub hcm_delay: LosBandTable<T>,
    pub vc_ratio: LosBandTable<T>,
}

impl<T: Scalar> Default for LosStandards<T> {
    fn default() -> Self {
        Self {
            heterogeneous_delay: LosBandTable::heterogeneous_delay(),
            hcm_delay: LosBandTable::hcm_delay(),
            vc_ratio: LosBandTable::volume_capacity(),
        }
    }
}

/// Platoon ratio given directly or through arrival shares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlatoonSpec<T> {
    Ratio(T),
    Arrivals { pvg: T, ptg: T },
}

impl<T: Scalar> PlatoonSpec<T> {
    pub fn ratio(&self) -> Result<T> {
        match *self {
            PlatoonSpec::Ratio(r) => Ok(r),
            PlatoonSpec::Arrivals { pvg, ptg } => platoon_ratio(pvg, ptg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct DelayConfig<T: Scalar> {
    pub policy: DelayPolicy,
    /// Platoon ratio per approach id.
    pub platoon: BTreeMap<String, PlatoonSpec<T>>,
}

impl<T: Scalar> Default for DelayConfig<T> {
    fn default() -> Self {
        Self {
            policy: DelayPolicy::MajorOnly,
            platoon: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct EmissionsConfig<T: Scalar> {
    pub factors: EmissionFactorTable<T>,
    pub idle_rates: IdleRateTable<T>,
    /// City extrapolation; the study sum is used when absent.
    pub city: Option<CityRate<T>>,
    pub active_hours_per_day: T,
}

impl<T: Scalar> Default for EmissionsConfig<T> {
    fn default() -> Self {
        Self {
            factors: EmissionFactorTable::default(),
            idle_rates: IdleRateTable::default(),
            city: None,
            active_hours_per_day: lit(13.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakConfig {
    pub window_s: i64,
    pub span: usize,
    pub days: DayFilter,
}

impl Default for PeakConfig {
    fn default() -> Self {
        Self {
            window_s: DEFAULT_WINDOW_S,
            span: 4,
            days: DayFilter::Weekday,
        }
    }
}

/// Externally reported figure to compare computed results against.
/// Mismatches are surfaced as report flags; they never change results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Reference<T> {
    /// Combined green share of a set of approaches.
    GreenShare {
        intersection: String,
        approaches: Vec<String>,
        value: T,
        tolerance: T,
    },
    /// A single V/C grade claimed for a whole intersection.
    VcGrade { intersection: String, grade: Grade },
    /// Mean intersection delay claimed under a given averaging policy.
    IntersectionDelay {
        intersection: String,
        policy: DelayPolicy,
        seconds: T,
        tolerance: T,
    },
}

impl<T: Scalar + Serialize + for<'de> Deserialize<'de>> AnalysisConfig<T> {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(s).map_err(|e| AnalysisError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

impl<T: Scalar> AnalysisConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(AnalysisError::InvalidConfig(format!(
                "unsupported config schema version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.pcu_factors.validate()?;
        self.capacity.validate()?;
        self.los.heterogeneous_delay.validate()?;
        self.los.hcm_delay.validate()?;
        self.los.vc_ratio.validate()?;
        self.emissions.factors.validate()?;
        self.emissions.idle_rates.validate()?;
        if !(self.emissions.active_hours_per_day >= T::zero()) {
            return Err(AnalysisError::InvalidConfig(
                "active hours must be >= 0".into(),
            ));
        }
        for (id, spec) in &self.delay.platoon {
            let r = spec.ratio().map_err(|e| {
                AnalysisError::InvalidConfig(format!("platoon ratio for {id}: {e}"))
            })?;
            if !(r >= T::zero()) {
                return Err(AnalysisError::InvalidConfig(format!(
                    "platoon ratio for {id} must be >= 0"
                )));
            }
        }
        if self.peak.window_s <= 0 || self.peak.span == 0 {
            return Err(AnalysisError::InvalidConfig(
                "peak window and span must be positive".into(),
            ));
        }
        Ok(())
    }
}
