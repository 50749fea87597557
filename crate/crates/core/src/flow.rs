//! Flow-side measures: hourly volume, capacity and V/C, saturation flow by
//! observed discharge and by road width, green splits and green-time
//! utilization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::model::{ApproachConfig, Directionality, SignalCycleRecord};
use crate::scalar::{lit, mean, Scalar};

pub const SECONDS_PER_HOUR: f64 = 3600.0;
/// PCU/hour of saturation flow per meter of approach width (IRC:106-1990).
pub const WIDTH_SATURATION_FACTOR: f64 = 525.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityEntry<T> {
    pub lanes: u32,
    pub directionality: Directionality,
    /// PCU/hour.
    pub capacity: T,
}

/// Approach capacity by lane count and directionality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CapacityTable<T> {
    entries: Vec<CapacityEntry<T>>,
}

impl<T: Scalar> Default for CapacityTable<T> {
    fn default() -> Self {
        use Directionality::*;
        Self::new(
            [
                (1, OneWay, 1500.0),
                (1, TwoWay, 2400.0),
                (2, OneWay, 2400.0),
                (3, OneWay, 3600.0),
            ]
            .map(|(lanes, directionality, c)| CapacityEntry {
                lanes,
                directionality,
                capacity: lit(c),
            }),
        )
    }
}

impl<T: Scalar> CapacityTable<T> {
    /// Later entries for the same geometry replace earlier ones.
    pub fn new(entries: impl IntoIterator<Item = CapacityEntry<T>>) -> Self {
        let mut table = Self {
            entries: Vec::new(),
        };
        for e in entries {
            table.set(e.lanes, e.directionality, e.capacity);
        }
        table
    }

    pub fn set(&mut self, lanes: u32, directionality: Directionality, capacity: T) {
        let key = (lanes, directionality);
        match self
            .entries
            .iter_mut()
            .find(|e| (e.lanes, e.directionality) == key)
        {
            Some(e) => e.capacity = capacity,
            None => {
                self.entries.push(CapacityEntry {
                    lanes,
                    directionality,
                    capacity,
                });
                self.entries.sort_by_key(|e| (e.lanes, e.directionality));
            }
        }
    }

    pub fn capacity(&self, lanes: u32, directionality: Directionality) -> Option<T> {
        self.entries
            .iter()
            .find(|e| e.lanes == lanes && e.directionality == directionality)
            .map(|e| e.capacity)
    }

    pub fn entries(&self) -> &[CapacityEntry<T>] {
        &self.entries
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.entries {
            if !(e.capacity > T::zero()) || !e.capacity.is_finite() {
                return Err(AnalysisError::InvalidConfig(format!(
                    "capacity for {} lane(s) {} must be > 0",
                    e.lanes, e.directionality
                )));
            }
            if !seen.insert((e.lanes, e.directionality)) {
                return Err(AnalysisError::InvalidConfig(format!(
                    "duplicate capacity entry for {} lane(s) {}",
                    e.lanes, e.directionality
                )));
            }
        }
        Ok(())
    }
}

/// Extrapolates a per-cycle PCU count to an hourly flow.
pub fn hourly_volume<T: Scalar>(pcu_per_cycle: T, cycle_length: T) -> Result<T> {
    if !(cycle_length > T::zero()) {
        return Err(AnalysisError::ZeroCycle);
    }
    Ok(pcu_per_cycle * lit(SECONDS_PER_HOUR) / cycle_length)
}

pub fn capacity_for<T: Scalar>(config: &ApproachConfig<T>, table: &CapacityTable<T>) -> Result<T> {
    table
        .capacity(config.lane_count, config.directionality)
        .ok_or(AnalysisError::UnknownLaneConfig {
            lanes: config.lane_count,
            directionality: config.directionality,
        })
}

/// Volume-to-capacity ratio of an approach.
pub fn vc_ratio<T: Scalar>(
    volume: T,
    config: &ApproachConfig<T>,
    table: &CapacityTable<T>,
) -> Result<T> {
    if volume < T::zero() {
        return Err(AnalysisError::InvalidInput(format!(
            "volume {volume} must be >= 0"
        )));
    }
    Ok(volume / capacity_for(config, table)?)
}

/// Saturation flow from the PCUs discharged during effective green.
pub fn saturation_flow_discharge<T: Scalar>(exited_pcu: T, effective_green: T) -> Result<T> {
    if !(effective_green > T::zero()) {
        return Err(AnalysisError::ZeroEffectiveGreen);
    }
    if exited_pcu < T::zero() {
        return Err(AnalysisError::InvalidInput(format!(
            "exited PCU {exited_pcu} must be >= 0"
        )));
    }
    Ok(exited_pcu / effective_green * lit(SECONDS_PER_HOUR))
}

/// Saturation flow from approach width alone.
pub fn saturation_flow_width<T: Scalar>(width: T) -> Result<T> {
    if !(width > T::zero()) {
        return Err(AnalysisError::NonPositiveWidth);
    }
    Ok(lit::<T>(WIDTH_SATURATION_FACTOR) * width)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport<T> {
    pub approach_id: String,
    /// PCU/hour.
    pub hourly_volume: T,
    pub capacity: T,
    pub vc_ratio: T,
    /// Discharge-based saturation flow; absent without effective green and
    /// exited-PCU observations.
    pub sf_discharge: Option<T>,
    pub sf_width: T,
    pub sf_difference: Option<T>,
}

/// Flow measures for an approach from its per-cycle averages.
pub fn flow_report<T: Scalar>(
    config: &ApproachConfig<T>,
    pcu_per_cycle: T,
    cycle_length: T,
    discharge: Option<(T, T)>,
    table: &CapacityTable<T>,
) -> Result<FlowReport<T>> {
    let hourly = hourly_volume(pcu_per_cycle, cycle_length)?;
    let capacity = capacity_for(config, table)?;
    let sf_discharge = discharge
        .map(|(n, ge)| saturation_flow_discharge(n, ge))
        .transpose()?;
    let sf_width = saturation_flow_width(config.width)?;
    Ok(FlowReport {
        approach_id: config.approach_id.clone(),
        hourly_volume: hourly,
        capacity,
        vc_ratio: hourly / capacity,
        sf_discharge,
        sf_width,
        sf_difference: sf_discharge.map(|s| s - sf_width),
    })
}

/// Share of the intersection's total green held by each approach, based on
/// mean green per approach.
pub fn green_splits<T: Scalar>(
    greens_by_approach: &BTreeMap<String, Vec<T>>,
    intersection_id: &str,
) -> Result<BTreeMap<String, T>> {
    let means: Vec<(String, T)> = greens_by_approach
        .iter()
        .filter_map(|(id, g)| mean(g).map(|m| (id.clone(), m)))
        .collect();
    if means.is_empty() {
        return Err(AnalysisError::EmptyIntersection(
            intersection_id.to_string(),
        ));
    }
    let total = means.iter().fold(T::zero(), |a, (_, m)| a + *m);
    if !(total > T::zero()) {
        return Err(AnalysisError::ZeroGreen);
    }
    Ok(means.into_iter().map(|(id, m)| (id, m / total)).collect())
}

/// Combined share of a subset of approaches.
pub fn combined_share<T: Scalar, S: AsRef<str>>(splits: &BTreeMap<String, T>, ids: &[S]) -> T {
    ids.iter()
        .filter_map(|id| splits.get(id.as_ref()))
        .fold(T::zero(), |a, &s| a + s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenUtilization<T> {
    pub approach_id: String,
    pub green_time: T,
    pub pcu_per_cycle: T,
    /// Seconds of green per PCU; absent when no traffic was discharged.
    pub green_to_pcu_ratio: Option<T>,
    /// Fraction of allocated green without discharge; needs effective green.
    pub wastage: Option<T>,
}

pub fn green_utilization<T: Scalar>(
    record: &SignalCycleRecord<T>,
    pcu_per_cycle: T,
) -> Result<GreenUtilization<T>> {
    let g = record.green_time;
    if !(g > T::zero()) {
        return Err(AnalysisError::ZeroGreen);
    }
    Ok(GreenUtilization {
        approach_id: record.approach_id().to_string(),
        green_time: g,
        pcu_per_cycle,
        green_to_pcu_ratio: (pcu_per_cycle > T::zero()).then(|| g / pcu_per_cycle),
        wastage: record.effective_green.map(|ge| (g - ge) / g),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenReport<T> {
    pub green_share: T,
    pub utilization: GreenUtilization<T>,
}
