//! Domain data model: vehicle classes, per-cycle counts and signal timing,
//! and static approach geometry.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    TwoWheeler,
    AutoRickshaw,
    Car,
    #[serde(rename = "lcv")]
    LightCommercialVehicle,
    Bus,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 5] = [
        VehicleClass::TwoWheeler,
        VehicleClass::AutoRickshaw,
        VehicleClass::Car,
        VehicleClass::LightCommercialVehicle,
        VehicleClass::Bus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column name used in cycle CSV files.
    pub fn column(self) -> &'static str {
        match self {
            VehicleClass::TwoWheeler => "two_wheeler",
            VehicleClass::AutoRickshaw => "auto_rickshaw",
            VehicleClass::Car => "car",
            VehicleClass::LightCommercialVehicle => "lcv",
            VehicleClass::Bus => "bus",
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// Raw per-class vehicle counts. Classes not observed hold zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ClassCounts([u64; 5]);

impl ClassCounts {
    pub fn new(counts: [u64; 5]) -> Self {
        Self(counts)
    }

    pub fn single(class: VehicleClass, n: u64) -> Self {
        let mut c = Self::default();
        c[class] = n;
        c
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VehicleClass, u64)> + '_ {
        VehicleClass::ALL
            .iter()
            .map(move |&c| (c, self.0[c.index()]))
    }

    pub fn as_array(&self) -> [u64; 5] {
        self.0
    }
}

impl Index<VehicleClass> for ClassCounts {
    type Output = u64;
    fn index(&self, class: VehicleClass) -> &u64 {
        &self.0[class.index()]
    }
}

impl IndexMut<VehicleClass> for ClassCounts {
    fn index_mut(&mut self, class: VehicleClass) -> &mut u64 {
        &mut self.0[class.index()]
    }
}

impl Add for ClassCounts {
    type Output = ClassCounts;
    fn add(self, rhs: ClassCounts) -> ClassCounts {
        let mut out = self;
        for c in VehicleClass::ALL {
            out[c] += rhs[c];
        }
        out
    }
}

/// One real value per vehicle class (shares, hourly flows, ...).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassValues<T>([T; 5]);

impl<T: Scalar> Default for ClassValues<T> {
    fn default() -> Self {
        Self([T::zero(); 5])
    }
}

impl<T: Scalar> ClassValues<T> {
    pub fn new(values: [T; 5]) -> Self {
        Self(values)
    }

    pub fn from_fn(mut f: impl FnMut(VehicleClass) -> T) -> Self {
        Self(VehicleClass::ALL.map(&mut f))
    }

    pub fn sum(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, &v| acc + v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VehicleClass, T)> + '_ {
        VehicleClass::ALL
            .iter()
            .map(move |&c| (c, self.0[c.index()]))
    }
}

impl<T> Index<VehicleClass> for ClassValues<T> {
    type Output = T;
    fn index(&self, class: VehicleClass) -> &T {
        &self.0[class.index()]
    }
}

impl<T> IndexMut<VehicleClass> for ClassValues<T> {
    fn index_mut(&mut self, class: VehicleClass) -> &mut T {
        &mut self.0[class.index()]
    }
}

/// Vehicle counts observed on one approach during one cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedCount {
    pub approach_id: String,
    /// Wall-clock seconds since the Unix epoch, local time.
    pub timestamp: Option<i64>,
    pub counts: ClassCounts,
}

impl ClassifiedCount {
    pub fn new(approach_id: impl Into<String>, counts: ClassCounts) -> Self {
        Self {
            approach_id: approach_id.into(),
            timestamp: None,
            counts,
        }
    }

    pub fn at(mut self, timestamp: i64) -> Self {
        self.timestamp = Some(timestamp);
        self
    }
}

/// Timing of one signal cycle on one approach together with its counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalCycleRecord<T> {
    pub cycle_length: T,
    pub red_time: T,
    pub green_time: T,
    pub effective_green: Option<T>,
    pub exited_pcu: Option<T>,
    pub counts: ClassifiedCount,
}

impl<T: Scalar> SignalCycleRecord<T> {
    /// Builds a record, checking the timing invariants. Violations are
    /// reported as [`AnalysisError::InvariantViolation`] against `row` 0.
    pub fn new(
        cycle_length: T,
        red_time: T,
        green_time: T,
        counts: ClassifiedCount,
    ) -> Result<Self> {
        let rec = Self {
            cycle_length,
            red_time,
            green_time,
            effective_green: None,
            exited_pcu: None,
            counts,
        };
        rec.check(0)?;
        Ok(rec)
    }

    pub fn with_discharge(mut self, effective_green: T, exited_pcu: T) -> Result<Self> {
        self.effective_green = Some(effective_green);
        self.exited_pcu = Some(exited_pcu);
        self.check(0)?;
        Ok(self)
    }

    pub fn approach_id(&self) -> &str {
        &self.counts.approach_id
    }

    pub fn timestamp(&self) -> Option<i64> {
        self.counts.timestamp
    }

    pub(crate) fn check(&self, row: usize) -> Result<()> {
        let fail = |message: String| Err(AnalysisError::InvariantViolation { row, message });
        let finite = [
            Some(self.cycle_length),
            Some(self.red_time),
            Some(self.green_time),
        ]
        .into_iter()
        .chain([self.effective_green, self.exited_pcu])
        .flatten()
        .all(|v| v.is_finite());
        if !finite {
            return fail("non-finite timing value".into());
        }
        if self.cycle_length <= T::zero() {
            return fail(format!("cycle length {} must be > 0", self.cycle_length));
        }
        if self.red_time < T::zero() || self.green_time < T::zero() {
            return fail("red and green times must be >= 0".into());
        }
        if self.red_time + self.green_time > self.cycle_length {
            return fail(format!(
                "red {} + green {} exceeds cycle length {}",
                self.red_time, self.green_time, self.cycle_length
            ));
        }
        if let Some(ge) = self.effective_green {
            if ge < T::zero() {
                return fail("effective green must be >= 0".into());
            }
            if ge > self.green_time {
                return fail(format!(
                    "effective green {} exceeds green {}",
                    ge, self.green_time
                ));
            }
        }
        if let Some(n) = self.exited_pcu {
            if n < T::zero() {
                return fail("exited PCU must be >= 0".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Directionality {
    OneWay,
    TwoWay,
}

impl fmt::Display for Directionality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Directionality::OneWay => "oneway",
            Directionality::TwoWay => "twoway",
        })
    }
}

impl FromStr for Directionality {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oneway" | "one-way" => Ok(Directionality::OneWay),
            "twoway" | "two-way" => Ok(Directionality::TwoWay),
            other => Err(format!("unknown directionality '{other}'")),
        }
    }
}

/// Static geometry of one approach road.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachConfig<T> {
    pub approach_id: String,
    pub intersection_id: String,
    pub lane_count: u32,
    pub directionality: Directionality,
    /// Carriageway width in meters.
    pub width: T,
    pub free_left: bool,
    pub is_major: bool,
}

impl<T: Scalar> ApproachConfig<T> {
    pub fn new(
        approach_id: impl Into<String>,
        intersection_id: impl Into<String>,
        lane_count: u32,
        directionality: Directionality,
        width: T,
    ) -> Result<Self> {
        let cfg = Self {
            approach_id: approach_id.into(),
            intersection_id: intersection_id.into(),
            lane_count,
            directionality,
            width,
            free_left: false,
            is_major: false,
        };
        cfg.check(0)?;
        Ok(cfg)
    }

    pub fn major(mut self, is_major: bool) -> Self {
        self.is_major = is_major;
        self
    }

    pub fn free_left(mut self, free_left: bool) -> Self {
        self.free_left = free_left;
        self
    }

    pub(crate) fn check(&self, row: usize) -> Result<()> {
        if self.lane_count < 1 {
            return Err(AnalysisError::InvariantViolation {
                row,
                message: "lane count must be >= 1".into(),
            });
        }
        if !(self.width > T::zero()) || !self.width.is_finite() {
            return Err(AnalysisError::InvariantViolation {
                row,
                message: format!("width {} must be > 0", self.width),
            });
        }
        Ok(())
    }
}

/// Approaches keyed by id.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachSet<T> {
    approaches: BTreeMap<String, ApproachConfig<T>>,
}

impl<T> Default for ApproachSet<T> {
    fn default() -> Self {
        Self {
            approaches: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> ApproachSet<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an approach; a duplicate id is rejected.
    pub fn insert(&mut self, approach: ApproachConfig<T>) -> Result<()> {
        if self.approaches.contains_key(&approach.approach_id) {
            return Err(AnalysisError::InvalidInput(format!(
                "duplicate approach id '{}'",
                approach.approach_id
            )));
        }
        self.approaches
            .insert(approach.approach_id.clone(), approach);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&ApproachConfig<T>> {
        self.approaches.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.approaches.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.approaches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.approaches.is_empty()
    }

    /// Approaches sorted by id.
    pub fn iter(&self) -> impl Iterator<Item = &ApproachConfig<T>> {
        self.approaches.values()
    }

    /// Distinct intersection ids, sorted.
    pub fn intersections(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .approaches
            .values()
            .map(|a| a.intersection_id.clone())
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn in_intersection<'a>(
        &'a self,
        intersection_id: &'a str,
    ) -> impl Iterator<Item = &'a ApproachConfig<T>> + 'a {
        self.approaches
            .values()
            .filter(move |a| a.intersection_id == intersection_id)
    }
}

impl<T: Scalar> FromIterator<ApproachConfig<T>> for ApproachSet<T> {
    /// Later duplicates replace earlier ones; use [`ApproachSet::insert`]
    /// to reject them instead.
    fn from_iter<I: IntoIterator<Item = ApproachConfig<T>>>(iter: I) -> Self {
        Self {
            approaches: iter
                .into_iter()
                .map(|a| (a.approach_id.clone(), a))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts() -> ClassifiedCount {
        ClassifiedCount::new("SR1", ClassCounts::new([23, 10, 12, 4, 2]))
    }

    #[test]
    fn record_rejects_red_plus_green_over_cycle() {
        let err = SignalCycleRecord::new(152.0, 140.0, 30.0, counts()).unwrap_err();
        assert!(matches!(err, AnalysisError::InvariantViolation { .. }));
    }

    #[test]
    fn record_rejects_effective_green_above_green() {
        let rec = SignalCycleRecord::new(152.0, 120.0, 32.0, counts()).unwrap();
        assert!(rec.with_discharge(33.0, 48.0).is_err());
    }

    #[test]
    fn amber_remainder_is_allowed() {
        let rec = SignalCycleRecord::new(119.0_f32, 79.0, 30.0, counts()).unwrap();
        assert_eq!(rec.approach_id(), "SR1");
    }

    #[test]
    fn approach_width_must_be_positive() {
        assert!(ApproachConfig::new("SR1", "SSC", 3, Directionality::OneWay, 0.0).is_err());
        assert!(ApproachConfig::new("SR1", "SSC", 0, Directionality::OneWay, 10.5).is_err());
    }

    #[test]
    fn class_counts_add_and_total() {
        let a = ClassCounts::single(VehicleClass::Bus, 2);
        let b = ClassCounts::new([1, 1, 1, 1, 1]);
        let s = a + b;
        assert_eq!(s[VehicleClass::Bus], 3);
        assert_eq!(s.total(), 7);
    }

    #[test]
    fn directionality_parses_both_spellings() {
        assert_eq!(
            "OneWay".parse::<Directionality>(),
            Ok(Directionality::OneWay)
        );
        assert_eq!(
            "two-way".parse::<Directionality>(),
            Ok(Directionality::TwoWay)
        );
        assert!("both".parse::<Directionality>().is_err());
    }
}
