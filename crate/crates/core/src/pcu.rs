//! Composition-dependent passenger-car-unit conversion.
//!
//! Each class has two equivalence factors: one used while the class makes
//! up less than `composition_threshold` of the traffic stream, the other
//! once it reaches the threshold. Shares are taken over raw vehicle counts
//! for the whole analysis window so the factor choice does not depend on
//! the conversion it feeds.

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::model::{ClassCounts, ClassValues, ClassifiedCount, VehicleClass};
use crate::scalar::{count, lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcuFactor<T> {
    pub below_threshold: T,
    pub at_or_above_threshold: T,
}

impl<T: Scalar> PcuFactor<T> {
    pub fn new(below_threshold: f64, at_or_above_threshold: f64) -> Self {
        Self {
            below_threshold: lit(below_threshold),
            at_or_above_threshold: lit(at_or_above_threshold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcuFactorTable<T> {
    pub composition_threshold: T,
    pub two_wheeler: PcuFactor<T>,
    pub auto_rickshaw: PcuFactor<T>,
    pub car: PcuFactor<T>,
    pub lcv: PcuFactor<T>,
    pub bus: PcuFactor<T>,
}

impl<T: Scalar> Default for PcuFactorTable<T> {
    /// IRC:106-1990 equivalence factors.
    fn default() -> Self {
        Self {
            composition_threshold: lit(0.05),
            two_wheeler: PcuFactor::new(0.50, 0.75),
            auto_rickshaw: PcuFactor::new(1.20, 2.00),
            car: PcuFactor::new(1.00, 1.00),
            lcv: PcuFactor::new(1.40, 2.00),
            bus: PcuFactor::new(2.20, 3.70),
        }
    }
}

impl<T: Scalar> PcuFactorTable<T> {
    pub fn factor(&self, class: VehicleClass) -> &PcuFactor<T> {
        match class {
            VehicleClass::TwoWheeler => &self.two_wheeler,
            VehicleClass::AutoRickshaw => &self.auto_rickshaw,
            VehicleClass::Car => &self.car,
            VehicleClass::LightCommercialVehicle => &self.lcv,
            VehicleClass::Bus => &self.bus,
        }
    }

    /// Factor applicable to `class` at the given traffic share.
    pub fn factor_at(&self, class: VehicleClass, share: T) -> T {
        let f = self.factor(class);
        if share < self.composition_threshold {
            f.below_threshold
        } else {
            f.at_or_above_threshold
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.composition_threshold;
        if !(t > T::zero() && t < T::one()) {
            return Err(AnalysisError::InvalidConfig(format!(
                "composition threshold {t} must lie in (0, 1)"
            )));
        }
        for class in VehicleClass::ALL {
            let f = self.factor(class);
            if !(f.below_threshold > T::zero() && f.at_or_above_threshold > T::zero()) {
                return Err(AnalysisError::InvalidConfig(format!(
                    "PCU factors for {class} must be > 0"
                )));
            }
        }
        Ok(())
    }
}

/// Share of each class in the summed raw counts.
pub fn composition_shares<T: Scalar>(counts: &[ClassifiedCount]) -> Result<ClassValues<T>> {
    let total = counts
        .iter()
        .fold(ClassCounts::default(), |acc, c| acc + c.counts);
    shares_of(&total)
}

/// Shares for an already-aggregated count vector.
pub fn shares_of<T: Scalar>(total: &ClassCounts) -> Result<ClassValues<T>> {
    let n = total.total();
    if n == 0 {
        return Err(AnalysisError::EmptyTraffic);
    }
    let n = count::<T>(n);
    Ok(ClassValues::from_fn(|c| count::<T>(total[c]) / n))
}

/// Converts raw counts to PCU using factors selected by `shares`.
pub fn to_pcu<T: Scalar>(
    counts: &ClassCounts,
    shares: &ClassValues<T>,
    table: &PcuFactorTable<T>,
) -> T {
    counts.iter().fold(T::zero(), |acc, (class, n)| {
        acc + count::<T>(n) * table.factor_at(class, shares[class])
    })
}
