//! Idle fuel burn and CO2 for vehicles queued at a signal, assuming every
//! vehicle idles for the full mean control delay.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::model::{ClassValues, VehicleClass};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FuelType {
    Cng,
    Diesel,
    Petrol,
}

impl FuelType {
    pub const ALL: [FuelType; 3] = [FuelType::Cng, FuelType::Diesel, FuelType::Petrol];

    /// Unit fuel quantities are measured in.
    pub fn unit(self) -> &'static str {
        match self {
            FuelType::Cng => "kg",
            FuelType::Diesel | FuelType::Petrol => "L",
        }
    }
}

impl fmt::Display for FuelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FuelType::Cng => "cng",
            FuelType::Diesel => "diesel",
            FuelType::Petrol => "petrol",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdleRate<T> {
    pub class: VehicleClass,
    pub fuel: FuelType,
    /// Share of the class running on this fuel.
    pub fleet_fraction: T,
    /// Fuel units burned per vehicle-hour of idling.
    pub idle_rate: T,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IdleRateTable<T> {
    pub rates: Vec<IdleRate<T>>,
}

impl<T: Scalar> IdleRateTable<T> {
    pub fn new(rates: Vec<IdleRate<T>>) -> Result<Self> {
        let table = Self { rates };
        table.validate()?;
        Ok(table)
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.rates {
            if !seen.insert((r.class, r.fuel)) {
                return Err(AnalysisError::InvalidConfig(format!(
                    "duplicate idle rate for {} on {}",
                    r.class, r.fuel
                )));
            }
            if !(r.idle_rate >= T::zero()) || !(r.fleet_fraction >= T::zero()) {
                return Err(AnalysisError::InvalidConfig(format!(
                    "idle rate and fleet fraction for {} on {} must be >= 0",
                    r.class, r.fuel
                )));
            }
        }
        for class in VehicleClass::ALL {
            let total = self
                .rates
                .iter()
                .filter(|r| r.class == class)
                .fold(T::zero(), |a, r| a + r.fleet_fraction);
            if total > T::one() + lit(1e-9) {
                return Err(AnalysisError::InvalidConfig(format!(
                    "fleet fractions for {class} sum to {total} > 1"
                )));
            }
        }
        Ok(())
    }
}

/// kg CO2 released per unit of each fuel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionFactorTable<T> {
    pub cng: Option<T>,
    pub diesel: Option<T>,
    pub petrol: Option<T>,
}

impl<T: Scalar> Default for EmissionFactorTable<T> {
    /// Ratios of observed CO2 to idle fuel (identical to three
    /// decimals at both study intersections).
    fn default() -> Self {
        Self {
            cng: Some(lit(2.252)),
            diesel: Some(lit(2.640)),
            petrol: Some(lit(2.392)),
        }
    }
}

impl<T: Scalar> EmissionFactorTable<T> {
    pub fn get(&self, fuel: FuelType) -> Option<T> {
        match fuel {
            FuelType::Cng => self.cng,
            FuelType::Diesel => self.diesel,
            FuelType::Petrol => self.petrol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for fuel in FuelType::ALL {
            if let Some(f) = self.get(fuel) {
                if !(f > T::zero()) || !f.is_finite() {
                    return Err(AnalysisError::InvalidConfig(format!(
                        "emission factor for {fuel} must be > 0"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub type FuelRates<T> = BTreeMap<FuelType, T>;

/// Fuel burned per hour while queued. `hourly_counts` are vehicles/hour by
/// class; `mean_delay` is seconds per vehicle.
pub fn idle_fuel<T: Scalar>(
    hourly_counts: &ClassValues<T>,
    mean_delay: T,
    rates: &IdleRateTable<T>,
) -> Result<FuelRates<T>> {
    if mean_delay.is_nan() || mean_delay < T::zero() {
        return Err(AnalysisError::InvalidInput(format!(
            "mean delay {mean_delay} must be >= 0"
        )));
    }
    let idle_hours = mean_delay / lit(3600.0);
    let mut fuel: FuelRates<T> = FuelType::ALL.iter().map(|&f| (f, T::zero())).collect();
    for r in &rates.rates {
        let burned = hourly_counts[r.class] * idle_hours * r.fleet_fraction * r.idle_rate;
        *fuel.entry(r.fuel).or_insert_with(T::zero) = fuel[&r.fuel] + burned;
    }
    Ok(fuel)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionReport<T> {
    pub fuel_per_hour: FuelRates<T>,
    /// kg/h per fuel.
    pub co2_per_hour: FuelRates<T>,
    pub total_co2_per_hour: T,
}

pub fn co2_from_fuel<T: Scalar>(
    fuel: &FuelRates<T>,
    factors: &EmissionFactorTable<T>,
) -> Result<EmissionReport<T>> {
    let mut co2 = FuelRates::new();
    for (&f, &q) in fuel {
        let co2_f = match factors.get(f) {
            Some(factor) => q * factor,
            None if q == T::zero() => T::zero(),
            None => return Err(AnalysisError::MissingFactor(f)),
        };
        co2.insert(f, co2_f);
    }
    let total = co2.values().fold(T::zero(), |a, &v| a + v);
    Ok(EmissionReport {
        fuel_per_hour: fuel.clone(),
        co2_per_hour: co2,
        total_co2_per_hour: total,
    })
}

/// How the citywide hourly rate is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum CityRate<T> {
    /// A rate supplied from outside the study data.
    Given(T),
    /// Mean of the study intersections times this many signalized
    /// intersections citywide.
    MeanTimesCount(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityEmissions<T> {
    /// Sum over the study intersections, kg/h.
    pub study_kg_per_hour: T,
    pub city_kg_per_hour: T,
    pub tons_per_day: T,
    /// True whenever the city rate is not simply the study sum.
    pub estimated: bool,
}

/// Scales study-intersection totals to the city and to a day of operation.
pub fn scale_emissions<T: Scalar>(
    per_intersection: &[T],
    city: CityRate<T>,
    active_hours_per_day: T,
) -> Result<CityEmissions<T>> {
    if per_intersection.iter().any(|v| !(*v >= T::zero())) || !(active_hours_per_day >= T::zero()) {
        return Err(AnalysisError::InvalidInput(
            "emission rates and active hours must be >= 0".into(),
        ));
    }
    let study = per_intersection.iter().fold(T::zero(), |a, &v| a + v);
    let (city_rate, estimated) = match city {
        CityRate::Given(rate) => {
            if !(rate >= T::zero()) {
                return Err(AnalysisError::InvalidInput("city rate must be >= 0".into()));
            }
            (rate, true)
        }
        CityRate::MeanTimesCount(n) => {
            if per_intersection.is_empty() {
                return Err(AnalysisError::EmptyInput);
            }
            let mean = study / lit(per_intersection.len() as f64);
            (
                mean * lit(f64::from(n)),
                n as usize != per_intersection.len(),
            )
        }
    };
    Ok(CityEmissions {
        study_kg_per_hour: study,
        city_kg_per_hour: city_rate,
        tons_per_day: city_rate * active_hours_per_day / lit(1000.0),
        estimated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_rate(class: VehicleClass, fuel: FuelType, frac: f64, rate: f64) -> IdleRateTable<f64> {
        IdleRateTable::new(vec![IdleRate {
            class,
            fuel,
            fleet_fraction: frac,
            idle_rate: rate,
        }])
        .unwrap()
    }

    #[test]
    fn zero_delay_burns_nothing() {
        let t = one_rate(VehicleClass::Car, FuelType::Petrol, 1.0, 0.8);
        let counts = ClassValues::new([100.0; 5]);
        let fuel = idle_fuel(&counts, 0.0, &t).unwrap();
        assert!(fuel.values().all(|&v| v == 0.0));
        assert_eq!(fuel.len(), 3);
    }

    #[test]
    fn one_term_sum() {
        let t = one_rate(VehicleClass::Bus, FuelType::Diesel, 1.0, 1.2);
        let mut counts = ClassValues::default();
        counts[VehicleClass::Bus] = 30.0;
        let fuel = idle_fuel(&counts, 45.0, &t).unwrap();
        assert_abs_diff_eq!(
            fuel[&FuelType::Diesel],
            30.0 * (45.0 / 3600.0) * 1.2,
            epsilon = 1e-15
        );
        assert!(idle_fuel(&counts, -1.0, &t).is_err());
    }

    #[test]
    fn fleet_fractions_capped_at_one() {
        let rates = vec![
            IdleRate {
                class: VehicleClass::Car,
                fuel: FuelType::Petrol,
                fleet_fraction: 0.7,
                idle_rate: 1.0,
            },
            IdleRate {
                class: VehicleClass::Car,
                fuel: FuelType::Diesel,
                fleet_fraction: 0.4,
                idle_rate: 1.0,
            },
        ];
        assert!(IdleRateTable::new(rates).is_err());
    }

    #[test]
    fn co2_examples() {
        let f = EmissionFactorTable::default();
        let fuel: FuelRates<f64> = [(FuelType::Petrol, 24.63)].into();
        let r = co2_from_fuel(&fuel, &f).unwrap();
        assert_abs_diff_eq!(r.co2_per_hour[&FuelType::Petrol], 58.91, epsilon = 0.01);
        let fuel: FuelRates<f64> = [(FuelType::Diesel, 8.61)].into();
        assert_abs_diff_eq!(
            co2_from_fuel(&fuel, &f).unwrap().total_co2_per_hour,
            22.73,
            epsilon = 0.01
        );
        let zero: FuelRates<f64> = FuelType::ALL.iter().map(|&f| (f, 0.0)).collect();
        assert_eq!(co2_from_fuel(&zero, &f).unwrap().total_co2_per_hour, 0.0);
    }

    #[test]
    fn missing_factor_only_matters_for_nonzero_fuel() {
        let f = EmissionFactorTable {
            cng: None,
            ..Default::default()
        };
        let fuel: FuelRates<f64> = [(FuelType::Cng, 0.0), (FuelType::Petrol, 1.0)].into();
        assert!(co2_from_fuel(&fuel, &f).is_ok());
        let fuel: FuelRates<f64> = [(FuelType::Cng, 1.0)].into();
        assert_eq!(
            co2_from_fuel(&fuel, &f),
            Err(AnalysisError::MissingFactor(FuelType::Cng))
        );
    }

    #[test]
    fn city_scaling() {
        let c = scale_emissions(&[97.45, 64.21], CityRate::Given(370.0), 13.0).unwrap();
        assert_eq!(c.tons_per_day, 4.81);
        assert_abs_diff_eq!(c.study_kg_per_hour, 161.66, epsilon = 1e-9);
        assert!(c.estimated);
        let c = scale_emissions(&[0.0], CityRate::MeanTimesCount(1), 13.0).unwrap();
        assert_eq!(c.tons_per_day, 0.0);
        assert!(!c.estimated);
        let c = scale_emissions(&[97.45, 64.21], CityRate::MeanTimesCount(6), 13.0).unwrap();
        assert_abs_diff_eq!(c.city_kg_per_hour, 161.66 * 3.0, epsilon = 1e-9);
        assert!(c.estimated);
    }
}
