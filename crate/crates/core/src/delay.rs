//! Control delay under heterogeneous traffic, using Webster's uniform-delay
//! term with a constant offset and a platoon correction:
//!
//! ```text
//! d = 6.23 + 0.5 C (1 - g/C)^2 / (1 - X g/C) - 15.35 R_p
//! ```

use crate::error::{AnalysisError, Result};
use crate::scalar::{lit, to_f64, Scalar};

pub const DELAY_OFFSET_S: f64 = 6.23;
pub const PLATOON_SLOPE_S: f64 = 15.35;
/// `X g / C` at or above `1 - SATURATION_GUARD` is treated as saturated.
pub const SATURATION_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayInputs<T> {
    pub cycle_length: T,
    pub green: T,
    pub vc_ratio: T,
    pub platoon_ratio: T,
}

impl<T: Scalar> DelayInputs<T> {
    pub fn new(cycle_length: T, green: T, vc_ratio: T, platoon_ratio: T) -> Result<Self> {
        let inputs = Self {
            cycle_length,
            green,
            vc_ratio,
            platoon_ratio,
        };
        inputs.check()?;
        Ok(inputs)
    }

    /// Builds inputs with the platoon ratio taken from arrival shares.
    pub fn from_arrivals(cycle_length: T, green: T, vc_ratio: T, pvg: T, ptg: T) -> Result<Self> {
        Self::new(cycle_length, green, vc_ratio, platoon_ratio(pvg, ptg)?)
    }

    fn check(&self) -> Result<()> {
        let all_finite = [
            self.cycle_length,
            self.green,
            self.vc_ratio,
            self.platoon_ratio,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(AnalysisError::InvalidInput("non-finite delay input".into()));
        }
        if !(self.cycle_length > T::zero()) {
            return Err(AnalysisError::ZeroCycle);
        }
        if !(self.green > T::zero()) {
            return Err(AnalysisError::ZeroGreen);
        }
        if self.green > self.cycle_length {
            return Err(AnalysisError::InvalidInput(format!(
                "green {} exceeds cycle length {}",
                self.green, self.cycle_length
            )));
        }
        if self.vc_ratio < T::zero() {
            return Err(AnalysisError::InvalidInput("V/C ratio must be >= 0".into()));
        }
        if self.platoon_ratio < T::zero() {
            return Err(AnalysisError::InvalidInput(format!(
                "platoon ratio {} must be >= 0",
                self.platoon_ratio
            )));
        }
        Ok(())
    }

    fn green_ratio(&self) -> T {
        self.green / self.cycle_length
    }

    fn uniform_term(&self) -> Result<T> {
        let gc = self.green_ratio();
        let degree = self.vc_ratio * gc;
        if degree >= T::one() - lit(SATURATION_GUARD) {
            return Err(AnalysisError::SaturatedRegime {
                degree: to_f64(degree),
            });
        }
        let red_share = T::one() - gc;
        Ok(lit::<T>(0.5) * self.cycle_length * red_share * red_share / (T::one() - degree))
    }
}

/// Ratio of the share of traffic arriving on green (PVG) to the share of
/// the cycle that is green (PTG).
pub fn platoon_ratio<T: Scalar>(pvg: T, ptg: T) -> Result<T> {
    let unit = |v: T| v >= T::zero() && v <= T::one();
    if !unit(pvg) || !unit(ptg) {
        return Err(AnalysisError::InvalidInput(format!(
            "PVG {pvg} and PTG {ptg} must be fractions in [0, 1]"
        )));
    }
    if ptg == T::zero() {
        return Err(AnalysisError::ZeroPtg);
    }
    Ok(pvg / ptg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlDelay<T> {
    /// Seconds per vehicle, never negative.
    pub seconds: T,
    /// Model output before clamping.
    pub raw: T,
    pub clamped: bool,
}

pub fn control_delay<T: Scalar>(inputs: &DelayInputs<T>) -> Result<ControlDelay<T>> {
    inputs.check()?;
    let raw = lit::<T>(DELAY_OFFSET_S) + inputs.uniform_term()?
        - lit::<T>(PLATOON_SLOPE_S) * inputs.platoon_ratio;
    let clamped = raw < T::zero();
    Ok(ControlDelay {
        seconds: if clamped { T::zero() } else { raw },
        raw,
        clamped,
    })
}

/// Platoon ratio that makes the model produce `delay` for the given timing
/// and V/C. The result may be negative when `delay` exceeds what random
/// arrivals would give.
pub fn solve_platoon_ratio<T: Scalar>(
    cycle_length: T,
    green: T,
    vc_ratio: T,
    delay: T,
) -> Result<T> {
    let probe = DelayInputs {
        cycle_length,
        green,
        vc_ratio,
        platoon_ratio: T::zero(),
    };
    probe.check()?;
    Ok((lit::<T>(DELAY_OFFSET_S) + probe.uniform_term()? - delay) / lit(PLATOON_SLOPE_S))
}
