//! Level-of-service grading and intersection-level delay averaging.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::model::ApproachSet;
use crate::scalar::{count, lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Grade {
    pub const ALL: [Grade; 6] = [Grade::A, Grade::B, Grade::C, Grade::D, Grade::E, Grade::F];
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Which side of a band edge a value sitting exactly on it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandEdge {
    /// `(lower, upper]`: the edge value takes the better grade.
    UpperInclusive,
    /// `[lower, upper)`: the edge value takes the worse grade.
    LowerInclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosBand<T> {
    pub grade: Grade,
    /// Open-ended when absent; only the last band may omit it.
    pub upper: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosBandTable<T> {
    pub standard: String,
    pub edge: BandEdge,
    pub bands: Vec<LosBand<T>>,
}

impl<T: Scalar> LosBandTable<T> {
    /// Builds a table from the five upper edges of grades A to E.
    pub fn from_edges(standard: &str, edge: BandEdge, edges: [f64; 5]) -> Self {
        let bands = Grade::ALL
            .iter()
            .enumerate()
            .map(|(i, &grade)| LosBand {
                grade,
                upper: edges.get(i).map(|&e| lit(e)),
            })
            .collect();
        Self {
            standard: standard.to_string(),
            edge,
            bands,
        }
    }

    /// Delay bands (s/veh) derived for heterogeneous Indian traffic.
    pub fn heterogeneous_delay() -> Self {
        Self::from_edges(
            "delay-heterogeneous",
            BandEdge::UpperInclusive,
            [10.0, 45.0, 65.0, 100.0, 135.0],
        )
    }

    /// HCM 2000 signalized-intersection delay bands (s/veh).
    pub fn hcm_delay() -> Self {
        Self::from_edges(
            "delay-hcm",
            BandEdge::UpperInclusive,
            [10.0, 20.0, 35.0, 55.0, 80.0],
        )
    }

    /// Volume-to-capacity bands.
    pub fn volume_capacity() -> Self {
        Self::from_edges(
            "vc-ratio",
            BandEdge::LowerInclusive,
            [0.60, 0.70, 0.80, 0.90, 1.0],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| {
            Err(AnalysisError::InvalidConfig(format!(
                "{}: {m}",
                self.standard
            )))
        };
        let grades: Vec<Grade> = self.bands.iter().map(|b| b.grade).collect();
        if grades != Grade::ALL {
            return bad("bands must cover grades A to F once, in order".into());
        }
        let (last, rest) = self.bands.split_last().expect("six bands");
        if last.upper.is_some() {
            return bad("grade F must be open-ended".into());
        }
        let mut prev: Option<T> = None;
        for b in rest {
            let Some(u) = b.upper else {
                return bad(format!("grade {} needs an upper bound", b.grade));
            };
            if !u.is_finite() || prev.is_some_and(|p| u <= p) {
                return bad("band bounds must be finite and strictly increasing".into());
            }
            prev = Some(u);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LosResult<T> {
    pub grade: Grade,
    pub standard: String,
    pub classified_value: T,
}

/// Grades `value` against `table`.
pub fn classify_los<T: Scalar>(value: T, table: &LosBandTable<T>) -> Result<LosResult<T>> {
    if value.is_nan() || value < T::zero() {
        return Err(AnalysisError::InvalidInput(format!(
            "cannot grade {value}: value must be >= 0"
        )));
    }
    let inside = |upper: T| match table.edge {
        BandEdge::UpperInclusive => value <= upper,
        BandEdge::LowerInclusive => value < upper,
    };
    let grade = table
        .bands
        .iter()
        .find(|b| b.upper.is_none_or(inside))
        .map(|b| b.grade)
        .unwrap_or(Grade::F);
    Ok(LosResult {
        grade,
        standard: table.standard.clone(),
        classified_value: value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayPolicy {
    #[serde(rename = "all")]
    AllApproaches,
    #[serde(rename = "major")]
    MajorOnly,
}

impl std::str::FromStr for DelayPolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "all" | "allapproaches" => Ok(DelayPolicy::AllApproaches),
            "major" | "majoronly" => Ok(DelayPolicy::MajorOnly),
            other => Err(format!("unknown delay policy '{other}'")),
        }
    }
}

impl fmt::Display for DelayPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DelayPolicy::AllApproaches => "all",
            DelayPolicy::MajorOnly => "major",
        })
    }
}

/// Unweighted mean of approach delays under `policy`. Approaches missing
/// from `approaches` count as minor.
pub fn intersection_delay<T: Scalar>(
    per_approach: &BTreeMap<String, T>,
    policy: DelayPolicy,
    approaches: &ApproachSet<T>,
) -> Result<T> {
    if per_approach.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let picked: Vec<T> = per_approach
        .iter()
        .filter(|(id, _)| match policy {
            DelayPolicy::AllApproaches => true,
            DelayPolicy::MajorOnly => approaches.get(id).is_some_and(|a| a.is_major),
        })
        .map(|(_, &d)| d)
        .collect();
    if picked.is_empty() {
        return Err(AnalysisError::NoMajorApproaches);
    }
    let sum = picked.iter().fold(T::zero(), |a, &d| a + d);
    Ok(sum / count::<T>(picked.len() as u64))
}
