use thiserror::Error;

use crate::emissions::FuelType;
use crate::model::Directionality;

/// Broad category of an [`AnalysisError`], used by front ends to pick an
/// exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or inconsistent input data or configuration.
    Input,
    /// Input is well-formed but outside the domain of a model.
    Domain,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("row {row}: unknown approach '{approach}'")]
    UnknownApproach { row: usize, approach: String },
    #[error("row {row}: {message}")]
    SchemaViolation { row: usize, message: String },
    #[error("row {row}: {message}")]
    InvariantViolation { row: usize, message: String },
    #[error("total vehicle count is zero")]
    EmptyTraffic,
    #[error("records carry no timestamps")]
    NoTimestamps,
    #[error("window length must be positive, got {0} s")]
    InvalidWindow(i64),
    #[error("need {needed} consecutive windows with data, only {available} available")]
    InsufficientWindows { needed: usize, available: usize },
    #[error("z-test needs at least 2 samples per group (got {n_a} and {n_b})")]
    TooFewSamples { n_a: usize, n_b: usize },
    #[error("both samples have zero variance and equal means; z is undefined")]
    ZeroVariance,
    #[error("input is empty")]
    EmptyInput,
    #[error("cycle length must be positive")]
    ZeroCycle,
    #[error("no capacity configured for {lanes} lane(s), {directionality}")]
    UnknownLaneConfig {
        lanes: u32,
        directionality: Directionality,
    },
    #[error("effective green must be positive")]
    ZeroEffectiveGreen,
    #[error("road width must be positive")]
    NonPositiveWidth,
    #[error("intersection '{0}' has no approaches with data")]
    EmptyIntersection(String),
    #[error("green time must be positive")]
    ZeroGreen,
    #[error("share of cycle that is green (PTG) must be positive")]
    ZeroPtg,
    #[error("degree of saturation X*g/C = {degree:.6} is at or beyond 1; delay model undefined")]
    SaturatedRegime { degree: f64 },
    #[error("no major approaches to average over")]
    NoMajorApproaches,
    #[error("no emission factor configured for {0}")]
    MissingFactor(FuelType),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl AnalysisError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            AnalysisError::SaturatedRegime { .. }
            | AnalysisError::ZeroVariance
            | AnalysisError::ZeroCycle
            | AnalysisError::ZeroEffectiveGreen
            | AnalysisError::ZeroGreen
            | AnalysisError::ZeroPtg => ErrorKind::Domain,
            _ => ErrorKind::Input,
        }
    }

    /// Stable identifier for machine-readable error records.
    pub fn code(&self) -> &'static str {
        match self {
            AnalysisError::UnknownApproach { .. } => "UnknownApproach",
            AnalysisError::SchemaViolation { .. } => "SchemaViolation",
            AnalysisError::InvariantViolation { .. } => "InvariantViolation",
            AnalysisError::EmptyTraffic => "EmptyTraffic",
            AnalysisError::NoTimestamps => "NoTimestamps",
            AnalysisError::InvalidWindow(_) => "InvalidWindow",
            AnalysisError::InsufficientWindows { .. } => "InsufficientWindows",
            AnalysisError::TooFewSamples { .. } => "TooFewSamples",
            AnalysisError::ZeroVariance => "ZeroVariance",
            AnalysisError::EmptyInput => "EmptyInput",
            AnalysisError::ZeroCycle => "ZeroCycle",
            AnalysisError::UnknownLaneConfig { .. } => "UnknownLaneConfig",
            AnalysisError::ZeroEffectiveGreen => "ZeroEffectiveGreen",
            AnalysisError::NonPositiveWidth => "NonPositiveWidth",
            AnalysisError::EmptyIntersection(_) => "EmptyIntersection",
            AnalysisError::ZeroGreen => "ZeroGreen",
            AnalysisError::ZeroPtg => "ZeroPTG",
            AnalysisError::SaturatedRegime { .. } => "SaturatedRegime",
            AnalysisError::NoMajorApproaches => "NoMajorApproaches",
            AnalysisError::MissingFactor(_) => "MissingFactor",
            AnalysisError::InvalidInput(_) => "InvalidInput",
            AnalysisError::InvalidConfig(_) => "InvalidConfig",
        }
    }

    /// Input row the error refers to, when there is one.
    pub fn row(&self) -> Option<usize> {
        match self {
            AnalysisError::UnknownApproach { row, .. }
            | AnalysisError::SchemaViolation { row, .. }
            | AnalysisError::InvariantViolation { row, .. } => Some(*row),
            _ => None,
        }
    }
}

pub type Result<T, E = AnalysisError> = std::result::Result<T, E>;
