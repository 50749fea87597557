//! Analysis of signalized intersections under heterogeneous traffic.
//!
//! The crate ingests per-cycle signal timing and classified vehicle counts,
//! normalizes them to passenger car units and derives volume, V/C ratio,
//! saturation flow, green-time use, control delay, level of service and
//! idle emissions. Numeric code is generic over [`Scalar`]; the aliases
//! below fix it to `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod delay;
pub mod emissions;
pub mod error;
pub mod flow;
pub mod ingest;
pub mod los;
pub mod model;
pub mod pcu;
pub mod pipeline;
pub mod scalar;
pub mod stats;

pub use error::{AnalysisError, ErrorKind, Result};
pub use model::{ClassCounts, ClassifiedCount, Directionality, VehicleClass};
pub use scalar::Scalar;

pub type Real = f64;

pub type CycleRecord = model::SignalCycleRecord<Real>;
pub type Approach = model::ApproachConfig<Real>;
pub type Approaches = model::ApproachSet<Real>;
pub type Config = config::AnalysisConfig<Real>;
pub type Report = pipeline::AnalysisReport<Real>;
pub type PcuFactors = pcu::PcuFactorTable<Real>;
pub type Capacities = flow::CapacityTable<Real>;
pub type LosBands = los::LosBandTable<Real>;
pub type Delay = delay::DelayInputs<Real>;
pub type ZTest = stats::ZTestResult<Real>;
