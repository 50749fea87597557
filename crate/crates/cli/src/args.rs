use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use signal_analysis::los::DelayPolicy;
use signal_analysis::stats::DayFilter;

/// Signalized-intersection analysis from per-cycle signal and count records.
#[derive(Parser, Debug)]
#[command(name = "analyze", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Check a cycle file and list every bad row.
    Validate,
    /// Time-of-day cycle-length averages and the peak run of windows.
    PeakHours,
    /// Pairwise z-tests and box-plot summaries of per-cycle PCU by approach.
    Variability,
    /// Volume, V/C and saturation flow per approach.
    Flow,
    /// Green splits, green per PCU and wastage.
    Green,
    /// Control delay per approach.
    Delay,
    /// Intersection delay and level of service.
    Los,
    /// Idle fuel and CO2.
    Emissions,
    /// Everything above except validate, peak-hours and variability.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::PeakHours => "peak-hours",
            Command::Variability => "variability",
            Command::Flow => "flow",
            Command::Green => "green",
            Command::Delay => "delay",
            Command::Los => "los",
            Command::Emissions => "emissions",
            Command::Report => "report",
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct Options {
    /// Per-cycle records (CSV).
    #[arg(long, global = true, value_name = "PATH")]
    pub cycles: Option<PathBuf>,
    /// Approach configuration (CSV).
    #[arg(long, global = true, value_name = "PATH")]
    pub approaches: Option<PathBuf>,
    /// Analysis config (TOML). Falls back to $ANALYZER_CONFIG_DIR/analyzer.toml.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory. Without it results go to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Peak-hour window length in seconds.
    #[arg(long, global = true, value_name = "SECONDS")]
    pub window: Option<i64>,
    /// Number of consecutive windows in the peak run.
    #[arg(long, global = true, value_name = "N")]
    pub span: Option<usize>,
    /// Approaches averaged into the intersection delay.
    #[arg(long, global = true, value_enum)]
    pub policy: Option<PolicyArg>,
    /// Days pooled for peak-hour windows.
    #[arg(long, global = true, value_enum)]
    pub days: Option<DaysArg>,
    /// Restrict to these intersections (repeatable).
    #[arg(long, global = true, value_name = "ID")]
    pub intersection: Vec<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyArg {
    Major,
    All,
}

impl From<PolicyArg> for DelayPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Major => DelayPolicy::MajorOnly,
            PolicyArg::All => DelayPolicy::AllApproaches,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaysArg {
    Weekday,
    Saturday,
    Sunday,
    All,
}

impl From<DaysArg> for DayFilter {
    fn from(d: DaysArg) -> Self {
        match d {
            DaysArg::Weekday => DayFilter::Weekday,
            DaysArg::Saturday => DayFilter::Saturday,
            DaysArg::Sunday => DayFilter::Sunday,
            DaysArg::All => DayFilter::All,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Text,
}
