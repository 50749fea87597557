#![allow(dead_code)]

use std::fs::File;
use std::path::PathBuf;

use signal_analysis::ingest::{ingest_approaches, ingest_cycles};
use signal_analysis::{Approaches, Config, CycleRecord};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

pub fn study_approaches() -> Approaches {
    ingest_approaches(File::open(fixture("tumakuru/approaches.csv")).unwrap()).unwrap()
}

pub fn study_cycles(approaches: &Approaches) -> Vec<CycleRecord> {
    ingest_cycles(
        File::open(fixture("tumakuru/cycles.csv")).unwrap(),
        approaches,
    )
    .unwrap()
}

pub fn study_config() -> Config {
    Config::from_toml_str(&std::fs::read_to_string(fixture("tumakuru/study.toml")).unwrap())
        .unwrap()
}

/// Field aggregates per approach: (id, cycle, red, green, [2W, auto, car, LCV, bus] PCU).
pub const FIELD_COUNTS: [(&str, f64, f64, f64, [u64; 5]); 9] = [
    ("SR1", 152.0, 120.0, 32.0, [23, 10, 12, 4, 2]),
    ("SR2", 152.0, 117.0, 35.0, [33, 30, 10, 1, 7]),
    ("SR3", 152.0, 140.0, 12.0, [6, 2, 2, 1, 0]),
    ("SR4", 152.0, 107.0, 45.0, [35, 28, 18, 4, 4]),
    ("SR5", 152.0, 124.0, 28.0, [8, 4, 10, 1, 2]),
    ("TR1", 119.0, 94.0, 25.0, [12, 14, 4, 4, 0]),
    ("TR2", 119.0, 79.0, 40.0, [30, 16, 7, 6, 8]),
    ("TR3", 119.0, 110.0, 9.0, [7, 1, 3, 4, 0]),
    ("TR4", 119.0, 74.0, 45.0, [38, 25, 9, 7, 8]),
];

/// Reference volume and V/C per approach: (id, lanes, two-way, capacity, observed volume, V/C).
pub const OBSERVED_VC: [(&str, u32, bool, f64, f64, f64); 9] = [
    ("SR1", 3, false, 3600.0, 1206.0, 0.34),
    ("SR2", 2, false, 2400.0, 1918.0, 0.80),
    ("SR3", 1, true, 2400.0, 270.0, 0.11),
    ("SR4", 3, false, 3600.0, 2110.0, 0.59),
    ("SR5", 1, false, 1500.0, 594.0, 0.40),
    ("TR1", 3, false, 3600.0, 1029.0, 0.29),
    ("TR2", 2, false, 2400.0, 2027.0, 0.84),
    ("TR3", 2, false, 2400.0, 454.0, 0.19),
    ("TR4", 3, false, 3600.0, 2632.0, 0.73),
];

/// Reference saturation flows per approach: (id, width, g_e, N, SF1, SF2, SF1 - SF2).
pub const SATURATION_REF: [(&str, f64, f64, f64, f64, f64, f64); 9] = [
    ("SR1", 10.5, 24.0, 48.0, 7200.0, 5513.0, 1688.0),
    ("SR2", 7.0, 31.0, 77.0, 8942.0, 3675.0, 5267.0),
    ("SR3", 3.5, 10.0, 9.0, 3240.0, 1838.0, 1403.0),
    ("SR4", 10.5, 35.0, 83.0, 8537.0, 5513.0, 3025.0),
    ("SR5", 3.5, 16.0, 21.0, 4725.0, 1838.0, 2888.0),
    ("TR1", 10.5, 18.0, 30.0, 6000.0, 5513.0, 488.0),
    ("TR2", 7.0, 35.0, 61.0, 6274.0, 3675.0, 2599.0),
    ("TR3", 7.0, 9.0, 17.0, 6800.0, 3675.0, 3125.0),
    ("TR4", 10.5, 38.0, 82.0, 7768.0, 5513.0, 2256.0),
];

/// Reference control delays in seconds.
pub const DELAY_REF: [(&str, f64); 9] = [
    ("SR1", 50.24),
    ("SR2", 56.42),
    ("SR3", 60.51),
    ("SR4", 52.76),
    ("SR5", 60.46),
    ("TR1", 42.44),
    ("TR2", 37.52),
    ("TR3", 45.32),
    ("TR4", 34.02),
];

/// Platoon ratios solved from the delay model with exact rational
/// arithmetic, independently of the crate: for each approach,
/// `R_p = (6.23 + 0.5 C (1 - g/C)^2 / (1 - X g/C) - d) / 15.35` with
/// `X = (field row sum * 3600 / C) / capacity` and the reference delay `d`.
pub const BACKSOLVED_RP: [(&str, f64); 9] = [
    ("SR1", 0.453335728190216),
    ("SR2", 0.325559125277186),
    ("SR3", 0.700390634887635),
    ("SR4", -0.063282369099257),
    ("SR5", 0.020533092662374),
    ("TR1", 0.214124244428636),
    ("TR2", 0.347077606401209),
    ("TR3", 0.813543427183348),
    ("TR4", 0.261232698420167),
];

/// Reference idle fuel per hour: (intersection, CNG kg/h, diesel L/h, petrol L/h).
pub const IDLE_FUEL_REF: [(&str, f64, f64, f64); 2] =
    [("SSC", 9.42, 6.56, 24.63), ("THC", 5.93, 8.61, 11.76)];

/// Reference idle CO2 per hour: (intersection, CNG, diesel, petrol, overall) in kg/h.
pub const IDLE_CO2_REF: [(&str, f64, f64, f64, f64); 2] = [
    ("SSC", 21.21, 17.32, 58.91, 97.45),
    ("THC", 13.35, 22.73, 28.13, 64.21),
];
