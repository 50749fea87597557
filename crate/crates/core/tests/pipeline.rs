mod common;

use std::fs::File;

use approx::assert_abs_diff_eq;
use common::*;
use signal_analysis::config::AnalysisConfig;
use signal_analysis::emissions::FuelType;
use signal_analysis::ingest::{ingest_approaches, ingest_cycles};
use signal_analysis::los::{DelayPolicy, Grade};
use signal_analysis::pipeline::analyze;
use signal_analysis::Report;

fn study_report(policy: Option<DelayPolicy>) -> Report {
    let approaches = study_approaches();
    let records = study_cycles(&approaches);
    analyze(&records, &approaches, &study_config(), policy).unwrap()
}

#[test]
fn fixture_shapes() {
    let approaches = study_approaches();
    assert_eq!(approaches.len(), 9);
    assert_eq!(approaches.intersections(), vec!["SSC", "THC"]);
    assert_eq!(study_cycles(&approaches).len(), 9);
}

#[test]
fn approach_delays_follow_fixture_ratios() {
    let report = study_report(None);
    for (id, expected) in DELAY_REF {
        let a = report.approaches().find(|a| a.approach_id() == id).unwrap();
        let d = a.delay.unwrap();
        assert!(!d.clamped, "{id}");
        if id == "SR4" {
            // runs at R_p = 0, the nearest admissible value
            assert_abs_diff_eq!(d.seconds, 51.7886, epsilon = 1e-4);
        } else {
            assert_abs_diff_eq!(d.seconds, expected, epsilon = 0.01);
        }
    }
}

#[test]
fn flow_columns() {
    let report = study_report(None);
    for (id, _, _, _, sf1, sf2, _) in SATURATION_REF {
        let a = report.approaches().find(|a| a.approach_id() == id).unwrap();
        assert_abs_diff_eq!(a.flow.sf_discharge.unwrap(), sf1, epsilon = 1.0);
        assert_abs_diff_eq!(a.flow.sf_width, sf2, epsilon = 1.0);
    }
    let tr4 = report
        .approaches()
        .find(|a| a.approach_id() == "TR4")
        .unwrap();
    assert_abs_diff_eq!(tr4.flow.vc_ratio, 0.7311, epsilon = 1e-4);
    assert_eq!(tr4.los_vc.grade, Grade::C);
}

#[test]
fn intersection_delays_and_grades() {
    let report = study_report(None);
    let ssc = report.intersection("SSC").unwrap();
    assert_eq!(ssc.policy, DelayPolicy::AllApproaches);
    assert_abs_diff_eq!(ssc.delay_all.unwrap(), 55.8837, epsilon = 1e-4);
    assert_eq!(ssc.los_heterogeneous.as_ref().unwrap().grade, Grade::C);
    assert_eq!(ssc.los_hcm.as_ref().unwrap().grade, Grade::E);

    let thc = report.intersection("THC").unwrap();
    assert_abs_diff_eq!(thc.delay_all.unwrap(), 39.825, epsilon = 1e-9);
    assert_eq!(thc.los_heterogeneous.as_ref().unwrap().grade, Grade::B);
    assert_eq!(thc.los_hcm.as_ref().unwrap().grade, Grade::D);

    // majors per approach file: SR1, SR2, SR4 and TR1, TR2, TR4
    let major = study_report(Some(DelayPolicy::MajorOnly));
    let thc = major.intersection("THC").unwrap();
    assert_eq!(thc.policy_delay(), thc.delay_major);
    assert_abs_diff_eq!(
        thc.delay_major.unwrap(),
        (42.44 + 37.52 + 34.02) / 3.0,
        epsilon = 1e-9
    );
}

#[test]
fn ssc_idle_fuel_matches_calibration() {
    let report = study_report(None);
    let (_, cng, diesel, petrol) = IDLE_FUEL_REF[0];
    let e = report
        .intersection("SSC")
        .unwrap()
        .emissions
        .as_ref()
        .unwrap();
    assert_abs_diff_eq!(e.fuel_per_hour[&FuelType::Cng], cng, epsilon = 0.01);
    assert_abs_diff_eq!(e.fuel_per_hour[&FuelType::Diesel], diesel, epsilon = 0.01);
    assert_abs_diff_eq!(e.fuel_per_hour[&FuelType::Petrol], petrol, epsilon = 0.01);

    let city = report.city.unwrap();
    assert_eq!(city.city_kg_per_hour, 370.0);
    assert_abs_diff_eq!(city.tons_per_day, 4.81, epsilon = 1e-12);
    assert!(report.all_flags().any(|f| f.code == "city-rate-estimated"));
}

#[test]
fn reference_flags() {
    let report = study_report(None);
    let mismatches: Vec<(&str, &str)> = report
        .all_flags()
        .filter(|f| f.code == "reference-mismatch")
        .map(|f| (f.subject.as_str(), f.message.as_str()))
        .collect();
    // TR2+TR4 share agrees; SR2+SR4 is 52.63% from the data
    assert!(!mismatches
        .iter()
        .any(|(s, m)| *s == "THC" && m.contains("green share")));
    assert!(mismatches
        .iter()
        .any(|(s, m)| *s == "SSC" && m.contains("52.63%")));
    for id in ["SSC", "THC"] {
        assert!(mismatches
            .iter()
            .any(|(s, m)| *s == id && m.contains("V/C grade")));
        assert!(mismatches
            .iter()
            .any(|(s, m)| *s == id && m.contains("mean delay")));
    }
}

#[test]
fn deterministic_and_generic() {
    assert_eq!(study_report(None), study_report(None));

    let approaches =
        ingest_approaches::<f32, _>(File::open(fixture("tumakuru/approaches.csv")).unwrap())
            .unwrap();
    let records = ingest_cycles(
        File::open(fixture("tumakuru/cycles.csv")).unwrap(),
        &approaches,
    )
    .unwrap();
    let cfg = AnalysisConfig::<f32>::from_toml_str(
        &std::fs::read_to_string(fixture("tumakuru/study.toml")).unwrap(),
    )
    .unwrap();
    let report = analyze(&records, &approaches, &cfg, None).unwrap();
    let tr4 = report
        .approaches()
        .find(|a| a.approach_id() == "TR4")
        .unwrap();
    assert_abs_diff_eq!(tr4.delay.unwrap().seconds, 34.02f32, epsilon = 0.01);
}
