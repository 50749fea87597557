mod common;

use std::fs::File;

use common::*;
use signal_analysis::ingest::{ingest_cycles, validate_cycles};
use signal_analysis::stats::{peak_window, window_cycle_lengths, DayFilter};
use signal_analysis::AnalysisError;

#[test]
fn synthetic_week_peaks() {
    let approaches = study_approaches();
    let records = ingest_cycles::<f64, _>(
        File::open(fixture("synthetic_week.csv")).unwrap(),
        &approaches,
    )
    .unwrap();
    assert_eq!(records.len(), 5936);

    let weekday = window_cycle_lengths(&records, 1800, DayFilter::Weekday).unwrap();
    assert_eq!(weekday.len(), 26);
    assert_eq!(peak_window(&weekday, 4).unwrap().label(), "11:00–13:00");

    // 15-minute windows find the same plateau
    let fine = window_cycle_lengths(&records, 900, DayFilter::Weekday).unwrap();
    assert_eq!(peak_window(&fine, 8).unwrap().label(), "11:00–13:00");

    // weekends run a flat plan around 100 s
    let saturday = window_cycle_lengths(&records, 1800, DayFilter::Saturday).unwrap();
    for w in &saturday {
        let m = w.mean_cycle_length.unwrap();
        assert!((96.0..=104.0).contains(&m), "{m}");
    }
}

#[test]
fn cycles_without_timestamps_cannot_be_windowed() {
    let approaches = study_approaches();
    let records = study_cycles(&approaches);
    assert_eq!(
        window_cycle_lengths(&records, 1800, DayFilter::All),
        Err(AnalysisError::NoTimestamps)
    );
}

#[test]
fn validation_reports_every_bad_row() {
    let approaches = study_approaches();
    let csv = "approach_id,cycle_length_s,red_s,green_s,two_wheeler\n\
               SR1,152,120,32,4\n\
               XX9,152,120,32,4\n\
               SR1,100,120,32,4\n\
               SR1,152,120,32,-1\n";
    let (ok, errors) = validate_cycles::<f64, _>(csv.as_bytes(), Some(&approaches));
    assert_eq!(ok, 1);
    let rows: Vec<_> = errors.iter().map(|e| e.row()).collect();
    assert_eq!(rows, vec![Some(3), Some(4), Some(5)]);
    assert!(matches!(errors[0], AnalysisError::UnknownApproach { .. }));
    assert!(matches!(
        errors[1],
        AnalysisError::InvariantViolation { .. }
    ));
    assert!(matches!(errors[2], AnalysisError::SchemaViolation { .. }));

    let (ok, errors) = validate_cycles::<f64, _>(csv.as_bytes(), None);
    assert_eq!((ok, errors.len()), (2, 2));
}
