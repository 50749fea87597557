//! CSV ingestion and serialization for cycle records and approach
//! configuration.
//!
//! Cycle files need the `approach_id`, `cycle_length_s`, `red_s` and
//! `green_s` columns. Vehicle class columns (`two_wheeler`,
//! `auto_rickshaw`, `car`, `lcv`, `bus`) default to zero when absent, and
//! `effective_green_s`, `exited_pcu` and `timestamp` are optional. Row
//! numbers in errors are file line numbers, the header being row 1.

use std::collections::HashMap;
use std::io::{Read, Write};

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use crate::error::{AnalysisError, Result};
use crate::model::{
    ApproachConfig, ApproachSet, ClassCounts, ClassifiedCount, Directionality, SignalCycleRecord,
    VehicleClass,
};
use crate::scalar::Scalar;

pub const CYCLE_REQUIRED: [&str; 4] = ["approach_id", "cycle_length_s", "red_s", "green_s"];
pub const CYCLE_OPTIONAL: [&str; 3] = ["effective_green_s", "exited_pcu", "timestamp"];
pub const APPROACH_COLUMNS: [&str; 7] = [
    "approach_id",
    "intersection_id",
    "lanes",
    "directionality",
    "width_m",
    "free_left",
    "is_major",
];

fn schema(row: usize, message: impl Into<String>) -> AnalysisError {
    AnalysisError::SchemaViolation {
        row,
        message: message.into(),
    }
}

fn csv_error(err: csv::Error) -> AnalysisError {
    let row = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or_default();
    schema(row, err.to_string())
}

struct Columns(HashMap<String, usize>);

impl Columns {
    fn from_header(header: &StringRecord, allowed: &[&str]) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, name) in header.iter().enumerate() {
            let name = name.trim().trim_start_matches('\u{feff}').to_string();
            if !allowed.contains(&name.as_str()) {
                return Err(schema(1, format!("unknown column '{name}'")));
            }
            if map.insert(name.clone(), i).is_some() {
                return Err(schema(1, format!("duplicate column '{name}'")));
            }
        }
        Ok(Self(map))
    }

    fn require(&self, names: &[&str]) -> Result<()> {
        for name in names {
            if !self.0.contains_key(*name) {
                return Err(schema(1, format!("missing required column '{name}'")));
            }
        }
        Ok(())
    }

    fn cell<'r>(&self, rec: &'r StringRecord, name: &str) -> Option<&'r str> {
        self.0
            .get(name)
            .and_then(|&i| rec.get(i))
            .map(str::trim)
            .filter(|s| !s.is_empty())
    }
}

fn parse_real<T: Scalar>(row: usize, column: &str, raw: &str) -> Result<T> {
    T::from_str_radix(raw, 10)
        .ok()
        .filter(|v: &T| v.is_finite())
        .ok_or_else(|| schema(row, format!("column '{column}': '{raw}' is not a number")))
}

fn parse_count(row: usize, column: &str, raw: &str) -> Result<u64> {
    let n: i64 = raw.parse().map_err(|_| {
        schema(
            row,
            format!("column '{column}': '{raw}' is not a whole number"),
        )
    })?;
    u64::try_from(n).map_err(|_| schema(row, format!("column '{column}': negative count {n}")))
}

fn parse_flag(row: usize, column: &str, raw: &str) -> Result<bool> {
    match raw {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(schema(
            row,
            format!("column '{column}': expected 0 or 1, got '{other}'"),
        )),
    }
}

fn cycle_columns() -> Vec<&'static str> {
    CYCLE_REQUIRED
        .iter()
        .copied()
        .chain(VehicleClass::ALL.iter().map(|c| c.column()))
        .chain(CYCLE_OPTIONAL.iter().copied())
        .collect()
}

fn parse_cycle_row<T: Scalar>(
    cols: &Columns,
    rec: &StringRecord,
    row: usize,
    approaches: Option<&ApproachSet<T>>,
) -> Result<SignalCycleRecord<T>> {
    let required = |name: &str| {
        cols.cell(rec, name)
            .ok_or_else(|| schema(row, format!("empty required column '{name}'")))
    };
    let approach_id = required("approach_id")?.to_string();
    let cycle_length = parse_real(row, "cycle_length_s", required("cycle_length_s")?)?;
    let red_time = parse_real(row, "red_s", required("red_s")?)?;
    let green_time = parse_real(row, "green_s", required("green_s")?)?;

    let mut counts = ClassCounts::default();
    for class in VehicleClass::ALL {
        if let Some(raw) = cols.cell(rec, class.column()) {
            counts[class] = parse_count(row, class.column(), raw)?;
        }
    }
    let effective_green = cols
        .cell(rec, "effective_green_s")
        .map(|raw| parse_real(row, "effective_green_s", raw))
        .transpose()?;
    let exited_pcu = cols
        .cell(rec, "exited_pcu")
        .map(|raw| parse_real(row, "exited_pcu", raw))
        .transpose()?;
    let timestamp = cols
        .cell(rec, "timestamp")
        .map(|raw| {
            raw.parse::<i64>().map_err(|_| {
                schema(
                    row,
                    format!("column 'timestamp': '{raw}' is not integer seconds"),
                )
            })
        })
        .transpose()?;

    let record = SignalCycleRecord {
        cycle_length,
        red_time,
        green_time,
        effective_green,
        exited_pcu,
        counts: ClassifiedCount {
            approach_id,
            timestamp,
            counts,
        },
    };
    record.check(row)?;
    if approaches.is_some_and(|a| !a.contains(record.approach_id())) {
        return Err(AnalysisError::UnknownApproach {
            row,
            approach: record.approach_id().to_string(),
        });
    }
    Ok(record)
}

/// Reads cycle records, visiting each row's outcome. Header problems are
/// returned directly.
fn read_cycles<T: Scalar, R: Read>(
    source: R,
    approaches: Option<&ApproachSet<T>>,
    mut visit: impl FnMut(Result<SignalCycleRecord<T>>) -> Result<()>,
) -> Result<()> {
    let mut reader = ReaderBuilder::new()
        .trim(Trim::All)
        .flexible(false)
        .from_reader(source);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.is_empty() {
        return Ok(());
    }
    let cols = Columns::from_header(&header, &cycle_columns())?;
    cols.require(&CYCLE_REQUIRED)?;
    let mut rec = StringRecord::new();
    loop {
        match reader.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {
                let row = rec
                    .position()
                    .map(|p| p.line() as usize)
                    .unwrap_or_default();
                visit(parse_cycle_row(&cols, &rec, row, approaches))?;
            }
            Err(e) => visit(Err(csv_error(e)))?,
        }
    }
    Ok(())
}

/// Parses and validates cycle records, stopping at the first bad row.
pub fn ingest_cycles<T: Scalar, R: Read>(
    source: R,
    approaches: &ApproachSet<T>,
) -> Result<Vec<SignalCycleRecord<T>>> {
    let mut out = Vec::new();
    read_cycles(source, Some(approaches), |r| {
        out.push(r?);
        Ok(())
    })?;
    Ok(out)
}

/// Like [`ingest_cycles`] but accepts any approach id.
pub fn ingest_cycles_unchecked<T: Scalar, R: Read>(source: R) -> Result<Vec<SignalCycleRecord<T>>> {
    let mut out = Vec::new();
    read_cycles(source, None, |r| {
        out.push(r?);
        Ok(())
    })?;
    Ok(out)
}

/// Checks every row and returns all diagnostics instead of the first.
/// Without `approaches`, approach ids are not checked.
pub fn validate_cycles<T: Scalar, R: Read>(
    source: R,
    approaches: Option<&ApproachSet<T>>,
) -> (usize, Vec<AnalysisError>) {
    let mut ok = 0;
    let mut errors = Vec::new();
    let header = read_cycles(source, approaches, |r| {
        match r {
            Ok(_) => ok += 1,
            Err(e) => errors.push(e),
        }
        Ok(())
    });
    if let Err(e) = header {
        errors.push(e);
    }
    (ok, errors)
}

/// Parses the approach configuration file.
pub fn ingest_approaches<T: Scalar, R: Read>(source: R) -> Result<ApproachSet<T>> {
    let mut reader = ReaderBuilder::new().trim(Trim::All).from_reader(source);
    let header = reader.headers().map_err(csv_error)?.clone();
    let mut set = ApproachSet::new();
    if header.is_empty() {
        return Ok(set);
    }
    let cols = Columns::from_header(&header, &APPROACH_COLUMNS)?;
    cols.require(&APPROACH_COLUMNS)?;
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        let row = rec
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        let cell = |name: &str| {
            cols.cell(&rec, name)
                .ok_or_else(|| schema(row, format!("empty column '{name}'")))
        };
        let lanes_raw = cell("lanes")?;
        let lane_count: u32 = lanes_raw.parse().map_err(|_| {
            schema(
                row,
                format!("column 'lanes': '{lanes_raw}' is not a lane count"),
            )
        })?;
        let directionality: Directionality = cell("directionality")?
            .parse()
            .map_err(|e: String| schema(row, e))?;
        let approach = ApproachConfig {
            approach_id: cell("approach_id")?.to_string(),
            intersection_id: cell("intersection_id")?.to_string(),
            lane_count,
            directionality,
            width: parse_real(row, "width_m", cell("width_m")?)?,
            free_left: parse_flag(row, "free_left", cell("free_left")?)?,
            is_major: parse_flag(row, "is_major", cell("is_major")?)?,
        };
        approach.check(row)?;
        set.insert(approach)
            .map_err(|e| schema(row, e.to_string()))?;
    }
    Ok(set)
}

fn opt<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes records with the full cycle schema; reading the output back
/// with [`ingest_cycles`] reproduces the records.
pub fn write_cycles<T: Scalar, W: Write>(
    records: &[SignalCycleRecord<T>],
    sink: W,
) -> std::io::Result<()> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(cycle_columns())?;
    for r in records {
        let mut row = vec![
            r.approach_id().to_string(),
            r.cycle_length.to_string(),
            r.red_time.to_string(),
            r.green_time.to_string(),
        ];
        row.extend(r.counts.counts.iter().map(|(_, n)| n.to_string()));
        row.push(opt(r.effective_green));
        row.push(opt(r.exited_pcu));
        row.push(r.timestamp().map(|t| t.to_string()).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn write_approaches<T: Scalar, W: Write>(
    approaches: &ApproachSet<T>,
    sink: W,
) -> std::io::Result<()> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(APPROACH_COLUMNS)?;
    for a in approaches.iter() {
        w.write_record([
            a.approach_id.clone(),
            a.intersection_id.clone(),
            a.lane_count.to_string(),
            a.directionality.to_string(),
            a.width.to_string(),
            u8::from(a.free_left).to_string(),
            u8::from(a.is_major).to_string(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    const APPROACHES: &str =
        "approach_id,intersection_id,lanes,directionality,width_m,free_left,is_major\n\
        SR1,SSC,3,oneway,10.5,1,1\n\
        SR3,SSC,1,twoway,3.5,0,0\n";

    fn approaches() -> ApproachSet<f64> {
        ingest_approaches(APPROACHES.as_bytes()).unwrap()
    }

    const HEADER: &str =
        "approach_id,cycle_length_s,red_s,green_s,two_wheeler,auto_rickshaw,car,lcv,bus\n";

    #[test]
    fn parses_table_row() {
        let src = format!("{HEADER}SR1,152,120,32,23,10,12,4,2\n");
        let recs = ingest_cycles(src.as_bytes(), &approaches()).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(
            (r.cycle_length, r.red_time, r.green_time),
            (152.0, 120.0, 32.0)
        );
        assert_eq!(r.counts.counts.as_array(), [23, 10, 12, 4, 2]);
        assert_eq!(r.effective_green, None);
    }

    #[test]
    fn empty_stream_is_empty_list() {
        let recs = ingest_cycles::<f64, _>("".as_bytes(), &approaches()).unwrap();
        assert!(recs.is_empty());
        let recs = ingest_cycles::<f64, _>(HEADER.as_bytes(), &approaches()).unwrap();
        assert!(recs.is_empty());
    }

    #[test]
    fn red_plus_green_over_cycle_reports_row() {
        let src = format!("{HEADER}SR1,152,120,32,1,1,1,1,1\nSR1,152,140,30,1,1,1,1,1\n");
        let err = ingest_cycles(src.as_bytes(), &approaches()).unwrap_err();
        assert!(
            matches!(err, AnalysisError::InvariantViolation { row: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_approach_is_rejected() {
        let src = format!("{HEADER}TR9,119,94,25,1,1,1,1,1\n");
        let err = ingest_cycles(src.as_bytes(), &approaches()).unwrap_err();
        assert_eq!(
            err,
            AnalysisError::UnknownApproach {
                row: 2,
                approach: "TR9".into()
            }
        );
    }

    #[test]
    fn negative_count_is_schema_violation() {
        let src = format!("{HEADER}SR1,152,120,32,-1,1,1,1,1\n");
        let err = ingest_cycles(src.as_bytes(), &approaches()).unwrap_err();
        assert!(matches!(err, AnalysisError::SchemaViolation { row: 2, .. }));
    }

    #[test]
    fn missing_class_column_counts_zero() {
        let src = "approach_id,cycle_length_s,red_s,green_s,car\nSR1,152,120,32,7\n";
        let recs = ingest_cycles::<f64, _>(src.as_bytes(), &approaches()).unwrap();
        assert_eq!(recs[0].counts.counts.as_array(), [0, 0, 7, 0, 0]);
    }

    #[test]
    fn missing_required_column_is_header_error() {
        let src = "approach_id,cycle_length_s,green_s\nSR1,152,32\n";
        let err = ingest_cycles::<f64, _>(src.as_bytes(), &approaches()).unwrap_err();
        assert!(matches!(err, AnalysisError::SchemaViolation { row: 1, .. }));
    }

    #[test]
    fn unknown_column_is_rejected() {
        let src = "approach_id,cycle_length_s,red_s,green_s,trucks\nSR1,152,120,32,1\n";
        assert!(ingest_cycles::<f64, _>(src.as_bytes(), &approaches()).is_err());
    }

    #[test]
    fn ragged_row_is_schema_violation() {
        let src = format!("{HEADER}SR1,152,120\n");
        let err = ingest_cycles(src.as_bytes(), &approaches()).unwrap_err();
        assert!(matches!(err, AnalysisError::SchemaViolation { .. }));
    }

    #[test]
    fn optional_columns_are_read() {
        let src =
            "approach_id,cycle_length_s,red_s,green_s,bus,effective_green_s,exited_pcu,timestamp\n\
            SR1,152,120,32,2,24,48,1655118300\n";
        let r = &ingest_cycles::<f64, _>(src.as_bytes(), &approaches()).unwrap()[0];
        assert_eq!(r.effective_green, Some(24.0));
        assert_eq!(r.exited_pcu, Some(48.0));
        assert_eq!(r.timestamp(), Some(1_655_118_300));
    }

    #[test]
    fn validate_collects_every_bad_row() {
        let src = format!(
            "{HEADER}SR1,152,140,30,1,1,1,1,1\nSR1,152,120,32,1,1,1,1,1\nXX,152,120,32,1,1,1,1,1\nSR3,abc,1,1,1,1,1,1,1\n"
        );
        let (ok, errors) = validate_cycles(src.as_bytes(), Some(&approaches()));
        assert_eq!(ok, 1);
        let rows: Vec<_> = errors.iter().map(|e| e.row()).collect();
        assert_eq!(rows, vec![Some(2), Some(4), Some(5)]);
    }

    #[test]
    fn approach_file_parses_flags() {
        let set = approaches();
        let sr3 = set.get("SR3").unwrap();
        assert_eq!(sr3.directionality, Directionality::TwoWay);
        assert!(!sr3.is_major);
        assert!(set.get("SR1").unwrap().free_left);
    }

    #[test]
    fn approach_file_rejects_bad_flag_and_duplicates() {
        let bad = "approach_id,intersection_id,lanes,directionality,width_m,free_left,is_major\nSR1,SSC,3,oneway,10.5,yes,1\n";
        assert!(ingest_approaches::<f64, _>(bad.as_bytes()).is_err());
        let dup = format!("{APPROACHES}SR1,SSC,3,oneway,10.5,1,1\n");
        assert!(ingest_approaches::<f64, _>(dup.as_bytes()).is_err());
    }
}
