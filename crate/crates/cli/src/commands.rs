use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use signal_analysis::ingest::{
    ingest_approaches, ingest_cycles, ingest_cycles_unchecked, validate_cycles,
};
use signal_analysis::los::DelayPolicy;
use signal_analysis::pipeline::{analyze, pcu_per_record, Flag};
use signal_analysis::stats::{
    clock, five_number, pairwise_z_matrix, peak_window, window_cycle_lengths, DayFilter, DAY_END_S,
};
use signal_analysis::{Approaches, CycleRecord, Report};

use crate::args::Command;
use crate::emit::{fixed, flag01, opt_fixed, sci, Output, Table};
use crate::error::CliError;
use crate::manifest::RunManifest;

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn load_approaches(path: &Path) -> Result<Approaches, CliError> {
    ingest_approaches(open(path)?).map_err(CliError::in_file(path))
}

/// Approaches after the `--intersection` filter.
fn scoped_approaches(m: &RunManifest, all: &Approaches) -> Result<Approaches, CliError> {
    if m.intersections.is_empty() {
        return Ok(all.clone());
    }
    let scoped: Approaches = all
        .iter()
        .filter(|a| m.intersections.contains(&a.intersection_id))
        .cloned()
        .collect();
    if scoped.is_empty() {
        return Err(CliError::NoData(format!(
            "no approaches in intersection(s) {}",
            m.intersections.join(", ")
        )));
    }
    Ok(scoped)
}

/// Records and approaches in scope for the run.
fn load_scoped(m: &RunManifest) -> Result<(Vec<CycleRecord>, Approaches), CliError> {
    let path = m
        .approaches
        .as_deref()
        .ok_or(CliError::MissingArgument(m.command.name(), "approaches"))?;
    let all = load_approaches(path)?;
    let scoped = scoped_approaches(m, &all)?;
    let records: Vec<CycleRecord> = ingest_cycles(open(&m.cycles)?, &all)
        .map_err(CliError::in_file(&m.cycles))?
        .into_iter()
        .filter(|r| scoped.contains(r.approach_id()))
        .collect();
    if records.is_empty() {
        return Err(CliError::NoData(
            "no cycle records for the selected approaches".into(),
        ));
    }
    Ok((records, scoped))
}

pub fn run_command(m: &RunManifest) -> Result<(Output, Option<CliError>), CliError> {
    match m.command {
        Command::Validate => validate(m),
        Command::PeakHours => peak_hours(m).map(|o| (o, None)),
        Command::Variability => variability(m).map(|o| (o, None)),
        _ => pipeline(m).map(|o| (o, None)),
    }
}

fn validate(m: &RunManifest) -> Result<(Output, Option<CliError>), CliError> {
    let approaches = m.approaches.as_deref().map(load_approaches).transpose()?;
    let (ok, errors) = validate_cycles::<f64, _>(open(&m.cycles)?, approaches.as_ref());
    let mut t = Table::new("validation", "validation.v1", &["row", "code", "message"]);
    for e in &errors {
        t.push(vec![
            e.row().map(|r| r.to_string()).unwrap_or_default(),
            e.code().to_string(),
            e.to_string(),
        ]);
    }
    let summary = vec![format!(
        "{}: {ok} valid rows, {} problems{}",
        m.cycles.display(),
        errors.len(),
        if approaches.is_some() {
            ""
        } else {
            " (approach ids not checked)"
        }
    )];
    let failure = (!errors.is_empty()).then(|| CliError::Validation {
        invalid: errors.len(),
        total: ok + errors.len(),
    });
    Ok((
        Output {
            summary,
            tables: vec![t],
            flags: Vec::new(),
        },
        failure,
    ))
}

fn day_name(d: DayFilter) -> &'static str {
    match d {
        DayFilter::Weekday => "weekday",
        DayFilter::Saturday => "saturday",
        DayFilter::Sunday => "sunday",
        DayFilter::All => "all",
    }
}

fn peak_hours(m: &RunManifest) -> Result<Output, CliError> {
    let records = match &m.approaches {
        Some(_) => load_scoped(m)?.0,
        None if !m.intersections.is_empty() => {
            return Err(CliError::MissingArgument(
                "peak-hours --intersection",
                "approaches",
            ))
        }
        None => ingest_cycles_unchecked(open(&m.cycles)?).map_err(CliError::in_file(&m.cycles))?,
    };
    if records.is_empty() {
        return Err(CliError::NoData("no cycle records".into()));
    }
    let p = &m.config.peak;
    let windows =
        window_cycle_lengths(&records, p.window_s, p.days).map_err(CliError::in_file(&m.cycles))?;
    let peak = peak_window(&windows, p.span)?;
    let end = |start: i64, len: i64| clock((start + len).min(DAY_END_S));

    let mut wt = Table::new(
        "windows",
        "windows.v1",
        &[
            "window_start",
            "window_end",
            "mean_cycle_s",
            "samples",
            "in_peak",
        ],
    );
    for (i, w) in windows.iter().enumerate() {
        wt.push(vec![
            clock(w.window_start),
            end(w.window_start, w.window_length),
            opt_fixed(w.mean_cycle_length, 2),
            w.sample_count.to_string(),
            flag01((peak.first..=peak.last).contains(&i)),
        ]);
    }
    let run = &windows[peak.first..=peak.last];
    let run_mean = run.iter().filter_map(|w| w.mean_cycle_length).sum::<f64>() / run.len() as f64;
    let mut pt = Table::new(
        "peak",
        "peak.v1",
        &["days", "window_s", "span", "start", "end", "mean_cycle_s"],
    );
    pt.push(vec![
        day_name(p.days).into(),
        p.window_s.to_string(),
        p.span.to_string(),
        clock(peak.start),
        end(peak.start, peak.end - peak.start),
        fixed(run_mean, 2),
    ]);
    Ok(Output {
        summary: vec![format!(
            "peak window {} (days: {}, {} x {} s windows, mean cycle {} s)",
            peak.label(),
            day_name(p.days),
            p.span,
            p.window_s,
            fixed(run_mean, 2)
        )],
        tables: vec![wt, pt],
        flags: Vec::new(),
    })
}

fn variability(m: &RunManifest) -> Result<Output, CliError> {
    let (records, approaches) = load_scoped(m)?;
    let mut pv = Table::new(
        "pvalues",
        "pvalues.v1",
        &[
            "intersection",
            "row",
            "col",
            "mean_row",
            "mean_col",
            "z",
            "p_value",
        ],
    );
    let mut bx = Table::new(
        "boxplot",
        "boxplot.v1",
        &[
            "intersection",
            "approach_id",
            "n",
            "min",
            "q1",
            "median",
            "q3",
            "max",
        ],
    );
    let mut flags = Vec::new();
    let mut summary = Vec::new();
    for id in approaches.intersections() {
        let refs: Vec<&CycleRecord> = records
            .iter()
            .filter(|r| {
                approaches
                    .get(r.approach_id())
                    .is_some_and(|a| a.intersection_id == id)
            })
            .collect();
        if refs.is_empty() {
            continue;
        }
        let pcu = pcu_per_record(&refs, &m.config)?;
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (r, p) in refs.iter().zip(pcu) {
            groups
                .entry(r.approach_id().to_string())
                .or_default()
                .push(p);
        }
        for (a, xs) in &groups {
            let s = five_number(xs)?;
            bx.push(vec![
                id.clone(),
                a.clone(),
                xs.len().to_string(),
                fixed(s.min, 2),
                fixed(s.q1, 2),
                fixed(s.median, 2),
                fixed(s.q3, 2),
                fixed(s.max, 2),
            ]);
        }
        if groups.len() < 2 {
            flags.push(Flag {
                code: "variability-skipped",
                subject: id.clone(),
                message: "fewer than two approaches with data; no pairwise tests".into(),
            });
            continue;
        }
        let matrix = pairwise_z_matrix(&groups)?;
        let significant = matrix
            .entries
            .iter()
            .filter(|e| e.result.p_value < 1e-4)
            .count();
        for e in &matrix.entries {
            pv.push(vec![
                id.clone(),
                e.row.clone(),
                e.col.clone(),
                fixed(e.result.mean_a, 2),
                fixed(e.result.mean_b, 2),
                fixed(e.result.z_statistic, 4),
                sci(e.result.p_value),
            ]);
        }
        summary.push(format!(
            "{id}: {significant} of {} approach pairs differ at p < 0.0001",
            matrix.entries.len()
        ));
    }
    Ok(Output {
        summary,
        tables: vec![pv, bx],
        flags,
    })
}

fn grade<T>(r: &Option<signal_analysis::los::LosResult<T>>) -> String {
    r.as_ref().map(|l| l.grade.to_string()).unwrap_or_default()
}

fn flow_tables(report: &Report) -> [Table; 2] {
    let mut flow = Table::new(
        "flow",
        "flow.v1",
        &[
            "intersection",
            "approach_id",
            "lanes",
            "directionality",
            "capacity_pcu_h",
            "volume_pcu_h",
            "vc_ratio",
            "los_vc",
        ],
    );
    let mut sat = Table::new(
        "saturation",
        "saturation.v1",
        &[
            "intersection",
            "approach_id",
            "width_m",
            "effective_green_s",
            "exited_pcu",
            "sf1_pcu_h",
            "sf2_pcu_h",
            "sf_difference_pcu_h",
        ],
    );
    for a in report.approaches() {
        let c = &a.config;
        flow.push(vec![
            c.intersection_id.clone(),
            c.approach_id.clone(),
            c.lane_count.to_string(),
            c.directionality.to_string(),
            fixed(a.flow.capacity, 0),
            fixed(a.flow.hourly_volume, 0),
            fixed(a.flow.vc_ratio, 2),
            a.los_vc.grade.to_string(),
        ]);
        sat.push(vec![
            c.intersection_id.clone(),
            c.approach_id.clone(),
            fixed(c.width, 1),
            opt_fixed(a.aggregate.effective_green, 2),
            opt_fixed(a.aggregate.exited_pcu, 2),
            opt_fixed(a.flow.sf_discharge, 0),
            fixed(a.flow.sf_width, 0),
            opt_fixed(a.flow.sf_difference, 0),
        ]);
    }
    [flow, sat]
}

fn delay_table(report: &Report) -> Table {
    let mut t = Table::new(
        "delay_los",
        "delay_los.v1",
        &[
            "intersection",
            "approach_id",
            "major",
            "cycle_s",
            "green_s",
            "vc_ratio",
            "platoon_ratio",
            "delay_s",
            "clamped",
            "los_heterogeneous",
            "los_hcm",
            "los_vc",
        ],
    );
    for a in report.approaches() {
        t.push(vec![
            a.config.intersection_id.clone(),
            a.config.approach_id.clone(),
            flag01(a.config.is_major),
            fixed(a.aggregate.cycle_length, 2),
            fixed(a.aggregate.green_time, 2),
            fixed(a.flow.vc_ratio, 4),
            opt_fixed(a.platoon_ratio, 4),
            opt_fixed(a.delay.map(|d| d.seconds), 2),
            a.delay.map(|d| flag01(d.clamped)).unwrap_or_default(),
            grade(&a.los_heterogeneous),
            grade(&a.los_hcm),
            a.los_vc.grade.to_string(),
        ]);
    }
    t
}

fn los_table(report: &Report) -> Table {
    let mut t = Table::new(
        "los",
        "los.v1",
        &[
            "intersection",
            "policy",
            "delay_all_s",
            "delay_major_s",
            "delay_s",
            "los_heterogeneous",
            "los_hcm",
            "vc_grade_best",
            "vc_grade_worst",
        ],
    );
    for i in &report.intersections {
        t.push(vec![
            i.intersection_id.clone(),
            i.policy.to_string(),
            opt_fixed(i.delay_all, 2),
            opt_fixed(i.delay_major, 2),
            opt_fixed(i.policy_delay(), 2),
            grade(&i.los_heterogeneous),
            grade(&i.los_hcm),
            i.vc_grade_range.0.to_string(),
            i.vc_grade_range.1.to_string(),
        ]);
    }
    t
}

fn green_tables(report: &Report) -> [Table; 2] {
    let mut green = Table::new(
        "green",
        "green.v1",
        &[
            "intersection",
            "approach_id",
            "major",
            "green_s",
            "green_share_pct",
            "pcu_per_cycle",
            "green_per_pcu_s",
            "effective_green_s",
            "wastage_pct",
        ],
    );
    let mut series = Table::new(
        "green_series",
        "green_series.v1",
        &["intersection", "approach_id", "green_s", "pcu_per_cycle"],
    );
    for a in report.approaches() {
        let u = &a.green.utilization;
        green.push(vec![
            a.config.intersection_id.clone(),
            a.config.approach_id.clone(),
            flag01(a.config.is_major),
            fixed(u.green_time, 2),
            fixed(a.green.green_share * 100.0, 2),
            fixed(u.pcu_per_cycle, 2),
            opt_fixed(u.green_to_pcu_ratio, 2),
            opt_fixed(a.aggregate.effective_green, 2),
            opt_fixed(u.wastage.map(|w| w * 100.0), 2),
        ]);
        series.push(vec![
            a.config.intersection_id.clone(),
            a.config.approach_id.clone(),
            fixed(u.green_time, 4),
            fixed(u.pcu_per_cycle, 4),
        ]);
    }
    [green, series]
}

fn emissions_table(report: &Report) -> Table {
    let mut t = Table::new(
        "emissions",
        "emissions.v1",
        &["scope", "quantity", "fuel", "value", "unit"],
    );
    for i in &report.intersections {
        let Some(e) = &i.emissions else { continue };
        for (f, q) in &e.fuel_per_hour {
            t.push(vec![
                i.intersection_id.clone(),
                "fuel".into(),
                f.to_string(),
                fixed(*q, 2),
                format!("{}/h", f.unit()),
            ]);
        }
        for (f, q) in &e.co2_per_hour {
            t.push(vec![
                i.intersection_id.clone(),
                "co2".into(),
                f.to_string(),
                fixed(*q, 2),
                "kg/h".into(),
            ]);
        }
        t.push(vec![
            i.intersection_id.clone(),
            "co2".into(),
            "total".into(),
            fixed(e.total_co2_per_hour, 2),
            "kg/h".into(),
        ]);
    }
    if let Some(c) = &report.city {
        for (q, v, unit) in [
            ("co2_study", c.study_kg_per_hour, "kg/h"),
            ("co2_city", c.city_kg_per_hour, "kg/h"),
            ("co2_city_day", c.tons_per_day, "t/day"),
        ] {
            t.push(vec![
                "city".into(),
                q.into(),
                "total".into(),
                fixed(v, 2),
                unit.into(),
            ]);
        }
    }
    t
}

fn flags_table(flags: &[Flag]) -> Table {
    let mut t = Table::new("flags", "flags.v1", &["code", "subject", "message"]);
    for f in flags {
        t.push(vec![
            f.code.to_string(),
            f.subject.clone(),
            f.message.clone(),
        ]);
    }
    t
}

fn intersection_summary(report: &Report) -> Vec<String> {
    report
        .intersections
        .iter()
        .map(|i| {
            let policy = match i.policy {
                DelayPolicy::AllApproaches => "all approaches",
                DelayPolicy::MajorOnly => "major approaches",
            };
            let delay = match i.policy_delay() {
                Some(d) => format!(
                    "mean delay {} s over {policy}, LoS {} (heterogeneous) / {} (HCM)",
                    fixed(d, 2),
                    grade(&i.los_heterogeneous),
                    grade(&i.los_hcm)
                ),
                None => format!("no delay over {policy}"),
            };
            format!(
                "{}: {delay}; approach V/C grades {} to {}; major green share {}%",
                i.intersection_id,
                i.vc_grade_range.0,
                i.vc_grade_range.1,
                fixed(i.major_green_share * 100.0, 2)
            )
        })
        .collect()
}

fn pipeline(m: &RunManifest) -> Result<Output, CliError> {
    let (records, approaches) = load_scoped(m)?;
    let report = analyze(&records, &approaches, &m.config, m.policy)?;
    let flags: Vec<Flag> = report.all_flags().cloned().collect();

    let mut tables = Vec::new();
    let mut summary = intersection_summary(&report);
    let with = |c: Command| m.command == c || m.command == Command::Report;
    if with(Command::Flow) {
        tables.extend(flow_tables(&report));
    }
    if with(Command::Delay) {
        tables.push(delay_table(&report));
    }
    if with(Command::Los) {
        tables.push(los_table(&report));
    }
    if with(Command::Green) {
        tables.extend(green_tables(&report));
    }
    if with(Command::Emissions) {
        tables.push(emissions_table(&report));
        if let Some(c) = &report.city {
            summary.push(format!(
                "city: {} kg/h CO2 while idling, {} t/day{}",
                fixed(c.city_kg_per_hour, 2),
                fixed(c.tons_per_day, 2),
                if c.estimated { " (estimated)" } else { "" }
            ));
        }
    }
    tables.push(flags_table(&flags));
    Ok(Output {
        summary,
        tables,
        flags,
    })
}
