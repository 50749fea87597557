//! End-to-end analysis of cycle records: per-approach aggregation followed
//! by flow, green, delay, level-of-service and emission measures, grouped
//! by intersection.

use std::collections::BTreeMap;

use crate::config::{AnalysisConfig, Reference};
use crate::delay::{control_delay, ControlDelay, DelayInputs};
use crate::emissions::{
    co2_from_fuel, idle_fuel, scale_emissions, CityEmissions, CityRate, EmissionReport,
};
use crate::error::{AnalysisError, Result};
use crate::flow::{
    combined_share, flow_report, green_splits, green_utilization, FlowReport, GreenReport,
};
use crate::los::{classify_los, intersection_delay, DelayPolicy, Grade, LosResult};
use crate::model::{
    ApproachConfig, ApproachSet, ClassCounts, ClassValues, SignalCycleRecord, VehicleClass,
};
use crate::pcu::{shares_of, to_pcu};
use crate::scalar::{count, lit, mean, Scalar};

/// Something in the results a reader should look at: a model caveat, a
/// missing input, or a disagreement with a configured reference figure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flag {
    pub code: &'static str,
    pub subject: String,
    pub message: String,
}

impl Flag {
    fn new(code: &'static str, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            subject: subject.into(),
            message: message.into(),
        }
    }
}

/// Per-cycle means for one approach.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachAggregate<T> {
    pub cycles: usize,
    pub cycle_length: T,
    pub red_time: T,
    pub green_time: T,
    /// Present only when every cycle recorded it.
    pub effective_green: Option<T>,
    pub exited_pcu: Option<T>,
    /// Mean count per cycle by class, in the units of the input.
    pub class_per_cycle: ClassValues<T>,
    pub pcu_per_cycle: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproachReport<T> {
    pub config: ApproachConfig<T>,
    pub aggregate: ApproachAggregate<T>,
    /// Share of each class in this approach's counts.
    pub composition: Option<ClassValues<T>>,
    pub flow: FlowReport<T>,
    pub green: GreenReport<T>,
    pub platoon_ratio: Option<T>,
    pub delay: Option<ControlDelay<T>>,
    pub los_heterogeneous: Option<LosResult<T>>,
    pub los_hcm: Option<LosResult<T>>,
    pub los_vc: LosResult<T>,
}

impl<T> ApproachReport<T> {
    pub fn approach_id(&self) -> &str {
        &self.config.approach_id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionReport<T> {
    pub intersection_id: String,
    pub approaches: Vec<ApproachReport<T>>,
    pub green_splits: BTreeMap<String, T>,
    /// Combined green share of the major approaches.
    pub major_green_share: T,
    pub delay_all: Option<T>,
    pub delay_major: Option<T>,
    pub policy: DelayPolicy,
    pub los_heterogeneous: Option<LosResult<T>>,
    pub los_hcm: Option<LosResult<T>>,
    /// Best and worst approach V/C grade.
    pub vc_grade_range: (Grade, Grade),
    /// Hourly flow by class summed over approaches.
    pub hourly_by_class: ClassValues<T>,
    pub emissions: Option<EmissionReport<T>>,
    pub flags: Vec<Flag>,
}

impl<T: Scalar> IntersectionReport<T> {
    pub fn policy_delay(&self) -> Option<T> {
        match self.policy {
            DelayPolicy::AllApproaches => self.delay_all,
            DelayPolicy::MajorOnly => self.delay_major,
        }
    }

    pub fn approach(&self, id: &str) -> Option<&ApproachReport<T>> {
        self.approaches.iter().find(|a| a.approach_id() == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport<T> {
    pub intersections: Vec<IntersectionReport<T>>,
    pub city: Option<CityEmissions<T>>,
    pub flags: Vec<Flag>,
}

impl<T: Scalar> AnalysisReport<T> {
    pub fn intersection(&self, id: &str) -> Option<&IntersectionReport<T>> {
        self.intersections.iter().find(|i| i.intersection_id == id)
    }

    pub fn approaches(&self) -> impl Iterator<Item = &ApproachReport<T>> {
        self.intersections.iter().flat_map(|i| i.approaches.iter())
    }

    /// All flags, intersection flags first.
    pub fn all_flags(&self) -> impl Iterator<Item = &Flag> {
        self.intersections
            .iter()
            .flat_map(|i| i.flags.iter())
            .chain(self.flags.iter())
    }
}

/// Per-cycle PCU for each record, selecting factors by the composition of
/// all records passed in.
pub fn pcu_per_record<T: Scalar>(
    records: &[&SignalCycleRecord<T>],
    config: &AnalysisConfig<T>,
) -> Result<Vec<T>> {
    if config.counts_in_pcu {
        return Ok(records
            .iter()
            .map(|r| count::<T>(r.counts.counts.total()))
            .collect());
    }
    let total = records
        .iter()
        .fold(ClassCounts::default(), |acc, r| acc + r.counts.counts);
    let shares = match shares_of::<T>(&total) {
        Ok(s) => s,
        Err(AnalysisError::EmptyTraffic) => ClassValues::default(),
        Err(e) => return Err(e),
    };
    Ok(records
        .iter()
        .map(|r| to_pcu(&r.counts.counts, &shares, &config.pcu_factors))
        .collect())
}

fn mean_opt<T: Scalar>(values: impl Iterator<Item = Option<T>>) -> Option<T> {
    let collected: Option<Vec<T>> = values.collect();
    collected.and_then(|v| mean(&v))
}

pub fn aggregate_approach<T: Scalar>(
    records: &[&SignalCycleRecord<T>],
    pcu: &[T],
) -> Result<ApproachAggregate<T>> {
    let n = records.len();
    if n == 0 {
        return Err(AnalysisError::EmptyInput);
    }
    let field = |f: fn(&SignalCycleRecord<T>) -> T| {
        mean(&records.iter().map(|r| f(r)).collect::<Vec<_>>()).expect("non-empty")
    };
    let nf = count::<T>(n as u64);
    let class_per_cycle = ClassValues::from_fn(|c| {
        records
            .iter()
            .fold(T::zero(), |a, r| a + count::<T>(r.counts.counts[c]))
            / nf
    });
    Ok(ApproachAggregate {
        cycles: n,
        cycle_length: field(|r| r.cycle_length),
        red_time: field(|r| r.red_time),
        green_time: field(|r| r.green_time),
        effective_green: mean_opt(records.iter().map(|r| r.effective_green)),
        exited_pcu: mean_opt(records.iter().map(|r| r.exited_pcu)),
        class_per_cycle,
        pcu_per_cycle: mean(pcu).expect("non-empty"),
    })
}

fn analyze_approach<T: Scalar>(
    approach: &ApproachConfig<T>,
    records: &[&SignalCycleRecord<T>],
    pcu: &[T],
    green_share: T,
    config: &AnalysisConfig<T>,
    flags: &mut Vec<Flag>,
) -> Result<ApproachReport<T>> {
    let id = approach.approach_id.as_str();
    let agg = aggregate_approach(records, pcu)?;
    let discharge = agg
        .effective_green
        .zip(agg.exited_pcu)
        .map(|(ge, n)| (n, ge));
    if discharge.is_none() && records.iter().any(|r| r.effective_green.is_some()) {
        flags.push(Flag::new(
            "partial-discharge-data",
            id,
            "effective green or exited PCU missing on some cycles; discharge-based values omitted",
        ));
    }
    let flow = flow_report(
        approach,
        agg.pcu_per_cycle,
        agg.cycle_length,
        discharge,
        &config.capacity,
    )?;

    let mut mean_record = (*records[0]).clone();
    mean_record.cycle_length = agg.cycle_length;
    mean_record.red_time = agg.red_time;
    mean_record.green_time = agg.green_time;
    mean_record.effective_green = agg.effective_green;
    let utilization = green_utilization(&mean_record, agg.pcu_per_cycle)?;

    let total: u64 = records.iter().map(|r| r.counts.counts.total()).sum();
    let composition = if total > 0 {
        let summed = records
            .iter()
            .fold(ClassCounts::default(), |acc, r| acc + r.counts.counts);
        Some(shares_of(&summed)?)
    } else {
        None
    };

    let platoon_ratio = config
        .delay
        .platoon
        .get(id)
        .map(|p| p.ratio())
        .transpose()?;
    let delay = match platoon_ratio {
        Some(rp) => {
            let inputs = DelayInputs::new(agg.cycle_length, agg.green_time, flow.vc_ratio, rp)?;
            let d = control_delay(&inputs)?;
            if d.clamped {
                flags.push(Flag::new(
                    "delay-clamped",
                    id,
                    format!(
                        "model delay {:.2} s was negative and is reported as 0",
                        d.raw
                    ),
                ));
            }
            Some(d)
        }
        None => {
            flags.push(Flag::new(
                "missing-platoon-ratio",
                id,
                "no platoon ratio configured; control delay not computed",
            ));
            None
        }
    };
    let grade = |table| delay.map(|d| classify_los(d.seconds, table)).transpose();
    Ok(ApproachReport {
        config: approach.clone(),
        composition,
        los_heterogeneous: grade(&config.los.heterogeneous_delay)?,
        los_hcm: grade(&config.los.hcm_delay)?,
        los_vc: classify_los(flow.vc_ratio, &config.los.vc_ratio)?,
        flow,
        green: GreenReport {
            green_share,
            utilization,
        },
        platoon_ratio,
        delay,
        aggregate: agg,
    })
}

fn analyze_intersection<T: Scalar>(
    intersection_id: &str,
    records: &[SignalCycleRecord<T>],
    approaches: &ApproachSet<T>,
    config: &AnalysisConfig<T>,
    policy: DelayPolicy,
) -> Result<Option<IntersectionReport<T>>> {
    let mut by_approach: BTreeMap<String, Vec<&SignalCycleRecord<T>>> = BTreeMap::new();
    for r in records {
        if approaches
            .get(r.approach_id())
            .is_some_and(|a| a.intersection_id == intersection_id)
        {
            by_approach
                .entry(r.approach_id().to_string())
                .or_default()
                .push(r);
        }
    }
    if by_approach.is_empty() {
        return Ok(None);
    }
    let mut flags = Vec::new();
    for a in approaches.in_intersection(intersection_id) {
        if !by_approach.contains_key(&a.approach_id) {
            flags.push(Flag::new(
                "approach-without-data",
                &a.approach_id,
                "no cycle records",
            ));
        }
    }

    let all: Vec<&SignalCycleRecord<T>> = by_approach.values().flatten().copied().collect();
    let pcu_all = pcu_per_record(&all, config)?;
    let mut pcu_by_approach: BTreeMap<&str, Vec<T>> = BTreeMap::new();
    for (r, p) in all.iter().zip(pcu_all) {
        pcu_by_approach.entry(r.approach_id()).or_default().push(p);
    }

    let greens: BTreeMap<String, Vec<T>> = by_approach
        .iter()
        .map(|(id, rs)| (id.clone(), rs.iter().map(|r| r.green_time).collect()))
        .collect();
    let splits = green_splits(&greens, intersection_id)?;

    let mut reports = Vec::with_capacity(by_approach.len());
    for (id, rs) in &by_approach {
        let approach = approaches.get(id).expect("filtered on known approaches");
        reports.push(analyze_approach(
            approach,
            rs,
            &pcu_by_approach[id.as_str()],
            splits[id],
            config,
            &mut flags,
        )?);
    }

    let delays: BTreeMap<String, T> = reports
        .iter()
        .filter_map(|r| r.delay.map(|d| (r.approach_id().to_string(), d.seconds)))
        .collect();
    let averaged = |p| match intersection_delay(&delays, p, approaches) {
        Ok(d) => Ok(Some(d)),
        Err(AnalysisError::EmptyInput | AnalysisError::NoMajorApproaches) => Ok(None),
        Err(e) => Err(e),
    };
    let delay_all = averaged(DelayPolicy::AllApproaches)?;
    let delay_major = averaged(DelayPolicy::MajorOnly)?;
    let policy_delay = match policy {
        DelayPolicy::AllApproaches => delay_all,
        DelayPolicy::MajorOnly => delay_major,
    };
    let grade_at = |d: Option<T>, table| d.map(|d| classify_los(d, table)).transpose();
    let los_heterogeneous = grade_at(policy_delay, &config.los.heterogeneous_delay)?;
    let los_hcm = grade_at(policy_delay, &config.los.hcm_delay)?;

    if let (Some(a), Some(m)) = (delay_all, delay_major) {
        for table in [&config.los.heterogeneous_delay, &config.los.hcm_delay] {
            let (ga, gm) = (classify_los(a, table)?.grade, classify_los(m, table)?.grade);
            if ga != gm {
                flags.push(Flag::new(
                    "delay-policy-grade",
                    intersection_id,
                    format!(
                        "{}: all-approach mean {:.2} s grades {ga}, major-only mean {:.2} s grades {gm}",
                        table.standard, a, m
                    ),
                ));
            }
        }
    }

    let vc_grades: Vec<Grade> = reports.iter().map(|r| r.los_vc.grade).collect();
    let vc_grade_range = (
        *vc_grades.iter().min().expect("non-empty"),
        *vc_grades.iter().max().expect("non-empty"),
    );
    if vc_grade_range.0 != vc_grade_range.1 {
        flags.push(Flag::new(
            "vc-grade-spread",
            intersection_id,
            format!(
                "approach V/C grades range {}..{}; no single intersection V/C grade is assigned",
                vc_grade_range.0, vc_grade_range.1
            ),
        ));
    }

    let hourly_by_class = reports.iter().fold(ClassValues::default(), |mut acc, r| {
        let scale = lit::<T>(3600.0) / r.aggregate.cycle_length;
        for c in VehicleClass::ALL {
            acc[c] = acc[c] + r.aggregate.class_per_cycle[c] * scale;
        }
        acc
    });

    let emissions = match policy_delay {
        Some(d) if !config.emissions.idle_rates.is_empty() => {
            let fuel = idle_fuel(&hourly_by_class, d, &config.emissions.idle_rates)?;
            Some(co2_from_fuel(&fuel, &config.emissions.factors)?)
        }
        _ => None,
    };

    let majors: Vec<&str> = reports
        .iter()
        .filter(|r| r.config.is_major)
        .map(|r| r.approach_id())
        .collect();
    let report = IntersectionReport {
        intersection_id: intersection_id.to_string(),
        major_green_share: combined_share(&splits, &majors),
        green_splits: splits,
        approaches: reports,
        delay_all,
        delay_major,
        policy,
        los_heterogeneous,
        los_hcm,
        vc_grade_range,
        hourly_by_class,
        emissions,
        flags,
    };
    Ok(Some(report))
}

fn check_reference<T: Scalar>(
    reference: &Reference<T>,
    report: &AnalysisReport<T>,
) -> Option<Flag> {
    let missing = |id: &str| {
        Some(Flag::new(
            "reference-unresolved",
            id,
            "reference names an intersection with no data",
        ))
    };
    match reference {
        Reference::GreenShare {
            intersection,
            approaches,
            value,
            tolerance,
        } => {
            let Some(i) = report.intersection(intersection) else {
                return missing(intersection);
            };
            let got = combined_share(&i.green_splits, approaches);
            ((got - *value).abs() > *tolerance).then(|| {
                Flag::new(
                    "reference-mismatch",
                    intersection.as_str(),
                    format!(
                        "green share of {} is {:.2}% from the data, reference states {:.2}%",
                        approaches.join("+"),
                        got * lit(100.0),
                        *value * lit(100.0)
                    ),
                )
            })
        }
        Reference::VcGrade {
            intersection,
            grade,
        } => {
            let Some(i) = report.intersection(intersection) else {
                return missing(intersection);
            };
            let (lo, hi) = i.vc_grade_range;
            (lo != *grade || hi != *grade).then(|| {
                let per: Vec<String> = i
                    .approaches
                    .iter()
                    .map(|a| format!("{}={}", a.approach_id(), a.los_vc.grade))
                    .collect();
                Flag::new(
                    "reference-mismatch",
                    intersection.as_str(),
                    format!(
                        "reference states V/C grade {grade} for the intersection; approach grades are {}",
                        per.join(" ")
                    ),
                )
            })
        }
        Reference::IntersectionDelay {
            intersection,
            policy,
            seconds,
            tolerance,
        } => {
            let Some(i) = report.intersection(intersection) else {
                return missing(intersection);
            };
            let got = match policy {
                DelayPolicy::AllApproaches => i.delay_all,
                DelayPolicy::MajorOnly => i.delay_major,
            };
            match got {
                None => Some(Flag::new(
                    "reference-unresolved",
                    intersection.as_str(),
                    format!("no {policy} delay available to compare with reference {seconds} s"),
                )),
                Some(d) if (d - *seconds).abs() > *tolerance => {
                    let other = match policy {
                        DelayPolicy::AllApproaches => ("major", i.delay_major),
                        DelayPolicy::MajorOnly => ("all", i.delay_all),
                    };
                    let hint = other
                        .1
                        .map(|o| format!("; {}-approach mean is {:.2} s", other.0, o))
                        .unwrap_or_default();
                    Some(Flag::new(
                        "reference-mismatch",
                        intersection.as_str(),
                        format!(
                            "{policy}-approach mean delay is {:.2} s, reference states {} s{hint}",
                            d, seconds
                        ),
                    ))
                }
                Some(_) => None,
            }
        }
    }
}

/// Runs the whole analysis. `policy` overrides the configured delay policy.
pub fn analyze<T: Scalar>(
    records: &[SignalCycleRecord<T>],
    approaches: &ApproachSet<T>,
    config: &AnalysisConfig<T>,
    policy: Option<DelayPolicy>,
) -> Result<AnalysisReport<T>> {
    let policy = policy.unwrap_or(config.delay.policy);
    let mut intersections = Vec::new();
    for id in approaches.intersections() {
        if let Some(r) = analyze_intersection(&id, records, approaches, config, policy)? {
            intersections.push(r);
        }
    }
    if intersections.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }

    let totals: Vec<T> = intersections
        .iter()
        .filter_map(|i| i.emissions.as_ref().map(|e| e.total_co2_per_hour))
        .collect();
    let mut flags = Vec::new();
    let city = if totals.is_empty() {
        None
    } else {
        let mode = config
            .emissions
            .city
            .unwrap_or(CityRate::MeanTimesCount(totals.len() as u32));
        let c = scale_emissions(&totals, mode, config.emissions.active_hours_per_day)?;
        if c.estimated {
            flags.push(Flag::new(
                "city-rate-estimated",
                "city",
                format!(
                    "city rate {:.2} kg/h is an extrapolation; study intersections total {:.2} kg/h",
                    c.city_kg_per_hour, c.study_kg_per_hour
                ),
            ));
        }
        Some(c)
    };

    let mut report = AnalysisReport {
        intersections,
        city,
        flags,
    };
    let ref_flags: Vec<Flag> = config
        .references
        .iter()
        .filter_map(|r| check_reference(r, &report))
        .collect();
    report.flags.extend(ref_flags);
    Ok(report)
}
