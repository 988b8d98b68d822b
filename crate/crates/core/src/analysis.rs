//! Quota-violation detection and the analytic three-state criteria.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::apportion::{huntington_hill, standard_quotas, Apportionment, PopulationVector, QuotaVector};
use crate::error::{Error, Result};
use crate::scalar::{Arithmetic, Field, Population, FLOAT_REL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum QuotaClass {
    Lower,
    None,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub quota: f64,
    pub lower_bound: u64,
    pub upper_bound: u64,
    pub seats: u64,
    pub class: QuotaClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub per_state: Vec<StateReport>,
    pub has_lower: bool,
    pub has_upper: bool,
}

impl ViolationReport {
    /// Classifies each state's seats against the floor and ceiling of its quota.
    pub fn classify<Q: Field>(quotas: &QuotaVector<Q>, app: &Apportionment) -> Self {
        let per_state: Vec<StateReport> = quotas
            .quotas()
            .iter()
            .zip(app.seats())
            .map(|(q, &seats)| {
                let lower_bound = q.floor_u64();
                let upper_bound = q.ceil_u64();
                let class = if seats < lower_bound {
                    QuotaClass::Lower
                } else if seats > upper_bound {
                    QuotaClass::Upper
                } else {
                    QuotaClass::None
                };
                StateReport {
                    quota: q.to_f64(),
                    lower_bound,
                    upper_bound,
                    seats,
                    class,
                }
            })
            .collect();
        let has_lower = per_state.iter().any(|s| s.class == QuotaClass::Lower);
        let has_upper = per_state.iter().any(|s| s.class == QuotaClass::Upper);
        Self {
            per_state,
            has_lower,
            has_upper,
        }
    }

    pub fn seats(&self) -> Apportionment {
        Apportionment::new(self.per_state.iter().map(|s| s.seats).collect())
    }

    pub fn states_with(&self, class: QuotaClass) -> Vec<usize> {
        self.per_state
            .iter()
            .enumerate()
            .filter(|(_, s)| s.class == class)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Runs Huntington-Hill and classifies the result against the standard quotas.
pub fn detect_violations<P: Population>(
    pops: &PopulationVector<P>,
    seats: u64,
) -> Result<ViolationReport> {
    let quotas = standard_quotas(pops, seats)?;
    let app = huntington_hill(pops, seats)?;
    Ok(ViolationReport::classify(&quotas, &app))
}

/// Outcome of the three-state violation criteria, with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub holds: bool,
    /// Input indices in ascending quota order; the last is the largest state.
    pub order: [usize; 3],
    pub criteria: [bool; 3],
    /// `q_s² ⌊q_3⌋(⌊q_3⌋ − 1) − q_3² ⌊q_s⌋⌈q_s⌉` for the two smaller states.
    /// `None` when the criterion was not evaluated.
    pub margins: [Option<f64>; 2],
    pub floor_sum: u64,
    pub seats: u64,
    /// The largest quota has a floor below 2, so no violation is possible.
    pub guarded: bool,
    /// A float margin fell within the relative comparison tolerance.
    pub near_boundary: bool,
    pub arithmetic: Arithmetic,
}

/// Evaluates the three violation criteria on three standard quotas. Input
/// order is arbitrary; the states are sorted internally.
pub fn evaluate_criteria<Q: Field>(quotas: &QuotaVector<Q>) -> Result<CriteriaReport> {
    if quotas.len() != 3 {
        return Err(Error::NotThreeStates(quotas.len()));
    }
    let q = quotas.quotas();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| q[a].partial_cmp(&q[b]).unwrap_or(Ordering::Equal));
    let [small, middle, large] = order;
    let seats = quotas.seats();

    let floors = [q[small].floor_u64(), q[middle].floor_u64(), q[large].floor_u64()];
    let floor_sum: u64 = floors.iter().sum();
    let sum_ok = floor_sum + 1 == seats;
    let f3 = floors[2];

    let mut report = CriteriaReport {
        holds: false,
        order,
        criteria: [false, false, sum_ok],
        margins: [None, None],
        floor_sum,
        seats,
        guarded: f3 < 2,
        near_boundary: false,
        arithmetic: Q::ARITHMETIC,
    };
    if report.guarded {
        return Ok(report);
    }

    let q3 = &q[large];
    let q3_sq = q3.clone() * q3.clone();
    let rhs_factor = Q::from_u64(f3) * Q::from_u64(f3 - 1);
    for (slot, &state) in [small, middle].iter().enumerate() {
        let qs = &q[state];
        let floor = qs.floor_u64();
        if floor == 0 {
            // the state's first ceiling seat has infinite priority
            report.criteria[slot] = true;
            continue;
        }
        let lhs = q3_sq.clone() * Q::from_u64(floor) * Q::from_u64(qs.ceil_u64());
        let rhs = qs.clone() * qs.clone() * rhs_factor.clone();
        let ord = Q::compare(&lhs, &rhs);
        report.criteria[slot] = ord == Ordering::Less;
        report.margins[slot] = Some((rhs.clone() - lhs.clone()).to_f64());
        if Q::ARITHMETIC == Arithmetic::Float {
            let (l, r) = (lhs.to_f64(), rhs.to_f64());
            if (r - l).abs() <= FLOAT_REL_TOL * l.abs().max(r.abs()) {
                report.near_boundary = true;
            }
        }
    }
    report.holds = report.criteria.iter().all(|&c| c);
    Ok(report)
}

/// True iff Huntington-Hill gives these three quotas a lower quota violation.
pub fn violation_criteria_test<Q: Field>(quotas: &QuotaVector<Q>) -> Result<bool> {
    evaluate_criteria(quotas).map(|r| r.holds)
}
