//! Huntington-Hill apportionment and its divisor-method form.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Population};
use num_traits::Zero;

/// Bisection steps allowed when searching for a Hill modified divisor.
pub const MAX_DIVISOR_ITERATIONS: usize = 200;

/// Positive, pairwise distinct state populations.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector<P> {
    values: Vec<P>,
}

impl<P: Population> PopulationVector<P> {
    pub fn new(values: Vec<P>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        if let Some(index) = values.iter().position(|p| !p.is_positive()) {
            return Err(Error::NonPositivePopulation { index });
        }
        for (first, a) in values.iter().enumerate() {
            if let Some(offset) = values[first + 1..].iter().position(|b| a == b) {
                return Err(Error::TiedPopulations {
                    first,
                    second: first + 1 + offset,
                });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[P] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> P::Quota {
        self.values
            .iter()
            .fold(P::Quota::zero(), |acc, p| acc + p.to_quota())
    }

    /// Reorders states so that state `i` of the result is state `order[i]` here.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Self::new(order.iter().map(|&i| self.values[i].clone()).collect())
    }

    fn check_seats(&self, seats: u64) -> Result<()> {
        if (seats as u128) < self.values.len() as u128 {
            Err(Error::TooFewSeats {
                seats,
                states: self.values.len(),
            })
        } else {
            Ok(())
        }
    }
}

/// Standard quotas `q_i = p_i / (P / M)` for a house of `seats` seats.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotaVector<Q> {
    quotas: Vec<Q>,
    standard_divisor: Q,
    seats: u64,
}

impl<Q: Field> QuotaVector<Q> {
    /// Wraps quotas that already sum to `seats`. Exact quotas must sum
    /// exactly; float quotas to within `1e-9 * seats`.
    pub fn from_quotas(quotas: Vec<Q>, seats: u64) -> Result<Self> {
        if quotas.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        if let Some(index) = quotas
            .iter()
            .position(|q| !(q.to_f64() > 0.0) || !q.to_f64().is_finite())
        {
            return Err(Error::NonPositivePopulation { index });
        }
        for (first, a) in quotas.iter().enumerate() {
            if let Some(offset) = quotas[first + 1..].iter().position(|b| a == b) {
                return Err(Error::TiedPopulations {
                    first,
                    second: first + 1 + offset,
                });
            }
        }
        let sum = quotas.iter().fold(Q::zero(), |acc, q| acc + q.clone());
        let target = Q::from_u64(seats);
        let ok = match Q::ARITHMETIC {
            crate::scalar::Arithmetic::Exact => sum == target,
            crate::scalar::Arithmetic::Float => {
                (sum.to_f64() - seats as f64).abs() <= 1e-9 * (seats as f64).max(1.0)
            }
        };
        if !ok {
            return Err(Error::QuotaSum {
                sum: sum.to_f64(),
                seats,
            });
        }
        Ok(Self {
            quotas,
            standard_divisor: Q::one(),
            seats,
        })
    }

    pub fn quotas(&self) -> &[Q] {
        &self.quotas
    }

    pub fn standard_divisor(&self) -> &Q {
        &self.standard_divisor
    }

    pub fn seats(&self) -> u64 {
        self.seats
    }

    pub fn len(&self) -> usize {
        self.quotas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotas.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.quotas.iter().map(Field::to_f64).collect()
    }
}

impl<Q: Field + Population> QuotaVector<Q> {
    /// The quotas themselves, as populations to apportion.
    pub fn as_populations(&self) -> Result<PopulationVector<Q>> {
        PopulationVector::new(self.quotas.clone())
    }
}

pub fn standard_quotas<P: Population>(
    pops: &PopulationVector<P>,
    seats: u64,
) -> Result<QuotaVector<P::Quota>> {
    pops.check_seats(seats)?;
    let total = pops.total();
    let m = P::Quota::from_u64(seats);
    let quotas = pops
        .values
        .iter()
        .map(|p| p.to_quota() * m.clone() / total.clone())
        .collect();
    Ok(QuotaVector {
        quotas,
        standard_divisor: total / m,
        seats,
    })
}

/// Seats per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Apportionment {
    seats: Vec<u64>,
}

impl Apportionment {
    pub fn new(seats: Vec<u64>) -> Self {
        Self { seats }
    }

    pub fn seats(&self) -> &[u64] {
        &self.seats
    }

    pub fn total(&self) -> u64 {
        self.seats.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.seats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seats.is_empty()
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.seats
    }
}

/// A priority value `p / sqrt(r (r + 1))`, kept as its parts so comparisons
/// never take a square root.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityKey<P> {
    pub population: P,
    pub seats: u64,
}

impl<P: Population> PriorityKey<P> {
    pub fn new(population: P, seats: u64) -> Self {
        Self { population, seats }
    }

    pub fn seat_product(&self) -> u128 {
        u128::from(self.seats) * (u128::from(self.seats) + 1)
    }

    /// Floating approximation, for display and traces only.
    pub fn value(&self) -> f64 {
        let product = self.seat_product() as f64;
        if product == 0.0 {
            f64::INFINITY
        } else {
            self.population.to_f64() / product.sqrt()
        }
    }
}

pub fn compare_priority<P: Population>(a: &PriorityKey<P>, b: &PriorityKey<P>) -> Ordering {
    a.population.priority_cmp(a.seats, &b.population, b.seats)
}

/// One seat grant of the priority loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grant {
    /// Ordinal of the seat in the house, starting after the base seats.
    pub seat: u64,
    pub state: usize,
    /// Seats the state held when it won this one.
    pub held: u64,
    pub priority: f64,
}

/// Rebuilds an apportionment from a grant trace.
pub fn replay(states: usize, trace: &[Grant]) -> Apportionment {
    let mut seats = vec![1u64; states];
    for grant in trace {
        seats[grant.state] += 1;
    }
    Apportionment::new(seats)
}

pub fn huntington_hill<P: Population>(
    pops: &PopulationVector<P>,
    seats: u64,
) -> Result<Apportionment> {
    run_priority(pops, seats, None)
}

/// Like [`huntington_hill`], also returning every grant after the base seats.
pub fn huntington_hill_traced<P: Population>(
    pops: &PopulationVector<P>,
    seats: u64,
) -> Result<(Apportionment, Vec<Grant>)> {
    let mut trace = Vec::with_capacity(seats.saturating_sub(pops.len() as u64) as usize);
    let app = run_priority(pops, seats, Some(&mut trace))?;
    Ok((app, trace))
}

fn run_priority<P: Population>(
    pops: &PopulationVector<P>,
    seats: u64,
    mut trace: Option<&mut Vec<Grant>>,
) -> Result<Apportionment> {
    pops.check_seats(seats)?;
    let values = pops.values();
    let n = values.len();
    let mut held = vec![1u64; n];
    let mut tied = Vec::new();
    for seat in (n as u64 + 1)..=seats {
        let mut best = 0;
        tied.clear();
        for i in 1..n {
            match values[i].priority_cmp(held[i], &values[best], held[best]) {
                Ordering::Greater => {
                    best = i;
                    tied.clear();
                }
                Ordering::Equal => tied.push(i),
                Ordering::Less => {}
            }
        }
        if !tied.is_empty() {
            tied.insert(0, best);
            tied.sort_unstable();
            return Err(Error::PriorityTie {
                states: tied,
                seat,
            });
        }
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(Grant {
                seat,
                state: best,
                held: held[best],
                priority: PriorityKey::new(values[best].clone(), held[best]).value(),
            });
        }
        held[best] += 1;
    }
    Ok(Apportionment::new(held))
}

/// Rounds a modified quota at the geometric mean of its floor and ceiling.
pub fn hill_round<Q: Field>(m: &Q) -> u64 {
    let floor = m.floor_u64();
    if floor == 0 {
        return 1;
    }
    if m.is_integral() {
        return floor;
    }
    let threshold = Q::from_u64(floor) * Q::from_u64(floor + 1);
    match Q::compare(&(m.clone() * m.clone()), &threshold) {
        Ordering::Greater => floor + 1,
        _ => floor,
    }
}

fn hill_seat_sum<P: Population>(pops: &PopulationVector<P>, divisor: &P::Quota) -> u64 {
    pops.values()
        .iter()
        .map(|p| hill_round(&(p.to_quota() / divisor.clone())))
        .sum()
}

/// Hill's divisor method. Returns the apportionment together with a
/// modified divisor that produces it.
pub fn hill_divisor_with_divisor<P: Population>(
    pops: &PopulationVector<P>,
    seats: u64,
) -> Result<(Apportionment, P::Quota)> {
    pops.check_seats(seats)?;
    let n = pops.len() as u64;
    let two = P::Quota::from_u64(2);
    let largest = pops
        .values()
        .iter()
        .map(Population::to_quota)
        .fold(P::Quota::zero(), |acc, p| if p > acc { p } else { acc });
    // seat sum exceeds M at the low end and equals n at the high end
    let mut lo = pops.total() / P::Quota::from_u64(seats + n);
    let mut hi = largest * two;
    let finish = |d: P::Quota| {
        let app = pops
            .values()
            .iter()
            .map(|p| hill_round(&(p.to_quota() / d.clone())))
            .collect();
        (Apportionment::new(app), d)
    };
    if hill_seat_sum(pops, &hi) == seats {
        return Ok(finish(hi));
    }
    if hill_seat_sum(pops, &lo) == seats {
        return Ok(finish(lo));
    }
    for _ in 0..MAX_DIVISOR_ITERATIONS {
        let mid = (lo.clone() + hi.clone()).half();
        let sum = hill_seat_sum(pops, &mid);
        match sum.cmp(&seats) {
            Ordering::Equal => return Ok(finish(mid)),
            Ordering::Greater => lo = mid,
            Ordering::Less => hi = mid,
        }
    }
    Err(Error::DivisorSearch {
        iterations: MAX_DIVISOR_ITERATIONS,
    })
}

pub fn hill_divisor<P: Population>(pops: &PopulationVector<P>, seats: u64) -> Result<Apportionment> {
    hill_divisor_with_divisor(pops, seats).map(|(app, _)| app)
}
