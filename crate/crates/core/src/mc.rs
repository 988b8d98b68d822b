//! Seeded Monte Carlo estimates of the violation probability.
//!
//! Samples are split into batches of [`BATCH_SIZE`]. Batch `b` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `b`, so an estimate
//! depends only on `(scheme, n, seed)` and not on the number of workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{detect_violations, evaluate_criteria};
use crate::apportion::{standard_quotas, PopulationVector, QuotaVector};
use crate::density::PopulationDensity;
use crate::error::{Error, Result};

pub const BATCH_SIZE: u64 = 4096;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "HILLQUOTA_WORKERS";

const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// `(q1, q2)` uniform on `S`, checked with the analytic criteria.
    UniformQuotas,
    /// Three IID populations, checked by running Huntington-Hill.
    IidPopulations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    pub kind: SchemeKind,
    pub seats: u64,
    pub population: Option<PopulationDensity>,
}

impl SamplingScheme {
    pub fn uniform_quotas(seats: u64) -> Result<Self> {
        let scheme = Self {
            kind: SchemeKind::UniformQuotas,
            seats,
            population: None,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn iid_populations(seats: u64, population: PopulationDensity) -> Result<Self> {
        let scheme = Self {
            kind: SchemeKind::IidPopulations,
            seats,
            population: Some(population),
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seats < 3 {
            return Err(Error::TooFewSeats {
                seats: self.seats,
                states: 3,
            });
        }
        if self.kind == SchemeKind::IidPopulations && self.population.is_none() {
            return Err(Error::InvalidArgument(
                "IID population sampling needs a population density".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEstimate {
    pub scheme: SchemeKind,
    #[serde(rename = "M")]
    pub seats: u64,
    pub n: u64,
    pub seed: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Degenerate draws (ties) that were discarded and drawn again.
    pub redraws: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<PopulationDensity>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleOptions {
    /// Worker threads; `None` reads [`WORKERS_ENV`], then uses rayon's default.
    pub workers: Option<usize>,
    /// Check every draw by both the analytic criteria and the algorithm.
    pub cross_check: bool,
}

/// 95% Wald interval `p ± 1.96 √(p(1-p)/n)`, clamped to `[0, 1]`.
pub fn wald_interval(p_hat: f64, n: u64) -> (f64, f64) {
    let n = n.max(1) as f64;
    let half = Z_95 * (p_hat * (1.0 - p_hat) / n).max(0.0).sqrt();
    ((p_hat - half).max(0.0), (p_hat + half).min(1.0))
}

/// A point uniform on `S = {(x, y) | 0 <= x, y < M - x - y}`, by rejection
/// from `[0, M/2)²`.
pub fn uniform_simplex_draw<G: Rng + ?Sized>(seats: u64, rng: &mut G) -> (f64, f64) {
    let half = seats as f64 / 2.0;
    let m = seats as f64;
    loop {
        let x = half * rng.random::<f64>();
        let y = half * rng.random::<f64>();
        if x.max(y) < m - x - y {
            return (x, y);
        }
    }
}

pub fn default_workers() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    violations: u64,
    redraws: u64,
}

/// One non-degenerate draw: `Some(violated)`, or `None` when it must be redrawn.
fn draw_once(scheme: &SamplingScheme, cross_check: bool, rng: &mut ChaCha8Rng) -> Result<Option<bool>> {
    let m = scheme.seats;
    match scheme.kind {
        SchemeKind::UniformQuotas => {
            let (q1, q2) = uniform_simplex_draw(m, rng);
            let quotas = vec![q1, q2, m as f64 - q1 - q2];
            let Ok(qv) = QuotaVector::from_quotas(quotas.clone(), m) else {
                return Ok(None);
            };
            let report = evaluate_criteria(&qv)?;
            if report.near_boundary {
                return Ok(None);
            }
            if cross_check {
                let pops = PopulationVector::new(quotas.clone())?;
                match detect_violations(&pops, m) {
                    Ok(alg) if alg.has_lower != report.holds => {
                        return Err(Error::CrossCheckMismatch(format!("quotas {quotas:?}, M={m}")));
                    }
                    Ok(_) => {}
                    Err(Error::PriorityTie { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(Some(report.holds))
        }
        SchemeKind::IidPopulations => {
            let density = scheme.population.as_ref().expect("validated scheme");
            let values: Vec<f64> = (0..3).map(|_| density.sample(rng)).collect();
            let Ok(pops) = PopulationVector::new(values.clone()) else {
                return Ok(None);
            };
            let report = match detect_violations(&pops, m) {
                Ok(r) => r,
                Err(Error::PriorityTie { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            if cross_check {
                let crit = evaluate_criteria(&standard_quotas(&pops, m)?)?;
                if !crit.near_boundary && crit.holds != report.has_lower {
                    return Err(Error::CrossCheckMismatch(format!("populations {values:?}, M={m}")));
                }
            }
            Ok(Some(report.has_lower))
        }
    }
}

fn run_batch(scheme: &SamplingScheme, seed: u64, batch: u64, count: u64, cross_check: bool) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let mut tally = Tally::default();
    for _ in 0..count {
        loop {
            match draw_once(scheme, cross_check, &mut rng)? {
                Some(violated) => {
                    tally.violations += u64::from(violated);
                    break;
                }
                None => tally.redraws += 1,
            }
        }
    }
    Ok(tally)
}

pub fn sample_violation_rate(scheme: &SamplingScheme, n_samples: u64, seed: u64) -> Result<SampleEstimate> {
    sample_violation_rate_with(scheme, n_samples, seed, &SampleOptions::default())
}

pub fn sample_violation_rate_with(
    scheme: &SamplingScheme,
    n_samples: u64,
    seed: u64,
    options: &SampleOptions,
) -> Result<SampleEstimate> {
    scheme.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let batches = n_samples.div_ceil(BATCH_SIZE);
    let work = || -> Result<Vec<Tally>> {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let count = BATCH_SIZE.min(n_samples - b * BATCH_SIZE);
                run_batch(scheme, seed, b, count, options.cross_check)
            })
            .collect()
    };
    let tallies = match options.workers.or_else(default_workers) {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {w} workers: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let violations: u64 = tallies.iter().map(|t| t.violations).sum();
    let redraws: u64 = tallies.iter().map(|t| t.redraws).sum();
    let p_hat = violations as f64 / n_samples as f64;
    let (ci_low, ci_high) = wald_interval(p_hat, n_samples);
    Ok(SampleEstimate {
        scheme: scheme.kind,
        seats: scheme.seats,
        n: n_samples,
        seed,
        p_hat,
        ci_low,
        ci_high,
        redraws,
        dist: scheme.population.clone(),
    })
}
