//! Violation probability for general quota densities, and the quota density
//! induced by three IID populations.
//!
//! For a joint density `f` of the two smaller quotas on
//! `S = {(x, y) | 0 <= x, y < M - x - y}` the probability is the sum, over
//! floor pairs `(j, k)`, of `∫∫_Δ(j,k) f(j + x, k + y) dx dy`. Triangle
//! integrals run in parallel and are reduced in cell order.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::PopulationDensity;
use crate::error::{Error, Result};
use crate::geometry::{cell_polygon, feasible_cells, FloorPair, Point};
use crate::quadrature::{adaptive_triangle, AdaptiveSpec, GaussLegendre, TriangleRule};
use crate::real::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub triangle_rule_degree: usize,
    pub max_subdivision_depth: u32,
    pub relative_tolerance: f64,
    pub z_integral_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            triangle_rule_degree: 10,
            max_subdivision_depth: 12,
            relative_tolerance: 1e-8,
            z_integral_nodes: 64,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.triangle_rule_degree == 0 {
            return Err(Error::InvalidArgument("triangle rule degree must be positive".into()));
        }
        if self.z_integral_nodes == 0 {
            return Err(Error::InvalidArgument("z integral needs at least one node".into()));
        }
        if !(self.relative_tolerance >= 100.0 * f64::EPSILON) || !self.relative_tolerance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "relative tolerance {} is below 100 machine epsilons",
                self.relative_tolerance
            )));
        }
        Ok(())
    }

    pub fn with_tolerance(self, relative_tolerance: f64) -> Self {
        Self {
            relative_tolerance,
            ..self
        }
    }
}

/// A joint density of the two smaller quotas `(q1, q2)`.
pub trait QuotaDensity: Send + Sync {
    fn density(&self, q1: f64, q2: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> QuotaDensity for F {
    fn density(&self, q1: f64, q2: f64) -> f64 {
        self(q1, q2)
    }
}

fn in_simplex(seats: f64, q1: f64, q2: f64) -> bool {
    q1 >= 0.0 && q2 >= 0.0 && q1.max(q2) < seats - q1 - q2
}

/// The constant density `6 / M²` on `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSimplexDensity {
    seats: u64,
}

impl UniformSimplexDensity {
    pub fn new(seats: u64) -> Self {
        Self { seats }
    }
}

impl QuotaDensity for UniformSimplexDensity {
    fn density(&self, q1: f64, q2: f64) -> f64 {
        let m = self.seats as f64;
        if in_simplex(m, q1, q2) {
            6.0 / (m * m)
        } else {
            0.0
        }
    }
}

/// Joint density of the two smaller quotas when the three populations are
/// IID with a bounded-support density `f`:
///
/// `g(q1, q2) = 3/M² ∫ z² f(q1 z/M) f(q2 z/M) f(q3 z/M) dz`, `q3 = M - q1 - q2`.
#[derive(Debug, Clone)]
pub struct IidQuotaDensity {
    population: PopulationDensity,
    seats: u64,
    rule: GaussLegendre,
}

impl IidQuotaDensity {
    pub fn new(population: PopulationDensity, seats: u64, z_nodes: usize) -> Result<Self> {
        if seats < 3 {
            return Err(Error::TooFewSeats { seats, states: 3 });
        }
        if z_nodes == 0 {
            return Err(Error::InvalidArgument("z integral needs at least one node".into()));
        }
        Ok(Self {
            population,
            seats,
            rule: GaussLegendre::new(z_nodes),
        })
    }

    pub fn population(&self) -> &PopulationDensity {
        &self.population
    }

    pub fn seats(&self) -> u64 {
        self.seats
    }

    pub fn evaluate(&self, q1: f64, q2: f64) -> Result<f64> {
        let m = self.seats as f64;
        let q = [q1, q2, m - q1 - q2];
        if q.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!(
                "quotas ({q1}, {q2}, {}) must be positive",
                q[2]
            )));
        }
        let (a, b) = self.population.support();
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        for v in q {
            lo = lo.max(a * m / v);
            hi = hi.min(b * m / v);
        }
        if !(lo < hi) {
            return Ok(0.0);
        }
        // split the z range where any factor can jump
        let mut cuts = vec![lo, hi];
        for t in self.population.breakpoints() {
            for v in q {
                let z = t * m / v;
                if z > lo && z < hi {
                    cuts.push(z);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let f = &self.population;
        let mut total = CompensatedSum::default();
        for w in cuts.windows(2) {
            total.add(self.rule.integrate(w[0], w[1], |z| {
                z * z * f.pdf(q[0] * z / m) * f.pdf(q[1] * z / m) * f.pdf(q[2] * z / m)
            }));
        }
        Ok(3.0 / (m * m) * total.total())
    }
}

impl QuotaDensity for IidQuotaDensity {
    fn density(&self, q1: f64, q2: f64) -> f64 {
        self.evaluate(q1, q2).unwrap_or(0.0)
    }
}

pub fn iid_quota_density(
    population: &PopulationDensity,
    seats: u64,
    quad: &QuadratureSpec,
) -> Result<IidQuotaDensity> {
    IidQuotaDensity::new(population.clone(), seats, quad.z_integral_nodes)
}

#[derive(Clone)]
pub enum DensityModel {
    UniformSimplex,
    JointQuotaPdf(Arc<dyn QuotaDensity>),
    IidPopulationPdf(PopulationDensity),
}

impl fmt::Debug for DensityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UniformSimplex => f.write_str("UniformSimplex"),
            Self::JointQuotaPdf(_) => f.write_str("JointQuotaPdf(..)"),
            Self::IidPopulationPdf(d) => f.debug_tuple("IidPopulationPdf").field(d).finish(),
        }
    }
}

impl DensityModel {
    /// The joint quota density this model induces for `seats`.
    pub fn joint(&self, seats: u64, quad: &QuadratureSpec) -> Result<Arc<dyn QuotaDensity>> {
        Ok(match self {
            Self::UniformSimplex => Arc::new(UniformSimplexDensity::new(seats)),
            Self::JointQuotaPdf(f) => Arc::clone(f),
            Self::IidPopulationPdf(p) => Arc::new(iid_quota_density(p, seats, quad)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellIntegral {
    pub floors: FloorPair,
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfProbability {
    pub seats: u64,
    pub probability: f64,
    pub cells: Vec<CellIntegral>,
}

fn adaptive_spec(quad: &QuadratureSpec, scale: f64) -> AdaptiveSpec {
    AdaptiveSpec {
        max_depth: quad.max_subdivision_depth,
        relative_tolerance: quad.relative_tolerance,
        // changes this small cannot move a probability at the requested tolerance
        absolute_floor: quad.relative_tolerance * 1e-6 * scale,
    }
}

fn divergence(fp: &FloorPair, change: f64, quad: &QuadratureSpec) -> Error {
    Error::QuadratureDivergence {
        j: fp.j,
        k: fp.k,
        change,
        depth: quad.max_subdivision_depth,
    }
}

/// Per-cell integrals of `density` over the feasible triangles.
pub fn pdf_probability_cells(
    seats: u64,
    density: &dyn QuotaDensity,
    quad: &QuadratureSpec,
) -> Result<PdfProbability> {
    quad.validate()?;
    if seats < 3 {
        return Err(Error::TooFewSeats { seats, states: 3 });
    }
    let rule = TriangleRule::with_degree(quad.triangle_rule_degree);
    let m2 = (seats as f64).powi(2);
    let cells = feasible_cells::<f64>(seats)?;
    let results: Vec<_> = cells
        .par_iter()
        .map(|(fp, tri)| {
            let Some(vertices) = tri.vertices else {
                unreachable!("feasible cells have vertices");
            };
            let (j, k) = (fp.j as f64, fp.k as f64);
            let spec = adaptive_spec(quad, tri.area / m2);
            let out = adaptive_triangle(&rule, &vertices, &spec, &mut |x, y| {
                density.density(j + x, k + y)
            });
            (*fp, out)
        })
        .collect();

    let worst = results
        .iter()
        .filter(|(_, out)| !out.converged)
        .max_by(|a, b| a.1.worst_change.total_cmp(&b.1.worst_change));
    if let Some((fp, out)) = worst {
        return Err(divergence(fp, out.worst_change, quad));
    }
    let mut total = CompensatedSum::default();
    let cells = results
        .into_iter()
        .map(|(floors, out)| {
            total.add(out.value);
            CellIntegral {
                floors,
                value: out.value,
                evaluations: out.evaluations,
            }
        })
        .collect();
    Ok(PdfProbability {
        seats,
        probability: total.total(),
        cells,
    })
}

/// Violation probability for a joint quota density on `S`.
pub fn general_pdf_probability(
    seats: u64,
    density: &dyn QuotaDensity,
    quad: &QuadratureSpec,
) -> Result<f64> {
    pdf_probability_cells(seats, density, quad).map(|r| r.probability)
}

/// Violation probability under any [`DensityModel`].
pub fn model_probability(seats: u64, model: &DensityModel, quad: &QuadratureSpec) -> Result<f64> {
    let joint = model.joint(seats, quad)?;
    general_pdf_probability(seats, joint.as_ref(), quad)
}

/// Total mass of `density` over `S`, integrating every cell. A diagnostic
/// for the normalization the probability assumes.
pub fn density_mass(seats: u64, density: &dyn QuotaDensity, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    if seats < 3 {
        return Err(Error::TooFewSeats { seats, states: 3 });
    }
    let rule = TriangleRule::with_degree(quad.triangle_rule_degree);
    let m2 = (seats as f64).powi(2);
    let pairs: Vec<FloorPair> = FloorPair::all(seats).collect();
    let results: Vec<_> = pairs
        .par_iter()
        .map(|fp| {
            let poly = cell_polygon::<f64>(fp);
            let (j, k) = (fp.j as f64, fp.k as f64);
            let mut total = CompensatedSum::default();
            let mut worst: Option<f64> = None;
            for i in 1..poly.len().saturating_sub(1) {
                let tri: [Point<f64>; 3] = [poly[0], poly[i], poly[i + 1]];
                let spec = adaptive_spec(quad, 1.0 / m2);
                let out = adaptive_triangle(&rule, &tri, &spec, &mut |x, y| {
                    density.density(j + x, k + y)
                });
                if !out.converged {
                    worst = Some(worst.unwrap_or(0.0).max(out.worst_change));
                }
                total.add(out.value);
            }
            (*fp, total.total(), worst)
        })
        .collect();
    if let Some((fp, _, Some(change))) = results
        .iter()
        .filter(|r| r.2.is_some())
        .max_by(|a, b| a.2.unwrap_or(0.0).total_cmp(&b.2.unwrap_or(0.0)))
    {
        return Err(divergence(fp, *change, quad));
    }
    Ok(results.iter().map(|r| r.1).collect::<CompensatedSum<f64>>().total())
}
