//! Huntington-Hill apportionment with three-state quota-violation analysis.
//!
//! * [`apportion`]: the priority algorithm, Hill's divisor method and
//!   standard quotas, over exact (integer, rational) or float populations.
//! * [`analysis`]: quota-violation detection and the analytic criteria test.
//! * [`geometry`]: feasible triangles in decimal-part space and the exact
//!   violation probability for uniformly distributed quotas.
//! * [`probmodel`]: violation probability for general quota densities and
//!   the density induced by IID populations.
//! * [`mc`]: seeded Monte Carlo estimates with Wald intervals.
//! * [`cli`]: the `hillquota` command-line front end.

pub mod analysis;
pub mod cli;
pub mod density;
pub mod apportion;
pub mod error;
pub mod geometry;
pub mod mc;
pub mod probmodel;
pub mod quadrature;
pub mod real;
pub mod scalar;

pub use analysis::{
    detect_violations, evaluate_criteria, violation_criteria_test, CriteriaReport, QuotaClass,
    ViolationReport,
};
pub use apportion::{
    compare_priority, hill_divisor, huntington_hill, huntington_hill_traced, standard_quotas,
    Apportionment, PopulationVector, PriorityKey, QuotaVector,
};
pub use density::PopulationDensity;
pub use error::{Error, Result};
pub use geometry::{
    boundary_lines, cell_overlap_area, exact_uniform_probability, exact_uniform_probability_rational,
    region_points, triangle, BoundaryLine, FeasibleTriangle, FloorPair, Point, RegionData,
};
pub use mc::{
    sample_violation_rate, sample_violation_rate_with, uniform_simplex_draw, wald_interval,
    SampleEstimate, SampleOptions, SamplingScheme, SchemeKind,
};
pub use probmodel::{
    general_pdf_probability, iid_quota_density, DensityModel, IidQuotaDensity, QuadratureSpec,
    QuotaDensity, UniformSimplexDensity,
};
pub use real::DoubleDouble;
pub use scalar::Arithmetic;
