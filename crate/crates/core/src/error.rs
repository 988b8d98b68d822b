use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("population vector is empty")]
    EmptyPopulation,

    #[error("population of state {index} is not a positive finite number")]
    NonPositivePopulation { index: usize },

    #[error("states {first} and {second} have the same population")]
    TiedPopulations { first: usize, second: usize },

    #[error("{seats} seats cannot give each of {states} states a seat")]
    TooFewSeats { seats: u64, states: usize },

    #[error("priority tie between states {states:?} when granting seat {seat}")]
    PriorityTie { states: Vec<usize>, seat: u64 },

    #[error("no modified divisor found after {iterations} bisection steps")]
    DivisorSearch { iterations: usize },

    #[error("quotas sum to {sum}, expected {seats}")]
    QuotaSum { sum: f64, seats: u64 },

    #[error("expected exactly three states, got {0}")]
    NotThreeStates(usize),

    #[error("floor pair ({j}, {k}) lies outside the quota simplex for {seats} seats")]
    FloorPairOutsideSimplex { j: u64, k: u64, seats: u64 },

    #[error("boundary lines are parallel")]
    ParallelLines,

    #[error("feasible region for ({j}, {k}) with {seats} seats has an irrational boundary")]
    NotRational { j: u64, k: u64, seats: u64 },

    #[error(
        "quadrature did not converge on cell ({j}, {k}): change {change:e} after depth {depth}"
    )]
    QuadratureDivergence {
        j: u64,
        k: u64,
        change: f64,
        depth: u32,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid density specification: {0}")]
    DensitySpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("analytic and algorithmic violation checks disagree on {0}")]
    CrossCheckMismatch(String),
}
