//! One-dimensional population densities with bounded support.
//!
//! Textual forms accepted by [`PopulationDensity::parse`]:
//!
//! * `uniform:a:b`, uniform on `(a, b]`;
//! * `piecewise:path.csv`, a CSV file of `breakpoint,height` rows. Row `i`
//!   gives the height on `[breakpoint_i, breakpoint_{i+1})`; the height on
//!   the last row closes the support and must be 0. A header row is allowed.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of a piecewise density's total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PopulationDensity {
    Uniform {
        low: f64,
        high: f64,
    },
    PiecewiseConstant {
        breaks: Vec<f64>,
        /// One height per interval, so `breaks.len() - 1` entries.
        heights: Vec<f64>,
    },
}

impl PopulationDensity {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low >= 0.0 && low < high) {
            return Err(Error::DensitySpec(format!(
                "uniform support ({low}, {high}] must satisfy 0 <= low < high"
            )));
        }
        Ok(Self::Uniform { low, high })
    }

    pub fn piecewise(breaks: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || heights.len() + 1 != breaks.len() {
            return Err(Error::DensitySpec(
                "piecewise density needs n + 1 breakpoints for n heights".into(),
            ));
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks[0] < 0.0 {
            return Err(Error::DensitySpec("breakpoints must be finite and nonnegative".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::DensitySpec("breakpoints must be strictly increasing".into()));
        }
        if heights.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(Error::DensitySpec("heights must be finite and nonnegative".into()));
        }
        let mass: f64 = breaks
            .windows(2)
            .zip(&heights)
            .map(|(w, h)| (w[1] - w[0]) * h)
            .sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::DensitySpec(format!("density integrates to {mass}, not 1")));
        }
        Ok(Self::PiecewiseConstant { breaks, heights })
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let mut parts = spec.splitn(2, ':');
        let kind = parts.next().unwrap_or_default();
        let rest = parts.next().unwrap_or_default();
        match kind {
            "uniform" => {
                let bounds: Vec<&str> = rest.split(':').collect();
                let [low, high] = bounds[..] else {
                    return Err(Error::DensitySpec(format!("expected uniform:a:b, got {spec:?}")));
                };
                let num = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::DensitySpec(format!("bad number {s:?} in {spec:?}")))
                };
                Self::uniform(num(low)?, num(high)?)
            }
            "piecewise" => Self::from_csv_path(rest),
            _ => Err(Error::DensitySpec(format!(
                "unknown density {spec:?}; expected uniform:a:b or piecewise:file.csv"
            ))),
        }
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::DensitySpec(format!("{}: {e}", path.display())))?;
        Self::from_csv(&text)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::DensitySpec(e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::DensitySpec(format!(
                    "row {} has {} fields, expected breakpoint,height",
                    line + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(b), Ok(h)) => rows.push((b, h)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::DensitySpec(format!("row {} is not numeric", line + 1)));
                }
            }
        }
        let Some(&(_, last)) = rows.last() else {
            return Err(Error::DensitySpec("empty density file".into()));
        };
        if last != 0.0 {
            return Err(Error::DensitySpec("the last row's height must be 0".into()));
        }
        let breaks = rows.iter().map(|r| r.0).collect();
        let heights = rows[..rows.len() - 1].iter().map(|r| r.1).collect();
        Self::piecewise(breaks, heights)
    }

    /// Closed support `[a, b]`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform { low, high } => (*low, *high),
            Self::PiecewiseConstant { breaks, .. } => (breaks[0], breaks[breaks.len() - 1]),
        }
    }

    /// Points where the density may jump, including the support ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Uniform { low, high } => vec![*low, *high],
            Self::PiecewiseConstant { breaks, .. } => breaks.clone(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { low, high } => {
                if x > *low && x <= *high {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Self::PiecewiseConstant { breaks, heights } => {
                if x < breaks[0] || x >= breaks[breaks.len() - 1] {
                    return 0.0;
                }
                let i = breaks.partition_point(|&b| b <= x) - 1;
                heights[i]
            }
        }
    }

    /// Draws a strictly positive population.
    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> f64 {
        loop {
            let x = match self {
                // (low, high]
                Self::Uniform { low, high } => high - (high - low) * rng.random::<f64>(),
                Self::PiecewiseConstant { breaks, heights } => {
                    let mut u = rng.random::<f64>();
                    let mut chosen = heights.len() - 1;
                    for (i, (w, h)) in breaks.windows(2).zip(heights).enumerate() {
                        let mass = (w[1] - w[0]) * h;
                        if u < mass {
                            chosen = i;
                            break;
                        }
                        u -= mass;
                    }
                    let (a, b) = (breaks[chosen], breaks[chosen + 1]);
                    a + (b - a) * rng.random::<f64>()
                }
            };
            if x > 0.0 {
                return x;
            }
        }
    }
}
