//! Python bindings. The module is importable as `hillquota`.
//!
//! Population and quota arguments are Python sequences. Plain ints run on the
//! exact integer path, `str` and `fractions.Fraction` values on exact
//! rationals, and anything containing a float on the `f64` path.

use hillquota::scalar::parse_rational;
use hillquota::{
    self as hq, Arithmetic, DoubleDouble, PopulationVector, QuadratureSpec, QuotaVector, SampleOptions,
    SamplingScheme, UniformSimplexDensity,
};
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;

create_exception!(hillquota, HillquotaError, PyValueError, "Raised for any hillquota computation error.");

fn err(e: hq::Error) -> PyErr {
    HillquotaError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize")
}

enum Numbers {
    Integer(Vec<u64>),
    Rational(Vec<BigRational>),
    Float(Vec<f64>),
}

fn numbers(items: &[Bound<'_, PyAny>]) -> PyResult<Numbers> {
    let mut ints = Vec::with_capacity(items.len());
    let mut exact = Vec::with_capacity(items.len());
    let mut floats = Vec::with_capacity(items.len());
    let mut any_float = false;
    for item in items {
        let exact_value = if let Ok(v) = item.extract::<u64>() {
            ints.push(v);
            Some(BigRational::from_integer(v.into()))
        } else if item.is_instance_of::<PyString>() {
            let text: String = item.extract()?;
            Some(parse_rational(&text).ok_or_else(|| PyValueError::new_err(format!("bad exact number {text:?}")))?)
        } else if item.hasattr("numerator")? && item.hasattr("denominator")? && !item.hasattr("is_integer")? {
            let text = item.str()?.to_string();
            Some(parse_rational(&text).ok_or_else(|| PyValueError::new_err(format!("bad fraction {text:?}")))?)
        } else {
            any_float = true;
            None
        };
        floats.push(match &exact_value {
            Some(r) => hq::scalar::Field::to_f64(r),
            None => item
                .extract::<f64>()
                .map_err(|_| PyTypeError::new_err("expected int, float, str or Fraction"))?,
        });
        if let Some(r) = exact_value {
            exact.push(r);
        }
    }
    Ok(if any_float {
        Numbers::Float(floats)
    } else if ints.len() == items.len() {
        Numbers::Integer(ints)
    } else {
        Numbers::Rational(exact)
    })
}

macro_rules! on_populations {
    ($items:expr, |$pv:ident| $body:expr) => {
        match numbers(&$items)? {
            Numbers::Integer(v) => {
                let $pv = PopulationVector::new(v).map_err(err)?;
                $body
            }
            Numbers::Rational(v) => {
                let $pv = PopulationVector::new(v).map_err(err)?;
                $body
            }
            Numbers::Float(v) => {
                let $pv = PopulationVector::new(v).map_err(err)?;
                $body
            }
        }
    };
}

/// Seats per state.
#[pyclass(frozen, eq, skip_from_py_object, module = "hillquota")]
#[derive(Clone, PartialEq)]
struct Apportionment {
    inner: hq::Apportionment,
}

#[pymethods]
impl Apportionment {
    #[getter]
    fn seats(&self) -> Vec<u64> {
        self.inner.seats().to_vec()
    }

    #[getter]
    fn total(&self) -> u64 {
        self.inner.total()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Apportionment({:?})", self.inner.seats())
    }

    fn to_json(&self) -> String {
        json(&self.inner)
    }
}

/// One seat grant in a priority trace.
#[pyclass(frozen, get_all, skip_from_py_object, module = "hillquota")]
#[derive(Clone)]
struct Grant {
    seat: u64,
    state: usize,
    held: u64,
    priority: f64,
}

#[pymethods]
impl Grant {
    fn __repr__(&self) -> String {
        format!(
            "Grant(seat={}, state={}, held={}, priority={})",
            self.seat, self.state, self.held, self.priority
        )
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "hillquota")]
#[derive(Clone)]
struct StateReport {
    quota: f64,
    lower_bound: u64,
    upper_bound: u64,
    seats: u64,
    /// "LOWER", "NONE" or "UPPER".
    class_: String,
}

#[pymethods]
impl StateReport {
    fn __repr__(&self) -> String {
        format!("StateReport(quota={}, seats={}, class={})", self.quota, self.seats, self.class_)
    }
}

#[pyclass(frozen, module = "hillquota")]
struct ViolationReport {
    inner: hq::ViolationReport,
}

#[pymethods]
impl ViolationReport {
    #[getter]
    fn has_lower(&self) -> bool {
        self.inner.has_lower
    }

    #[getter]
    fn has_upper(&self) -> bool {
        self.inner.has_upper
    }

    #[getter]
    fn per_state(&self) -> Vec<StateReport> {
        self.inner
            .per_state
            .iter()
            .map(|s| StateReport {
                quota: s.quota,
                lower_bound: s.lower_bound,
                upper_bound: s.upper_bound,
                seats: s.seats,
                class_: json(&s.class).trim_matches('"').to_string(),
            })
            .collect()
    }

    #[getter]
    fn apportionment(&self) -> Apportionment {
        Apportionment {
            inner: self.inner.seats(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "ViolationReport(seats={:?}, has_lower={}, has_upper={})",
            self.inner.seats().seats(),
            self.inner.has_lower,
            self.inner.has_upper
        )
    }

    fn to_json(&self) -> String {
        json(&self.inner)
    }
}

#[pyclass(frozen, module = "hillquota")]
struct CriteriaReport {
    inner: hq::CriteriaReport,
}

#[pymethods]
impl CriteriaReport {
    #[getter]
    fn holds(&self) -> bool {
        self.inner.holds
    }

    #[getter]
    fn order(&self) -> [usize; 3] {
        self.inner.order
    }

    #[getter]
    fn criteria(&self) -> [bool; 3] {
        self.inner.criteria
    }

    #[getter]
    fn margins(&self) -> [Option<f64>; 2] {
        self.inner.margins
    }

    #[getter]
    fn guarded(&self) -> bool {
        self.inner.guarded
    }

    #[getter]
    fn near_boundary(&self) -> bool {
        self.inner.near_boundary
    }

    #[getter]
    fn exact(&self) -> bool {
        self.inner.arithmetic == Arithmetic::Exact
    }

    fn __bool__(&self) -> bool {
        self.inner.holds
    }

    fn __repr__(&self) -> String {
        format!("CriteriaReport(holds={}, criteria={:?})", self.inner.holds, self.inner.criteria)
    }

    fn to_json(&self) -> String {
        json(&self.inner)
    }
}

/// The violation region inside one unit cell of fractional parts.
#[pyclass(frozen, get_all, module = "hillquota")]
struct FeasibleTriangle {
    j: u64,
    k: u64,
    seats: u64,
    vertices: Option<[(f64, f64); 3]>,
    area: f64,
    empty: bool,
}

#[pymethods]
impl FeasibleTriangle {
    fn __repr__(&self) -> String {
        format!(
            "FeasibleTriangle(j={}, k={}, seats={}, area={}, empty={})",
            self.j, self.k, self.seats, self.area, self.empty
        )
    }
}

/// A population density: `PopulationDensity.uniform(0, 1000)` or
/// `PopulationDensity.parse("piecewise:file.csv")`.
#[pyclass(frozen, from_py_object, module = "hillquota")]
#[derive(Clone)]
struct PopulationDensity {
    inner: hq::PopulationDensity,
}

#[pymethods]
impl PopulationDensity {
    #[staticmethod]
    fn uniform(low: f64, high: f64) -> PyResult<Self> {
        Ok(Self {
            inner: hq::PopulationDensity::uniform(low, high).map_err(err)?,
        })
    }

    #[staticmethod]
    fn piecewise(breaks: Vec<f64>, heights: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: hq::PopulationDensity::piecewise(breaks, heights).map_err(err)?,
        })
    }

    #[staticmethod]
    fn parse(spec: &str) -> PyResult<Self> {
        Ok(Self {
            inner: hq::PopulationDensity::parse(spec).map_err(err)?,
        })
    }

    fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x)
    }

    #[getter]
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    fn __repr__(&self) -> String {
        format!("PopulationDensity({})", json(&self.inner))
    }

    fn to_json(&self) -> String {
        json(&self.inner)
    }
}

#[pyclass(frozen, get_all, module = "hillquota")]
struct SampleEstimate {
    seats: u64,
    n: u64,
    seed: u64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
    redraws: u64,
    json: String,
}

#[pymethods]
impl SampleEstimate {
    fn __repr__(&self) -> String {
        format!(
            "SampleEstimate(seats={}, n={}, p_hat={}, ci=({}, {}))",
            self.seats, self.n, self.p_hat, self.ci_low, self.ci_high
        )
    }

    fn to_json(&self) -> String {
        self.json.clone()
    }
}

/// Huntington-Hill apportionment of `seats` among states with populations `pops`.
#[pyfunction]
fn huntington_hill(pops: Vec<Bound<'_, PyAny>>, seats: u64) -> PyResult<Apportionment> {
    on_populations!(pops, |pv| Ok(Apportionment {
        inner: hq::huntington_hill(&pv, seats).map_err(err)?
    }))
}

/// Like `huntington_hill`, also returning the seat grants in order.
#[pyfunction]
fn huntington_hill_traced(pops: Vec<Bound<'_, PyAny>>, seats: u64) -> PyResult<(Apportionment, Vec<Grant>)> {
    on_populations!(pops, |pv| {
        let (app, trace) = hq::huntington_hill_traced(&pv, seats).map_err(err)?;
        let grants = trace
            .into_iter()
            .map(|g| Grant {
                seat: g.seat,
                state: g.state,
                held: g.held,
                priority: g.priority,
            })
            .collect();
        Ok((Apportionment { inner: app }, grants))
    })
}

/// The same apportionment by the modified-divisor formulation.
#[pyfunction]
fn hill_divisor(pops: Vec<Bound<'_, PyAny>>, seats: u64) -> PyResult<Apportionment> {
    on_populations!(pops, |pv| Ok(Apportionment {
        inner: hq::hill_divisor(&pv, seats).map_err(err)?
    }))
}

#[pyfunction]
fn standard_quotas(pops: Vec<Bound<'_, PyAny>>, seats: u64) -> PyResult<Vec<f64>> {
    on_populations!(pops, |pv| Ok(hq::standard_quotas(&pv, seats).map_err(err)?.to_f64()))
}

/// Apportions and classifies every state against its quota bounds.
#[pyfunction]
fn detect_violations(pops: Vec<Bound<'_, PyAny>>, seats: u64) -> PyResult<ViolationReport> {
    on_populations!(pops, |pv| Ok(ViolationReport {
        inner: hq::detect_violations(&pv, seats).map_err(err)?
    }))
}

/// Evaluates the three-state violation criteria on quotas summing to `seats`.
#[pyfunction]
fn evaluate_criteria(quotas: Vec<Bound<'_, PyAny>>, seats: u64) -> PyResult<CriteriaReport> {
    let report = match numbers(&quotas)? {
        Numbers::Float(v) => hq::evaluate_criteria(&QuotaVector::from_quotas(v, seats).map_err(err)?),
        Numbers::Integer(v) => {
            let v = v.into_iter().map(|q| BigRational::from_integer(q.into())).collect();
            hq::evaluate_criteria(&QuotaVector::from_quotas(v, seats).map_err(err)?)
        }
        Numbers::Rational(v) => hq::evaluate_criteria(&QuotaVector::from_quotas(v, seats).map_err(err)?),
    };
    Ok(CriteriaReport {
        inner: report.map_err(err)?,
    })
}

#[pyfunction]
fn violation_criteria_test(quotas: Vec<Bound<'_, PyAny>>, seats: u64) -> PyResult<bool> {
    Ok(evaluate_criteria(quotas, seats)?.inner.holds)
}

/// Violation triangle for floors `(j, k)` of the two smaller quotas.
#[pyfunction]
fn triangle(j: u64, k: u64, seats: u64) -> PyResult<FeasibleTriangle> {
    let fp = hq::FloorPair::new(j, k, seats).map_err(err)?;
    let tri = hq::triangle::<f64>(&fp).map_err(err)?;
    Ok(FeasibleTriangle {
        j,
        k,
        seats,
        vertices: tri.vertices.map(|v| v.map(|p| (p.x, p.y))),
        area: tri.area,
        empty: tri.empty,
    })
}

/// Violation probability for quotas uniform on the simplex. `precision` is
/// "double" or "high".
#[pyfunction]
#[pyo3(signature = (seats, precision = "high"))]
fn exact_uniform_probability(seats: u64, precision: &str) -> PyResult<f64> {
    match precision {
        "double" => hq::exact_uniform_probability::<f64>(seats).map_err(err),
        "high" => Ok(hq::exact_uniform_probability::<DoubleDouble>(seats).map_err(err)?.hi()),
        other => Err(PyValueError::new_err(format!("unknown precision {other:?}"))),
    }
}

/// The same probability as a `fractions.Fraction`, when every region is rational.
#[pyfunction]
fn exact_uniform_probability_rational(py: Python<'_>, seats: u64) -> PyResult<Py<PyAny>> {
    let value = hq::exact_uniform_probability_rational(seats).map_err(err)?;
    let fraction = py.import("fractions")?.getattr("Fraction")?;
    Ok(fraction.call1((value.to_string(),))?.unbind())
}

/// Violation probability by quadrature. With `dist` the populations are
/// i.i.d. from it, otherwise quotas are uniform on the simplex.
#[pyfunction]
#[pyo3(signature = (seats, dist = None, relative_tolerance = 1e-8))]
fn pdf_probability(py: Python<'_>, seats: u64, dist: Option<PopulationDensity>, relative_tolerance: f64) -> PyResult<f64> {
    let quad = QuadratureSpec::default().with_tolerance(relative_tolerance);
    quad.validate().map_err(err)?;
    py.detach(|| match dist {
        Some(d) => {
            let g = hq::iid_quota_density(&d.inner, seats, &quad)?;
            hq::general_pdf_probability(seats, &g, &quad)
        }
        None => hq::general_pdf_probability(seats, &UniformSimplexDensity::new(seats), &quad),
    })
    .map_err(err)
}

/// Monte Carlo violation rate. Without `dist`, quotas are drawn uniformly on
/// the simplex; with it, populations are drawn i.i.d.
#[pyfunction]
#[pyo3(signature = (seats, n_samples, seed, dist = None, workers = None, cross_check = false))]
fn sample_violation_rate(
    py: Python<'_>,
    seats: u64,
    n_samples: u64,
    seed: u64,
    dist: Option<PopulationDensity>,
    workers: Option<usize>,
    cross_check: bool,
) -> PyResult<SampleEstimate> {
    let scheme = match dist {
        Some(d) => SamplingScheme::iid_populations(seats, d.inner),
        None => SamplingScheme::uniform_quotas(seats),
    }
    .map_err(err)?;
    let options = SampleOptions { workers, cross_check };
    let est = py
        .detach(|| hq::sample_violation_rate_with(&scheme, n_samples, seed, &options))
        .map_err(err)?;
    Ok(SampleEstimate {
        seats: est.seats,
        n: est.n,
        seed: est.seed,
        p_hat: est.p_hat,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        redraws: est.redraws,
        json: json(&est),
    })
}

/// 95% Wald interval, clamped to [0, 1].
#[pyfunction]
fn wald_interval(p_hat: f64, n: u64) -> (f64, f64) {
    hq::wald_interval(p_hat, n)
}

#[pymodule(name = "hillquota")]
fn hillquota_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HillquotaError", m.py().get_type::<HillquotaError>())?;
    m.add_class::<Apportionment>()?;
    m.add_class::<Grant>()?;
    m.add_class::<StateReport>()?;
    m.add_class::<ViolationReport>()?;
    m.add_class::<CriteriaReport>()?;
    m.add_class::<FeasibleTriangle>()?;
    m.add_class::<PopulationDensity>()?;
    m.add_class::<SampleEstimate>()?;
    m.add_function(wrap_pyfunction!(huntington_hill, m)?)?;
    m.add_function(wrap_pyfunction!(huntington_hill_traced, m)?)?;
    m.add_function(wrap_pyfunction!(hill_divisor, m)?)?;
    m.add_function(wrap_pyfunction!(standard_quotas, m)?)?;
    m.add_function(wrap_pyfunction!(detect_violations, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_criteria, m)?)?;
    m.add_function(wrap_pyfunction!(violation_criteria_test, m)?)?;
    m.add_function(wrap_pyfunction!(triangle, m)?)?;
    m.add_function(wrap_pyfunction!(exact_uniform_probability, m)?)?;
    m.add_function(wrap_pyfunction!(exact_uniform_probability_rational, m)?)?;
    m.add_function(wrap_pyfunction!(pdf_probability, m)?)?;
    m.add_function(wrap_pyfunction!(sample_violation_rate, m)?)?;
    m.add_function(wrap_pyfunction!(wald_interval, m)?)?;
    Ok(())
}
