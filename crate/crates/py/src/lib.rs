//! Python bindings. Big results (traces, reports, synthesis) cross as JSON strings.

use num_bigint::BigInt;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use psi_order_core::cf::{Expansion, QuotientSource};
use psi_order_core::dynamics::{ChangeTrace, Dynamics, FunctionTuple, TraceOptions};
use psi_order_core::io::{format_sci, parse_member, to_json_pretty};
use psi_order_core::psi::{compare_psi, width_for_bits, PsiFunction, StrictOrder, DEFAULT_DEPTH_LIMIT};
use psi_order_core::synth::{extremal_schedule, synthesize, JumpSchedule, DEFAULT_SEARCH_BOUND};
use psi_order_core::triangle::{self, TrianglePermutation};
use psi_order_core::verify;
use psi_order_core::Error;

create_exception!(psi_order, PsiOrderError, PyValueError);
create_exception!(psi_order, ComparisonUndecided, PsiOrderError);

fn py_err(e: Error) -> PyErr {
    let msg = format!("{}: {e}", e.kind());
    match e {
        Error::ComparisonUndecided { .. } => ComparisonUndecided::new_err(msg),
        _ => PsiOrderError::new_err(msg),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for Result<T, Error> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// A partial-quotient source such as `periodic:[1;|2]`, `rule:e` or `seeded:7:10`.
#[pyclass(name = "Source", module = "psi_order", frozen, from_py_object)]
#[derive(Clone)]
struct PySource {
    inner: QuotientSource,
}

#[pymethods]
impl PySource {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PySource {
            inner: spec.parse().py()?,
        })
    }

    #[staticmethod]
    fn golden() -> Self {
        PySource {
            inner: QuotientSource::golden(),
        }
    }

    #[staticmethod]
    fn sqrt2() -> Self {
        PySource {
            inner: QuotientSource::sqrt2(),
        }
    }

    #[staticmethod]
    fn e() -> Self {
        PySource {
            inner: QuotientSource::e(),
        }
    }

    #[staticmethod]
    fn seeded(seed: u64, bound: u64) -> PyResult<Self> {
        Ok(PySource {
            inner: QuotientSource::seeded(seed, bound).py()?,
        })
    }

    /// First `n` partial quotients, a0 first.
    fn terms(&self, n: usize) -> PyResult<Vec<BigInt>> {
        let mut exp = Expansion::new(self.inner.clone());
        Ok(exp.prefix(n).py()?.to_vec())
    }

    /// `(p_m, q_m)` for `m < n`.
    fn convergents(&self, n: usize) -> PyResult<Vec<(BigInt, BigInt)>> {
        let mut f = PsiFunction::new("f", self.inner.clone());
        (0..n)
            .map(|m| f.convergent(m).map(|c| (c.p.clone(), c.q.clone())).py())
            .collect()
    }

    /// Distinct convergent denominators up to `horizon`.
    fn denominators(&self, horizon: BigInt) -> PyResult<Vec<BigInt>> {
        PsiFunction::new("f", self.inner.clone())
            .denominators_upto(&horizon)
            .py()
    }

    /// `psi(t)` as decimal strings `(lo, hi)` with width at most `2^-precision`.
    #[pyo3(signature = (t, precision = 80))]
    fn psi(&self, t: BigInt, precision: u32) -> PyResult<(String, String)> {
        let v = PsiFunction::new("f", self.inner.clone())
            .psi_at(&t, &width_for_bits(precision))
            .py()?;
        Ok((
            format_sci(&v.bracket.lo, 20, false),
            format_sci(&v.bracket.hi, 20, true),
        ))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Source('{}')", self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Sign of `psi_a(t) - psi_b(t)`, certified.
#[pyfunction]
#[pyo3(signature = (a, b, t, depth_limit = DEFAULT_DEPTH_LIMIT))]
fn compare(a: &PySource, b: &PySource, t: BigInt, depth_limit: usize) -> PyResult<i32> {
    let mut f = PsiFunction::new("a", a.inner.clone());
    let mut g = PsiFunction::new("b", b.inner.clone());
    let v = compare_psi(&mut f, &mut g, &t, depth_limit).py()?;
    Ok(match v.ordering {
        StrictOrder::Less => -1,
        StrictOrder::Greater => 1,
    })
}

fn tuple_of(sources: Vec<String>) -> PyResult<FunctionTuple> {
    let mut members = Vec::new();
    for (i, spec) in sources.iter().enumerate() {
        let (label, source) = parse_member(spec).py()?;
        members.push((label.unwrap_or_else(|| format!("f{}", i + 1)), source));
    }
    FunctionTuple::new(members).py()
}

/// Order vector of the tuple at `t`.
#[pyfunction]
#[pyo3(signature = (sources, t, depth_limit = DEFAULT_DEPTH_LIMIT))]
fn order_vector(sources: Vec<String>, t: BigInt, depth_limit: usize) -> PyResult<Vec<String>> {
    let v = Dynamics::new(tuple_of(sources)?)
        .order_vector_at(&t, depth_limit)
        .py()?;
    Ok(v.0)
}

/// Change trace as JSON.
#[pyfunction]
#[pyo3(signature = (sources, t0 = BigInt::from(1), count = 20, horizon = None, max_events = None, depth_limit = DEFAULT_DEPTH_LIMIT))]
fn trace(
    sources: Vec<String>,
    t0: BigInt,
    count: usize,
    horizon: Option<BigInt>,
    max_events: Option<usize>,
    depth_limit: usize,
) -> PyResult<String> {
    let opts = TraceOptions {
        count,
        depth_limit,
        horizon,
        max_events,
        seed: 0,
    };
    let trace = Dynamics::new(tuple_of(sources)?)
        .change_trace(&t0, &opts)
        .py()?;
    to_json_pretty(&trace).py()
}

/// Verification report (JSON) for a trace given as JSON.
#[pyfunction]
fn verify_trace(trace_json: &str, k: usize) -> PyResult<String> {
    let trace: ChangeTrace = serde_json::from_str(trace_json)
        .map_err(Error::from)
        .py()?;
    let report = verify::verify_structure(&trace, k).py()?;
    to_json_pretty(&report).py()
}

#[pyfunction]
fn linear_index(k: usize, j: usize, l: usize) -> PyResult<usize> {
    triangle::linear_index(k, j, l).py()
}

#[pyfunction]
fn inverse_index(k: usize, position: usize) -> PyResult<(usize, usize)> {
    let idx = triangle::inverse_index(k, position).py()?;
    Ok((idx.j, idx.l))
}

/// Apply the triangular permutation to any sequence of length `k(k+1)/2`.
#[pyfunction]
fn apply_pi<'py>(k: usize, v: Vec<Bound<'py, PyAny>>) -> PyResult<Vec<Bound<'py, PyAny>>> {
    TrianglePermutation::new(k).py()?.apply(&v).py()
}

#[pyfunction]
fn pi_order(k: usize) -> PyResult<usize> {
    triangle::pi_order(k).py()
}

#[pyfunction]
fn cycle_decomposition(k: usize) -> PyResult<Vec<Vec<usize>>> {
    triangle::cycle_decomposition(k).py()
}

#[pyfunction]
fn canonical_predecessor(k: usize) -> PyResult<Vec<(usize, usize)>> {
    Ok(triangle::canonical_predecessor(k)
        .py()?
        .into_iter()
        .map(|p| (p.j, p.l))
        .collect())
}

#[pyfunction]
fn project(v: Vec<String>, subset: Vec<String>) -> PyResult<Vec<String>> {
    verify::project(&v, &subset).py()
}

#[pyfunction]
fn preimage(u: Vec<String>, vectors: Vec<Vec<String>>, subset: Vec<String>) -> Vec<Vec<String>> {
    verify::preimage(&u, &vectors, &subset)
        .into_iter()
        .cloned()
        .collect()
}

/// Schedule JSON for the periodic calendar with `k` labels per event.
#[pyfunction]
fn extremal(k: usize, cycles: usize) -> PyResult<String> {
    to_json_pretty(&extremal_schedule(k, cycles).py()?).py()
}

/// Synthesis result (JSON) for a preset name or schedule JSON.
#[pyfunction]
#[pyo3(signature = (schedule, search_bound = DEFAULT_SEARCH_BOUND))]
fn synth(schedule: &str, search_bound: usize) -> PyResult<String> {
    let schedule = JumpSchedule::parse(schedule).py()?;
    let result = synthesize(&schedule, search_bound).py()?;
    result.replay().py()?;
    to_json_pretty(&result).py()
}

#[pymodule]
fn psi_order(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PsiOrderError", m.py().get_type::<PsiOrderError>())?;
    m.add("ComparisonUndecided", m.py().get_type::<ComparisonUndecided>())?;
    m.add_class::<PySource>()?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(order_vector, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(verify_trace, m)?)?;
    m.add_function(wrap_pyfunction!(linear_index, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_index, m)?)?;
    m.add_function(wrap_pyfunction!(apply_pi, m)?)?;
    m.add_function(wrap_pyfunction!(pi_order, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_predecessor, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(preimage, m)?)?;
    m.add_function(wrap_pyfunction!(extremal, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    Ok(())
}
