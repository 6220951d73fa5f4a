use capture_lab::capturing::{check_delta_system, find_capture as search, CaptureQuery};
use capture_lab::cohen::{self, CohenCondition};
use capture_lab::knaster;
use capture_lab::types::{generate_type, largest_top, RootSchedule, WidthSchedule};
use capture_lab::{build_scheme, FinSet, OrdinalCode, Report};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ordinal(text: &str) -> PyResult<OrdinalCode> {
    text.parse().map_err(err)
}

fn report(r: &Report) -> (bool, String) {
    (r.passed(), r.render_text())
}

#[pyclass(name = "TypeSequence", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyType(capture_lab::TypeSequence);

#[pymethods]
impl PyType {
    #[new]
    fn new(m: Vec<usize>, n: Vec<usize>, r: Vec<usize>) -> PyResult<Self> {
        capture_lab::TypeSequence::new(m, n, r).map(PyType).map_err(err)
    }

    /// Widths like "k+1" or "2,3,4"; roots like "diag", "cycle:0,1" or "0,1,0".
    #[staticmethod]
    #[pyo3(signature = (widths, roots, top=None, max_size=5000))]
    fn generate(widths: &str, roots: &str, top: Option<usize>, max_size: usize) -> PyResult<Self> {
        let w: WidthSchedule = widths.parse().map_err(err)?;
        let r: RootSchedule = roots.parse().map_err(err)?;
        match top {
            Some(k) => generate_type(&w, &r, k),
            None => largest_top(&w, &r, max_size),
        }
        .map(PyType)
        .map_err(err)
    }

    #[getter]
    fn top(&self) -> usize {
        self.0.top()
    }

    #[getter]
    fn m(&self) -> Vec<usize> {
        self.0.m_seq().to_vec()
    }

    #[getter]
    fn n(&self) -> Vec<usize> {
        self.0.n_seq().to_vec()
    }

    #[getter]
    fn r(&self) -> Vec<usize> {
        self.0.r_seq().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("TypeSequence(m={:?}, n={:?}, r={:?})", self.0.m_seq(), self.0.n_seq(), self.0.r_seq())
    }
}

#[pyclass(name = "Scheme", frozen)]
struct PyScheme(capture_lab::Scheme);

#[pymethods]
impl PyScheme {
    #[staticmethod]
    #[pyo3(signature = (typ, top=None))]
    fn build(typ: &PyType, top: Option<usize>) -> PyResult<Self> {
        build_scheme(&typ.0, top.unwrap_or(typ.0.top())).map(PyScheme).map_err(err)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        capture_lab::Scheme::parse(text).map(PyScheme).map_err(err)
    }

    /// The base used for order and density sweeps.
    #[staticmethod]
    fn order_base() -> PyResult<Self> {
        Self::build(&PyType::generate("k+1", cohen::ORDER_BASE_ROOTS, Some(cohen::ORDER_BASE_TOP), 0)?, None)
    }

    /// The shallow base used for forcing and generic runs.
    #[staticmethod]
    fn run_base() -> PyResult<Self> {
        Self::build(&PyType::generate("k+1", cohen::RUN_BASE_ROOTS, Some(cohen::RUN_BASE_TOP), 0)?, None)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    #[getter]
    fn top(&self) -> usize {
        self.0.top()
    }

    #[getter]
    fn universe(&self) -> u32 {
        self.0.universe()
    }

    fn level(&self, k: usize) -> PyResult<Vec<Vec<u32>>> {
        if k > self.0.top() {
            return Err(err(format!("level {k} above the top level {}", self.0.top())));
        }
        Ok(self.0.level(k).iter().map(|m| m.set.as_slice().to_vec()).collect())
    }

    fn level_of(&self, set: Vec<u32>) -> PyResult<usize> {
        self.0.level_of(&FinSet::new(set)).map_err(err)
    }

    /// `(root, pieces)` of a member.
    fn decompose(&self, set: Vec<u32>) -> PyResult<(Vec<u32>, Vec<Vec<u32>>)> {
        let (root, pieces) = self.0.decompose(&FinSet::new(set)).map_err(err)?;
        Ok((root.into_vec(), pieces.into_iter().map(FinSet::into_vec).collect()))
    }

    fn verify_axioms(&self) -> (bool, String) {
        report(&self.0.verify_axioms())
    }

    fn verify_lemmas(&self) -> (bool, String) {
        report(&capture_lab::scheme::verify_lemmas(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("Scheme(top={}, universe={}, members={})", self.0.top(), self.0.universe(), self.0.member_count())
    }
}

/// Least capture witness as a dict, or None.
#[pyfunction]
#[pyo3(signature = (scheme, family, arity=None, min_level=0))]
fn find_capture<'py>(
    py: Python<'py>,
    scheme: &PyScheme,
    family: Vec<Vec<u32>>,
    arity: Option<usize>,
    min_level: usize,
) -> PyResult<Option<Bound<'py, PyDict>>> {
    let fam = check_delta_system(family.into_iter().map(FinSet::new).collect()).map_err(err)?;
    let q = arity.map_or_else(CaptureQuery::full, CaptureQuery::fixed).min_level(min_level);
    let Some(w) = search(&scheme.0, &fam, &q).map_err(err)?.witness else { return Ok(None) };
    let d = PyDict::new(py);
    d.set_item("level", w.level)?;
    d.set_item("f", w.f.into_vec())?;
    d.set_item("indices", w.indices)?;
    d.set_item("arity", w.arity)?;
    Ok(Some(d))
}

/// The coloring table as one row per element, checked against the bridge.
#[pyfunction]
#[pyo3(signature = (scheme, max_arity=4))]
fn colorings(scheme: &PyScheme, max_arity: usize) -> PyResult<(Vec<Vec<u32>>, bool)> {
    let s = &scheme.0;
    let t = knaster::build_colorings(s);
    let ok = knaster::verify_colorings(s, &t).passed() && knaster::coloring_bridge(s, &t, max_arity).passed();
    Ok(((0..s.universe()).map(|a| t.f(a).to_vec()).collect(), ok))
}

/// `None` if `set` is a condition of the no-capture poset, else the captured tuple.
#[pyfunction]
fn pn_counterexample(scheme: &PyScheme, set: Vec<u32>, n: usize) -> PyResult<Option<Vec<u32>>> {
    match knaster::pn_is_condition(&scheme.0, &FinSet::new(set), n) {
        Ok(()) => Ok(None),
        Err(knaster::PnError::Captured(c)) => Ok(Some(c.tuple)),
        Err(e) => Err(err(e)),
    }
}

#[pyclass(name = "Condition", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCondition(CohenCondition);

#[pymethods]
impl PyCondition {
    /// Lines like `w*2 : 0 1 @ 1`.
    #[staticmethod]
    fn parse(scheme: &PyScheme, text: &str) -> PyResult<Self> {
        cohen::parse_condition(&scheme.0, text).map(PyCondition).map_err(err)
    }

    fn to_text(&self, scheme: &PyScheme) -> String {
        self.0.to_text(&scheme.0)
    }

    fn support(&self) -> Vec<String> {
        self.0.support().iter().map(|o| o.to_string()).collect()
    }

    fn phi(&self, x: u32) -> String {
        self.0.phi(x).to_string()
    }

    /// Whether `self ≤ other` (self is stronger).
    fn leq(&self, scheme: &PyScheme, other: &PyCondition) -> bool {
        cohen::leq(&scheme.0, &self.0, &other.0).is_ok()
    }

    /// `(q, x)` with `q ≤ self` and `Φ^q(x) = xi`.
    fn extend_to_cover(&self, scheme: &PyScheme, xi: &str, cap: &str) -> PyResult<(PyCondition, u32)> {
        let (q, x) = cohen::extend_to_cover(&scheme.0, &self.0, ordinal(xi)?, ordinal(cap)?).map_err(err)?;
        Ok((PyCondition(q), x))
    }

    fn induced_family(&self, scheme: &PyScheme) -> Vec<String> {
        cohen::induced_family(&scheme.0, &self.0).iter().map(|l| l.to_string()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Runs a goal schedule; returns the final condition, the goal lines and the fragment check.
#[pyfunction]
#[pyo3(signature = (scheme, schedule, fuel=50, cap="w*16"))]
fn run_generic<'py>(py: Python<'py>, scheme: &PyScheme, schedule: &str, fuel: usize, cap: &str) -> PyResult<Bound<'py, PyDict>> {
    let goals = cohen::parse_schedule(schedule).map_err(err)?;
    let run = cohen::run_generic(&scheme.0, &goals, fuel, ordinal(cap)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("condition", PyCondition(run.chain.last().cloned().unwrap_or_default()))?;
    d.set_item("chain_length", run.chain.len())?;
    d.set_item("goals", run.statuses.iter().map(|s| format!("{} [fuel {}]: {}", s.goal, s.fuel_used, s.detail)).collect::<Vec<_>>())?;
    d.set_item("fragment", run.fragment.iter().map(|l| l.to_string()).collect::<Vec<_>>())?;
    d.set_item("passed", run.check.passed())?;
    Ok(d)
}

#[pymodule]
fn capture_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyType>()?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PyCondition>()?;
    m.add_function(wrap_pyfunction!(find_capture, m)?)?;
    m.add_function(wrap_pyfunction!(colorings, m)?)?;
    m.add_function(wrap_pyfunction!(pn_counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(run_generic, m)?)?;
    Ok(())
}
