//! Python bindings: quantum states and gates, the language front end,
//! scheduled runs and the protocol verifiers.

use cqpd_core::harness::{
    self, builtin_source, canonical_json, configuration_json, haar_state, parse_state_literal,
    RunStatus, Schedule, DEFAULT_DEPTH,
};
use cqpd_core::qudit::{self, GateSpec};
use cqpd_core::semantics::{EnvValue, Environment};
use cqpd_core::syntax::{self, Program};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn gate_spec(text: &str) -> PyResult<GateSpec> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let int = |s: &str| {
        s.trim_matches(|c| c == '(' || c == ')')
            .parse::<i64>()
            .map_err(|_| value_err(format!("bad gate exponent in `{text}`")))
    };
    Ok(match t.as_str() {
        "H" => GateSpec::Hadamard,
        "Hinv" => GateSpec::HadamardInv,
        "Rc" => GateSpec::CnotRight,
        "Lc" => GateSpec::CnotLeft,
        "X" => GateSpec::ShiftX(1),
        "Z" => GateSpec::PhaseZ(1),
        _ => {
            if let Some(e) = t.strip_prefix("X^") {
                GateSpec::ShiftX(int(e)?)
            } else if let Some(e) = t.strip_prefix("Z^") {
                GateSpec::PhaseZ(int(e)?)
            } else if let Some(e) = t.strip_prefix("U^") {
                let inner = e.trim_start_matches('(').trim_end_matches(')');
                let (j, k) = inner
                    .split_once(',')
                    .ok_or_else(|| value_err(format!("expected U^(j,k), got `{text}`")))?;
                GateSpec::PauliU(int(j)?, int(k)?)
            } else {
                return Err(value_err(format!("unknown gate `{text}`")));
            }
        }
    })
}

/// State vector over named qudits of a common dimension.
#[pyclass(name = "QuantumState", module = "cqpd", from_py_object)]
#[derive(Clone)]
struct PyQuantumState {
    inner: qudit::QuantumState,
}

#[pymethods]
impl PyQuantumState {
    #[new]
    fn new(dimension: usize, names: Vec<String>, amplitudes: Vec<Complex64>) -> PyResult<Self> {
        qudit::QuantumState::from_amplitudes(dimension, names, amplitudes)
            .map(|inner| PyQuantumState { inner })
            .map_err(value_err)
    }

    /// Basis state `|digits>`.
    #[staticmethod]
    fn basis(dimension: usize, names: Vec<String>, digits: Vec<usize>) -> PyResult<Self> {
        qudit::QuantumState::basis(dimension, names, &digits)
            .map(|inner| PyQuantumState { inner })
            .map_err(value_err)
    }

    /// Parses `|k>` or `amp:index,...` into a one-qudit state.
    #[staticmethod]
    #[pyo3(signature = (text, dimension, name = "x"))]
    fn parse(text: &str, dimension: usize, name: &str) -> PyResult<Self> {
        parse_state_literal(text, dimension, name)
            .map(|inner| PyQuantumState { inner })
            .map_err(value_err)
    }

    /// Haar-random one-qudit state.
    #[staticmethod]
    #[pyo3(signature = (dimension, seed, name = "x"))]
    fn haar(dimension: usize, seed: u64, name: &str) -> PyResult<Self> {
        if dimension < 2 {
            return Err(value_err("dimension must be at least 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(PyQuantumState {
            inner: haar_state(dimension, &mut rng, name),
        })
    }

    /// Generalized Bell state `|Psi^{nm}>` on `names`.
    #[staticmethod]
    fn bell(dimension: usize, n: usize, m: usize, names: (String, String)) -> PyResult<Self> {
        qudit::bell_state(dimension, n, m, [names.0, names.1])
            .map(|inner| PyQuantumState { inner })
            .map_err(value_err)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    /// Applies a gate such as `"H"`, `"X^2"`, `"U^(1,2)"` or `"Rc"` to `targets`.
    fn apply(&self, gate: &str, targets: Vec<String>) -> PyResult<Self> {
        qudit::apply_gate(&self.inner, &targets, &gate_spec(gate)?)
            .map(|inner| PyQuantumState { inner })
            .map_err(value_err)
    }

    /// Standard-basis measurement: `[(outcome, weight, post_state), ...]`.
    fn measure(&self, targets: Vec<String>) -> PyResult<Vec<(usize, f64, PyQuantumState)>> {
        let outcomes = qudit::measure(&self.inner, &targets).map_err(value_err)?;
        Ok(outcomes
            .into_iter()
            .map(|o| {
                (
                    o.outcome,
                    o.weight,
                    PyQuantumState {
                        inner: o.post_state,
                    },
                )
            })
            .collect())
    }

    /// Tensor product with `other`.
    fn join(&self, other: &PyQuantumState) -> PyResult<Self> {
        qudit::join(&self.inner, &other.inner)
            .map(|inner| PyQuantumState { inner })
            .map_err(value_err)
    }

    /// Traces out `names`; the result must be pure.
    fn discard(&self, names: Vec<String>) -> PyResult<Self> {
        qudit::discard(&self.inner, &names)
            .map(|inner| PyQuantumState { inner })
            .map_err(value_err)
    }

    /// `|<self|other>|^2`.
    fn fidelity(&self, other: &PyQuantumState) -> PyResult<f64> {
        qudit::fidelity(&self.inner, &other.inner).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.num_qudits()
    }

    fn __repr__(&self) -> String {
        format!(
            "QuantumState(dimension={}, names={:?})",
            self.inner.dimension(),
            self.inner.names()
        )
    }
}

/// One scheduled execution of a program.
#[pyclass(name = "Trace", module = "cqpd", frozen)]
struct PyTrace {
    inner: harness::Trace,
}

#[pymethods]
impl PyTrace {
    /// Transition labels in order, e.g. `["tau", "c?[1,2]", "d![1,1]"]`.
    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner
            .steps
            .iter()
            .map(|s| s.label.to_string())
            .collect()
    }

    /// `"terminated"`, `"deadlock"` or `"depth_exceeded"`.
    #[getter]
    fn status(&self) -> &'static str {
        match self.inner.status {
            RunStatus::Terminated => "terminated",
            RunStatus::Deadlock { .. } => "deadlock",
            RunStatus::DepthExceeded => "depth_exceeded",
        }
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    /// Component weights (or branch probabilities) after each step.
    #[getter]
    fn weights(&self) -> Vec<Vec<f64>> {
        self.inner.steps.iter().map(|s| s.weights.clone()).collect()
    }

    fn final_configuration_json(&self) -> String {
        canonical_json(&configuration_json(self.inner.final_config()))
    }

    fn to_json(&self) -> String {
        canonical_json(&self.inner.to_json())
    }

    fn __len__(&self) -> usize {
        self.inner.steps.len()
    }
}

/// Verdict of a protocol verification.
#[pyclass(name = "VerificationReport", module = "cqpd", frozen)]
struct PyReport {
    inner: harness::VerificationReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass
    }

    #[getter]
    fn protocol(&self) -> String {
        self.inner.protocol.clone()
    }

    #[getter]
    fn max_deviation(&self) -> f64 {
        self.inner.max_deviation
    }

    /// `(branch, weight, passed)` per measurement branch.
    #[getter]
    fn branches(&self) -> Vec<(String, f64, bool)> {
        self.inner
            .branches
            .iter()
            .map(|b| (b.branch.clone(), b.weight, b.pass))
            .collect()
    }

    /// Superdense-coding `(raw, decoded)` values, `None` for teleportation.
    #[getter]
    fn outcome(&self) -> Option<((i64, i64), (i64, i64))> {
        self.inner
            .outcome
            .as_ref()
            .map(|o| ((o.raw[0], o.raw[1]), (o.decoded[0], o.decoded[1])))
    }

    fn to_json(&self) -> String {
        canonical_json(&self.inner)
    }

    fn __bool__(&self) -> bool {
        self.inner.pass
    }
}

fn load(source: &str) -> PyResult<Program> {
    let text = builtin_source(source).unwrap_or(source);
    syntax::parse(text).map_err(value_err)
}

fn environment(d: usize, inputs: Option<&Bound<'_, PyDict>>) -> PyResult<Environment> {
    let mut env = Environment::new();
    let Some(inputs) = inputs else {
        return Ok(env);
    };
    for (key, value) in inputs.iter() {
        let name: String = key.extract()?;
        let v = if let Ok(i) = value.extract::<i64>() {
            EnvValue::Int(i)
        } else if let Ok(s) = value.extract::<PyQuantumState>() {
            EnvValue::State(s.inner)
        } else {
            let text: String = value.extract()?;
            EnvValue::State(parse_state_literal(&text, d, &name).map_err(value_err)?)
        };
        env.insert(name, v);
    }
    Ok(env)
}

/// Parses `source` (or the name of a shipped protocol) and returns its
/// type errors as `(kind, message, line, col)`.
#[pyfunction]
fn check(source: &str) -> PyResult<Vec<(String, String, usize, usize)>> {
    let program = load(source)?;
    Ok(syntax::typecheck(&program)
        .into_iter()
        .map(|d| (format!("{:?}", d.kind), d.message, d.line, d.col))
        .collect())
}

/// Canonical pretty-printed form of a program.
#[pyfunction]
fn pretty(source: &str) -> PyResult<String> {
    Ok(syntax::pretty(&load(source)?))
}

/// Runs a program under the seeded scheduler.
#[pyfunction]
#[pyo3(signature = (source, dimension = 2, seed = 0, inputs = None, depth = DEFAULT_DEPTH))]
fn run(
    source: &str,
    dimension: usize,
    seed: u64,
    inputs: Option<&Bound<'_, PyDict>>,
    depth: usize,
) -> PyResult<PyTrace> {
    let program = load(source)?;
    let env = environment(dimension, inputs)?;
    let schedule = Schedule::seeded(seed).with_depth(depth);
    harness::run(&program, dimension, &env, &schedule)
        .map(|inner| PyTrace { inner })
        .map_err(runtime_err)
}

/// Every interleaving of a program up to `depth` steps.
#[pyfunction]
#[pyo3(signature = (source, dimension = 2, inputs = None, depth = DEFAULT_DEPTH))]
fn enumerate(
    source: &str,
    dimension: usize,
    inputs: Option<&Bound<'_, PyDict>>,
    depth: usize,
) -> PyResult<Vec<PyTrace>> {
    let program = load(source)?;
    let env = environment(dimension, inputs)?;
    harness::enumerate(&program, dimension, &env, depth)
        .map(|ts| ts.into_iter().map(|inner| PyTrace { inner }).collect())
        .map_err(runtime_err)
}

/// Teleports `state` at dimension `d` and checks every branch.
#[pyfunction]
fn verify_teleport(dimension: usize, state: &PyQuantumState) -> PyResult<PyReport> {
    harness::verify_teleport(dimension, &state.inner)
        .map(|inner| PyReport { inner })
        .map_err(runtime_err)
}

/// Runs superdense coding of `(a, b)` and checks every intermediate state.
#[pyfunction]
fn verify_sdc(dimension: usize, a: i64, b: i64) -> PyResult<PyReport> {
    harness::verify_sdc(dimension, a, b)
        .map(|inner| PyReport { inner })
        .map_err(runtime_err)
}

#[pymodule]
fn cqpd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuantumState>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(pretty, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_teleport, m)?)?;
    m.add_function(wrap_pyfunction!(verify_sdc, m)?)?;
    Ok(())
}
