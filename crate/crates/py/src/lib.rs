//! Python bindings for `diffqas_core`.
//!
//! Descriptors cross the boundary as their text form
//! (`H+|encY|chain|varY|L2|Q8`), vectors as lists of floats.

use std::path::PathBuf;

use diffqas_core::a3c::{self, Rollout, TrainConfig, Transition};
use diffqas_core::ansatz::{self, CircuitDescriptor};
use diffqas_core::cli;
use diffqas_core::ensemble::{EnsembleBlock, GradientMethod};
use diffqas_core::env::{self as genv, EnvName};
use diffqas_core::model::{self, BodyKind, Checkpoint, ModelConfig};
use diffqas_core::{qsim, Error};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Matrix = Vec<Vec<f64>>;
type ReportRow = (usize, usize, usize, String, f64);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Numerical(_) | Error::Worker(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn descriptor(text: &str) -> PyResult<CircuitDescriptor> {
    text.parse().map_err(to_py)
}

fn method(name: &str) -> PyResult<GradientMethod> {
    match name {
        "adjoint" => Ok(GradientMethod::Adjoint),
        "parameter-shift" | "param-shift" => Ok(GradientMethod::ParameterShift),
        _ => Err(PyValueError::new_err(format!(
            "unknown gradient method `{name}`, expected adjoint or parameter-shift"
        ))),
    }
}

fn check_qubits(n: usize) -> PyResult<()> {
    if (1..=qsim::MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!("n_qubits must be in 1..={}, got {n}", qsim::MAX_QUBITS)))
    }
}

fn rows(j: &qsim::Jacobian) -> Vec<Vec<f64>> {
    (0..j.rows).map(|r| (0..j.cols).map(|c| j.get(r, c)).collect()).collect()
}

/// All 36 candidate descriptors in enumeration order.
#[pyfunction]
#[pyo3(signature = (n_qubits = ansatz::DEFAULT_QUBITS, n_layers = ansatz::DEFAULT_LAYERS))]
fn enumerate_descriptors(n_qubits: usize, n_layers: usize) -> PyResult<Vec<String>> {
    check_qubits(n_qubits)?;
    Ok(ansatz::enumerate_all(n_qubits, n_layers)
        .iter()
        .map(ToString::to_string)
        .collect())
}

/// Descriptor of hand-designed configuration `k` (1 to 6).
#[pyfunction]
#[pyo3(signature = (k, n_qubits = ansatz::DEFAULT_QUBITS, n_layers = ansatz::DEFAULT_LAYERS))]
fn baseline(k: usize, n_qubits: usize, n_layers: usize) -> PyResult<String> {
    Ok(ansatz::baseline(k, n_qubits, n_layers).map_err(to_py)?.to_string())
}

/// Pauli-Z expectations of every qubit.
#[pyfunction]
fn run_circuit(descriptor_text: &str, x: Vec<f64>, theta: Vec<f64>) -> PyResult<Vec<f64>> {
    qsim::run_circuit(&descriptor(descriptor_text)?, &x, &theta).map_err(to_py)
}

/// `(d_out/d_theta, d_out/d_x)` as nested lists, one row per output.
#[pyfunction]
fn param_shift_gradients(
    descriptor_text: &str,
    x: Vec<f64>,
    theta: Vec<f64>,
) -> PyResult<(Matrix, Matrix)> {
    let j = qsim::param_shift_gradients(&descriptor(descriptor_text)?, &x, &theta).map_err(to_py)?;
    Ok((rows(&j.params), rows(&j.inputs)))
}

/// Vector-Jacobian product: `(outputs, grad_theta, grad_x)`.
#[pyfunction]
fn adjoint_vjp(
    descriptor_text: &str,
    x: Vec<f64>,
    theta: Vec<f64>,
    upstream: Vec<f64>,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let v = qsim::adjoint_vjp(&descriptor(descriptor_text)?, &x, &theta, &upstream).map_err(to_py)?;
    Ok((v.outputs, v.params, v.inputs))
}

/// Discounted n-step returns.
#[pyfunction]
#[pyo3(signature = (rewards, bootstrap_value, gamma = 0.9))]
fn n_step_returns(rewards: Vec<f64>, bootstrap_value: f64, gamma: f64) -> Vec<f64> {
    let rollout = Rollout {
        transitions: rewards
            .into_iter()
            .map(|reward| Transition {
                obs: Vec::new(),
                action: 0,
                reward,
                value: 0.0,
                logprob: 0.0,
                pass: None,
            })
            .collect(),
        bootstrap_value,
    };
    a3c::n_step_returns(&rollout, gamma)
}

#[pyclass(name = "EnsembleBlock")]
struct PyEnsembleBlock {
    inner: EnsembleBlock,
    method: GradientMethod,
}

#[pymethods]
impl PyEnsembleBlock {
    #[new]
    #[pyo3(signature = (n_qubits = ansatz::DEFAULT_QUBITS, n_layers = ansatz::DEFAULT_LAYERS, seed = 0))]
    fn new(n_qubits: usize, n_layers: usize, seed: u64) -> PyResult<Self> {
        check_qubits(n_qubits)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            inner: EnsembleBlock::new(n_qubits, n_layers, &mut rng),
            method: GradientMethod::Adjoint,
        })
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    #[setter]
    fn set_weights(&mut self, w: Vec<f64>) -> PyResult<()> {
        self.inner.set_weights(&w).map_err(to_py)
    }

    /// Trainable angles of each candidate.
    #[getter]
    fn thetas(&self) -> Vec<Vec<f64>> {
        self.inner.thetas().to_vec()
    }

    #[getter]
    fn descriptors(&self) -> Vec<String> {
        self.inner.descriptors().iter().map(ToString::to_string).collect()
    }

    #[setter]
    fn set_gradient_method(&mut self, name: &str) -> PyResult<()> {
        self.method = method(name)?;
        Ok(())
    }

    fn forward(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.forward(&x).map_err(to_py)?.output().to_vec())
    }

    /// `(grad_weights, grad_x)` of `upstream · forward(x)`.
    fn backward(&self, x: Vec<f64>, upstream: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let trace = self.inner.forward(&x).map_err(to_py)?;
        let g = self.inner.backward(&trace, &upstream, self.method).map_err(to_py)?;
        Ok((g.weights, g.input))
    }

    /// `(index, descriptor, weight)` sorted by weight, largest first.
    fn top_candidates(&self, k: usize) -> Vec<(usize, String, f64)> {
        self.inner
            .top_candidates(k)
            .into_iter()
            .map(|c| (c.index, c.descriptor.to_string(), c.weight))
            .collect()
    }
}

#[pyclass(name = "ActorCritic")]
struct PyActorCritic {
    inner: model::ActorCritic,
}

#[pymethods]
impl PyActorCritic {
    #[new]
    #[pyo3(signature = (mode = "diffqas", n_qubits = ansatz::DEFAULT_QUBITS, n_layers = ansatz::DEFAULT_LAYERS, blocks = 1, seed = 0))]
    fn new(mode: &str, n_qubits: usize, n_layers: usize, blocks: usize, seed: u64) -> PyResult<Self> {
        let body: BodyKind = mode.parse().map_err(to_py)?;
        let config = ModelConfig {
            n_qubits,
            n_layers,
            body,
            n_blocks: blocks,
            ..ModelConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            inner: model::ActorCritic::new(config, &mut rng).map_err(to_py)?,
        })
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    fn get_params(&self) -> Vec<f64> {
        self.inner.flatten_params()
    }

    fn set_params(&mut self, flat: Vec<f64>) -> PyResult<()> {
        self.inner.load_params(&flat).map_err(to_py)
    }

    /// `(logits, value)`.
    fn forward(&self, obs: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
        let pass = self.inner.forward(&obs).map_err(to_py)?;
        Ok((pass.logits, pass.value))
    }

    /// Flat gradient of `grad_logits · logits + grad_value · value`.
    fn backward(&self, obs: Vec<f64>, grad_logits: Vec<f64>, grad_value: f64) -> PyResult<Vec<f64>> {
        let pass = self.inner.forward(&obs).map_err(to_py)?;
        self.inner.backward(&pass, &grad_logits, grad_value).map_err(to_py)
    }

    fn checkpoint_json(&self, seed: u64) -> PyResult<String> {
        Checkpoint::from_model(&self.inner, seed, Vec::new()).to_json().map_err(to_py)
    }
}

#[pyclass(name = "Env")]
struct PyEnv {
    inner: genv::Env,
}

#[pymethods]
impl PyEnv {
    #[new]
    #[pyo3(signature = (name, seed = 0))]
    fn new(name: &str, seed: u64) -> PyResult<Self> {
        let name: EnvName = name.parse().map_err(to_py)?;
        Ok(Self {
            inner: genv::make_env(name, seed).map_err(to_py)?,
        })
    }

    fn reset(&mut self) -> PyResult<Vec<f64>> {
        self.inner.reset().map_err(to_py)
    }

    /// `(observation, reward, done)`.
    fn step(&mut self, action: usize) -> PyResult<(Vec<f64>, f64, bool)> {
        let s = self.inner.step(action).map_err(to_py)?;
        Ok((s.observation, s.reward, s.done))
    }

    fn observe(&self) -> Vec<f64> {
        self.inner.observe()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }

    #[getter]
    fn max_steps(&self) -> usize {
        self.inner.max_steps()
    }

    /// Shortest action sequence to the goal from the current pose.
    fn optimal_actions(&self) -> Option<Vec<usize>> {
        let grid = self.inner.grid();
        genv::bfs_optimal_actions(grid, self.inner.pose(), grid.goal()?)
    }
}

/// Runs asynchronous training and returns a dict with `scores`, `steps`,
/// `rolling_mean`, `rolling_std`, `optimizer_steps` and `checkpoint` (JSON).
#[pyfunction]
#[pyo3(signature = (env, mode = "diffqas", workers = 4, episodes = 100, seed = 0, window = 100, lr = 1e-4, gamma = 0.9, rollout_len = 5, n_qubits = ansatz::DEFAULT_QUBITS, n_layers = ansatz::DEFAULT_LAYERS, blocks = 1))]
#[allow(clippy::too_many_arguments)]
fn train<'py>(
    py: Python<'py>,
    env: &str,
    mode: &str,
    workers: usize,
    episodes: u64,
    seed: u64,
    window: usize,
    lr: f64,
    gamma: f64,
    rollout_len: usize,
    n_qubits: usize,
    n_layers: usize,
    blocks: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = TrainConfig {
        mode: mode.parse().map_err(to_py)?,
        workers,
        episodes,
        seed,
        lr,
        gamma,
        rollout_len,
        qubits: n_qubits,
        layers: n_layers,
        blocks,
        ..TrainConfig::new(env.parse().map_err(to_py)?)
    };
    let outcome = py.detach(|| a3c::train(&cfg, window)).map_err(to_py)?;
    let d = PyDict::new(py);
    let recs = &outcome.log.records;
    d.set_item("scores", recs.iter().map(|r| r.score).collect::<Vec<_>>())?;
    d.set_item("steps", recs.iter().map(|r| r.steps).collect::<Vec<_>>())?;
    d.set_item("rolling_mean", outcome.log.rolling.iter().map(|s| s.0).collect::<Vec<_>>())?;
    d.set_item("rolling_std", outcome.log.rolling.iter().map(|s| s.1).collect::<Vec<_>>())?;
    d.set_item("optimizer_steps", outcome.optimizer_steps)?;
    d.set_item("checkpoint", outcome.checkpoint.to_json().map_err(to_py)?)?;
    Ok(d)
}

/// Ranked `(block, rank, index, descriptor, weight)` rows from a checkpoint file.
#[pyfunction]
fn report_architecture(path: PathBuf) -> PyResult<Vec<ReportRow>> {
    let ck = Checkpoint::load(&path).map_err(to_py)?;
    Ok(cli::report_architecture(&ck)
        .map_err(to_py)?
        .into_iter()
        .map(|r| (r.block, r.rank, r.candidate_index, r.descriptor.to_string(), r.weight))
        .collect())
}

#[pymodule]
fn diffqas(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("N_CANDIDATES", ansatz::N_CANDIDATES)?;
    m.add("OBS_LEN", genv::OBS_LEN)?;
    m.add("N_ACTIONS", genv::N_ACTIONS)?;
    m.add_function(wrap_pyfunction!(enumerate_descriptors, m)?)?;
    m.add_function(wrap_pyfunction!(baseline, m)?)?;
    m.add_function(wrap_pyfunction!(run_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(param_shift_gradients, m)?)?;
    m.add_function(wrap_pyfunction!(adjoint_vjp, m)?)?;
    m.add_function(wrap_pyfunction!(n_step_returns, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(report_architecture, m)?)?;
    m.add_class::<PyEnsembleBlock>()?;
    m.add_class::<PyActorCritic>()?;
    m.add_class::<PyEnv>()?;
    Ok(())
}
