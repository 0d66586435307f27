//! Hybrid actor-critic: `obs -> linear -> quantum body -> {policy, value}`.
//!
//! The flat parameter order, shared with the optimiser store and
//! checkpoints, is:
//!
//! 1. input map weight (row-major `n_qubits x obs_dim`), input map bias
//! 2. quantum body: per block every candidate's `θ_j` then the block's
//!    structural weights (a fixed baseline body has only its `θ`)
//! 3. policy head weight, bias; value head weight, bias

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::ansatz::{baseline, CircuitDescriptor, DEFAULT_LAYERS, DEFAULT_QUBITS};
use crate::ensemble::{DiffQasStack, GradientMethod, StackTrace};
use crate::error::{Error, Result};
use crate::qsim::{adjoint_vjp, param_shift_gradients, run_circuit};

pub const OBS_DIM: usize = 147;
pub const N_ACTIONS: usize = 6;

static NEXT_REVISION: AtomicU64 = AtomicU64::new(1);

fn fresh_revision() -> u64 {
    NEXT_REVISION.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out x n_in`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_out,
            weight: vec![0.0; n_in * n_out],
            bias: vec![0.0; n_out],
        }
    }

    /// Weights and biases uniform in `±1/sqrt(n_in)`.
    pub fn init<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (n_in as f64).sqrt();
        let mut draw = || rng.random_range(-bound..bound);
        let weight = (0..n_in * n_out).map(|_| draw()).collect();
        let bias = (0..n_out).map(|_| draw()).collect();
        Self {
            n_in,
            n_out,
            weight,
            bias,
        }
    }

    pub fn n_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_in);
        self.weight
            .chunks_exact(self.n_in)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    /// Appends `(dW, db)` to `grads` and returns `dL/dx`.
    fn backward(&self, x: &[f64], grad_out: &[f64], grads: &mut Vec<f64>) -> Vec<f64> {
        for g in grad_out {
            grads.extend(x.iter().map(|v| g * v));
        }
        grads.extend_from_slice(grad_out);
        let mut grad_in = vec![0.0; self.n_in];
        for (row, g) in self.weight.chunks_exact(self.n_in).zip(grad_out) {
            for (gi, w) in grad_in.iter_mut().zip(row) {
                *gi += g * w;
            }
        }
        grad_in
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.weight);
        out.extend_from_slice(&self.bias);
    }

    fn read_flat(&mut self, flat: &[f64]) -> usize {
        let nw = self.weight.len();
        self.weight.copy_from_slice(&flat[..nw]);
        let nb = self.bias.len();
        self.bias.copy_from_slice(&flat[nw..nw + nb]);
        nw + nb
    }
}

/// Which quantum function sits between the linear map and the heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    /// Stack of 36-candidate ensembles with structural weights.
    DiffQas,
    /// A single hand-designed circuit, `k` in `1..=6`.
    Baseline(usize),
}

impl fmt::Display for BodyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyKind::DiffQas => write!(f, "diffqas"),
            BodyKind::Baseline(k) => write!(f, "baseline-{k}"),
        }
    }
}

impl FromStr for BodyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "diffqas" {
            return Ok(BodyKind::DiffQas);
        }
        let k = s
            .strip_prefix("baseline-")
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|k| (1..=6).contains(k))
            .ok_or_else(|| {
                Error::Parse(format!("unknown mode `{s}`, expected diffqas or baseline-1..6"))
            })?;
        Ok(BodyKind::Baseline(k))
    }
}

impl Serialize for BodyKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BodyKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub obs_dim: usize,
    pub n_actions: usize,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub body: BodyKind,
    /// Ensemble stack depth; ignored for baseline bodies.
    pub n_blocks: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            obs_dim: OBS_DIM,
            n_actions: N_ACTIONS,
            n_qubits: DEFAULT_QUBITS,
            n_layers: DEFAULT_LAYERS,
            body: BodyKind::DiffQas,
            n_blocks: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumBody {
    Ensemble(DiffQasStack),
    Fixed {
        descriptor: CircuitDescriptor,
        theta: Vec<f64>,
    },
}

impl QuantumBody {
    fn n_params(&self) -> usize {
        match self {
            QuantumBody::Ensemble(s) => s.n_params(),
            QuantumBody::Fixed { theta, .. } => theta.len(),
        }
    }
}

#[derive(Debug, Clone)]
enum BodyTrace {
    Ensemble(StackTrace),
    Fixed { input: Vec<f64>, output: Vec<f64> },
}

impl BodyTrace {
    fn output(&self) -> &[f64] {
        match self {
            BodyTrace::Ensemble(t) => t.output(),
            BodyTrace::Fixed { output, .. } => output,
        }
    }
}

/// Everything a backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub logits: Vec<f64>,
    pub value: f64,
    revision: u64,
    obs: Vec<f64>,
    encoded: Vec<f64>,
    body: BodyTrace,
}

impl ForwardPass {
    /// Encoding angles fed to the quantum body.
    pub fn encoded(&self) -> &[f64] {
        &self.encoded
    }

    /// Expectation vector leaving the quantum body.
    pub fn features(&self) -> &[f64] {
        self.body.output()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    InputMap,
    CircuitParams,
    StructuralWeights,
    PolicyHead,
    ValueHead,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSegment {
    pub kind: SegmentKind,
    /// Ensemble block index for body segments.
    pub block: Option<usize>,
    pub range: Range<usize>,
}

#[derive(Debug, Clone)]
pub struct ActorCritic {
    config: ModelConfig,
    input_map: Linear,
    body: QuantumBody,
    policy_head: Linear,
    value_head: Linear,
    gradient_method: GradientMethod,
    revision: u64,
}

impl PartialEq for ActorCritic {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.input_map == other.input_map
            && self.body == other.body
            && self.policy_head == other.policy_head
            && self.value_head == other.value_head
    }
}

impl ActorCritic {
    pub fn new<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        if config.obs_dim == 0 || config.n_actions == 0 {
            return Err(Error::Config("observation and action sizes must be positive".into()));
        }
        let n = config.n_qubits;
        if n == 0 || n > crate::qsim::MAX_QUBITS {
            return Err(Error::Config(format!("qubit count {n} out of range")));
        }
        let input_map = Linear::init(config.obs_dim, n, rng);
        let body = match config.body {
            BodyKind::DiffQas => {
                if config.n_blocks == 0 {
                    return Err(Error::Config("diffqas body needs at least one block".into()));
                }
                QuantumBody::Ensemble(DiffQasStack::new(config.n_blocks, n, config.n_layers, rng)?)
            }
            BodyKind::Baseline(k) => {
                let descriptor = baseline(k, n, config.n_layers)?;
                let theta = (0..descriptor.n_params())
                    .map(|_| rng.random_range(-PI..PI))
                    .collect();
                QuantumBody::Fixed { descriptor, theta }
            }
        };
        let policy_head = Linear::init(n, config.n_actions, rng);
        let value_head = Linear::init(n, 1, rng);
        Ok(Self {
            config,
            input_map,
            body,
            policy_head,
            value_head,
            gradient_method: GradientMethod::default(),
            revision: fresh_revision(),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn input_map(&self) -> &Linear {
        &self.input_map
    }

    pub fn policy_head(&self) -> &Linear {
        &self.policy_head
    }

    pub fn value_head(&self) -> &Linear {
        &self.value_head
    }

    pub fn body(&self) -> &QuantumBody {
        &self.body
    }

    /// Mutable access to the ensemble stack, if the body has one.
    pub fn stack_mut(&mut self) -> Option<&mut DiffQasStack> {
        self.revision = fresh_revision();
        match &mut self.body {
            QuantumBody::Ensemble(s) => Some(s),
            QuantumBody::Fixed { .. } => None,
        }
    }

    pub fn stack(&self) -> Option<&DiffQasStack> {
        match &self.body {
            QuantumBody::Ensemble(s) => Some(s),
            QuantumBody::Fixed { .. } => None,
        }
    }

    pub fn set_gradient_method(&mut self, method: GradientMethod) {
        self.gradient_method = method;
    }

    pub fn n_params(&self) -> usize {
        self.input_map.n_params()
            + self.body.n_params()
            + self.policy_head.n_params()
            + self.value_head.n_params()
    }

    /// Contiguous ranges of the flat parameter vector by role.
    pub fn param_layout(&self) -> Vec<ParamSegment> {
        let mut segs = Vec::new();
        let mut at = 0;
        let mut push = |kind, block, len: usize| {
            segs.push(ParamSegment {
                kind,
                block,
                range: at..at + len,
            });
            at += len;
        };
        push(SegmentKind::InputMap, None, self.input_map.n_params());
        match &self.body {
            QuantumBody::Ensemble(stack) => {
                for (m, b) in stack.blocks().iter().enumerate() {
                    push(SegmentKind::CircuitParams, Some(m), b.n_params() - b.n_candidates());
                    push(SegmentKind::StructuralWeights, Some(m), b.n_candidates());
                }
            }
            QuantumBody::Fixed { theta, .. } => push(SegmentKind::CircuitParams, Some(0), theta.len()),
        }
        push(SegmentKind::PolicyHead, None, self.policy_head.n_params());
        push(SegmentKind::ValueHead, None, self.value_head.n_params());
        segs
    }

    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        self.input_map.write_flat(&mut out);
        match &self.body {
            QuantumBody::Ensemble(s) => s.blocks().iter().for_each(|b| b.write_flat(&mut out)),
            QuantumBody::Fixed { theta, .. } => out.extend_from_slice(theta),
        }
        self.policy_head.write_flat(&mut out);
        self.value_head.write_flat(&mut out);
        out
    }

    pub fn load_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::shape("flat model parameters", self.n_params(), flat.len()));
        }
        let mut at = self.input_map.read_flat(flat);
        match &mut self.body {
            QuantumBody::Ensemble(s) => {
                for b in s.blocks_mut() {
                    at += b.read_flat(&flat[at..])?;
                }
            }
            QuantumBody::Fixed { theta, .. } => {
                let len = theta.len();
                theta.copy_from_slice(&flat[at..at + len]);
                at += len;
            }
        }
        at += self.policy_head.read_flat(&flat[at..]);
        self.value_head.read_flat(&flat[at..]);
        self.revision = fresh_revision();
        Ok(())
    }

    pub fn forward(&self, obs: &[f64]) -> Result<ForwardPass> {
        if obs.len() != self.config.obs_dim {
            return Err(Error::shape("observation", self.config.obs_dim, obs.len()));
        }
        let encoded = self.input_map.forward(obs);
        let body = match &self.body {
            QuantumBody::Ensemble(s) => BodyTrace::Ensemble(s.forward(&encoded)?),
            QuantumBody::Fixed { descriptor, theta } => BodyTrace::Fixed {
                input: encoded.clone(),
                output: run_circuit(descriptor, &encoded, theta)?,
            },
        };
        let features = body.output();
        let logits = self.policy_head.forward(features);
        let value = self.value_head.forward(features)[0];
        Ok(ForwardPass {
            logits,
            value,
            revision: self.revision,
            obs: obs.to_vec(),
            encoded,
            body,
        })
    }

    /// Whether `pass` was produced with the current parameters.
    pub fn is_current(&self, pass: &ForwardPass) -> bool {
        pass.revision == self.revision
    }

    /// Gradient of `grad_logits · logits + grad_value · value` over every
    /// parameter, in flat order.
    pub fn backward(&self, pass: &ForwardPass, grad_logits: &[f64], grad_value: f64) -> Result<Vec<f64>> {
        if pass.revision != self.revision {
            return Err(Error::Contract(
                "model parameters changed since the forward pass".into(),
            ));
        }
        if grad_logits.len() != self.config.n_actions {
            return Err(Error::shape("logit gradient", self.config.n_actions, grad_logits.len()));
        }
        let features = pass.body.output();

        let mut head_grads = Vec::with_capacity(self.policy_head.n_params() + self.value_head.n_params());
        let from_policy = self.policy_head.backward(features, grad_logits, &mut head_grads);
        let from_value = self.value_head.backward(features, &[grad_value], &mut head_grads);
        let upstream: Vec<f64> = from_policy.iter().zip(&from_value).map(|(a, b)| a + b).collect();

        let mut body_grads = Vec::with_capacity(self.body.n_params());
        let grad_encoded = match (&self.body, &pass.body) {
            (QuantumBody::Ensemble(stack), BodyTrace::Ensemble(trace)) => {
                let g = stack.backward(trace, &upstream, self.gradient_method)?;
                g.blocks.iter().for_each(|b| b.write_flat(&mut body_grads));
                g.input
            }
            (QuantumBody::Fixed { descriptor, theta }, BodyTrace::Fixed { input, .. }) => {
                let (g_theta, g_x) = match self.gradient_method {
                    GradientMethod::Adjoint => {
                        let v = adjoint_vjp(descriptor, input, theta, &upstream)?;
                        (v.params, v.inputs)
                    }
                    GradientMethod::ParameterShift => {
                        let j = param_shift_gradients(descriptor, input, theta)?;
                        (j.params.transpose_mul(&upstream), j.inputs.transpose_mul(&upstream))
                    }
                };
                body_grads.extend(g_theta);
                g_x
            }
            _ => return Err(Error::Contract("forward pass from a different body kind".into())),
        };

        let mut grads = Vec::with_capacity(self.n_params());
        self.input_map.backward(&pass.obs, &grad_encoded, &mut grads);
        grads.extend(body_grads);
        grads.extend(head_grads);
        Ok(grads)
    }
}

/// Numerically stable `log softmax`.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(f64::exp).collect()
}

/// Categorical draw from `softmax(logits)`; returns the action and its log-probability.
pub fn sample_action<R: Rng + ?Sized>(logits: &[f64], rng: &mut R) -> Result<(usize, f64)> {
    if logits.is_empty() {
        return Err(Error::Config("no actions to sample from".into()));
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numerical(format!("non-finite logits {logits:?}")));
    }
    let logp = log_softmax(logits);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut action = logits.len() - 1;
    for (a, lp) in logp.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            action = a;
            break;
        }
    }
    Ok((action, logp[action]))
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Model parameters plus enough metadata to rebuild and audit a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub model: ModelConfig,
    /// Candidate descriptors per ensemble block (one entry for a baseline body).
    pub descriptors: Vec<Vec<CircuitDescriptor>>,
    pub params: Vec<f64>,
    pub seed: u64,
    pub worker_seeds: Vec<u64>,
    pub optimizer_steps: u64,
    pub episodes: u64,
}

impl Checkpoint {
    pub fn from_model(model: &ActorCritic, seed: u64, worker_seeds: Vec<u64>) -> Self {
        let descriptors = match model.body() {
            QuantumBody::Ensemble(s) => s.blocks().iter().map(|b| b.descriptors().to_vec()).collect(),
            QuantumBody::Fixed { descriptor, .. } => vec![vec![*descriptor]],
        };
        Self {
            version: CHECKPOINT_VERSION,
            model: *model.config(),
            descriptors,
            params: model.flatten_params(),
            seed,
            worker_seeds,
            optimizer_steps: 0,
            episodes: 0,
        }
    }

    /// Rebuilds the model this checkpoint was taken from.
    pub fn to_model(&self) -> Result<ActorCritic> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut model = ActorCritic::new(self.model, &mut rng)?;
        model.load_params(&self.params)?;
        if let Some(stack) = model.stack() {
            let expected: Vec<Vec<CircuitDescriptor>> =
                stack.blocks().iter().map(|b| b.descriptors().to_vec()).collect();
            if expected != self.descriptors {
                return Err(Error::Parse("checkpoint descriptors do not match the model".into()));
            }
        }
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!("unsupported checkpoint version {}", ck.version)));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
